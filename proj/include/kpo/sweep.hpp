// sweep.hpp — deterministic parameter sweeps over Δ and serialization of
// results (CSV/JSON) and Wigner grids (text format).

#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "kpo/wigner.hpp"

namespace kpo {

enum class SweepObservable { qfi, var_q, var_p, energies, gaps };

// Canonical column order used everywhere.
std::string observable_name(SweepObservable o);

struct SweepConfig {
    double p0_over_k = 3.0;
    bool axis_in_dc_units = true;  // Δ/Δc grid; false = Δ/K grid (required for P0=0)
    double start = -0.5;
    double stop = 2.5;
    std::size_t count = 200;
    std::vector<std::size_t> state_indices;
    std::set<SweepObservable> observables;
    double tol = 1e-10;
    double kerr = 1.0;  // output rescale only; internals run at K = 1
    std::string output_path;
    std::size_t workers = 0;  // 0 = KPO_WORKERS env or hardware concurrency

    bool operator==(const SweepConfig&) const = default;
};

struct SweepRow {
    double delta_over_k = 0.0;
    double delta_over_dc = 0.0;  // NaN when P0 = 0
    std::vector<double> values;  // flattened in column order
    std::size_t n_max = 0;
    double tail_fraction = 0.0;
    bool converged = false;

    bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
    SweepConfig config;
    std::vector<std::string> columns;  // observable columns, after the two axes
    std::vector<SweepRow> rows;
    std::string version;
    double wall_ms = 0.0;

    bool equivalent_to(const SweepResult& other) const;  // ignores wall_ms
};

// Runs the sweep; points execute concurrently and are merged by index, so the
// result (and its serialized bytes) do not depend on scheduling. A point that
// fails to converge is flagged and filled with NaN; the sweep throws only if
// every point fails.
SweepResult run_sweep(const SweepConfig& config);

SweepConfig load_sweep_config(const std::string& path);

void export_csv(const SweepResult& result, const std::string& path);
void export_json(const SweepResult& result, const std::string& path);
SweepResult import_json(const std::string& path);

// Grid text format: header "q_min q_max nq p_min p_max np", then one line per
// q row with np values; doubles are printed round-trip exact.
void export_grid(const WignerGrid& grid, const std::string& path);
WignerGrid import_grid(const std::string& path);

std::string format_csv(const SweepResult& result);

} // namespace kpo

#include "kpo/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "kpo/classical.hpp"
#include "kpo/errors.hpp"
#include "kpo/observables.hpp"
#include "kpo/version.hpp"

namespace kpo {

using nlohmann::json;

std::string observable_name(SweepObservable o) {
    switch (o) {
        case SweepObservable::qfi: return "qfi";
        case SweepObservable::var_q: return "var_q";
        case SweepObservable::var_p: return "var_p";
        case SweepObservable::energies: return "energy";
        case SweepObservable::gaps: return "gap";
    }
    return "?";
}

namespace {

SweepObservable observable_from_name(const std::string& s) {
    if (s == "qfi") return SweepObservable::qfi;
    if (s == "var_q") return SweepObservable::var_q;
    if (s == "var_p") return SweepObservable::var_p;
    if (s == "energies" || s == "energy") return SweepObservable::energies;
    if (s == "gaps" || s == "gap") return SweepObservable::gaps;
    throw std::invalid_argument("unknown observable: " + s);
}

std::vector<std::string> column_names(const SweepConfig& c) {
    std::vector<std::string> cols;
    for (SweepObservable o : c.observables) {
        for (std::size_t i : c.state_indices) {
            cols.push_back(observable_name(o) + "_" + std::to_string(i));
        }
    }
    return cols;
}

std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("KPO_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Round-trip exact, locale-independent double formatting.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

SweepRow compute_point(const SweepConfig& c, double delta_over_k, double delta_c_over_k) {
    SweepRow row;
    row.delta_over_k = delta_over_k;
    row.delta_over_dc = c.p0_over_k > 0.0 ? delta_over_k / delta_c_over_k
                                          : std::numeric_limits<double>::quiet_NaN();

    std::size_t k_states = 2;
    for (std::size_t i : c.state_indices) k_states = std::max(k_states, i + 2);

    try {
        const ModelParams params(delta_over_k, 1.0, c.p0_over_k);
        const Spectrum spec = converged_spectrum(params, k_states, c.tol);
        row.n_max = spec.n_max;
        for (std::size_t i : c.state_indices) {
            row.tail_fraction = std::max(row.tail_fraction, spec.tail_occupation(i));
        }
        for (SweepObservable o : c.observables) {
            for (std::size_t i : c.state_indices) {
                double v = std::numeric_limits<double>::quiet_NaN();
                switch (o) {
                    case SweepObservable::qfi: {
                        const auto r = qfi(spec, i);
                        row.tail_fraction = std::max(row.tail_fraction, r.tail_fraction);
                        v = r.divergent ? std::numeric_limits<double>::infinity()
                                        : r.value / (c.kerr * c.kerr);
                        break;
                    }
                    case SweepObservable::var_q:
                        v = variance_q(spec, i);
                        break;
                    case SweepObservable::var_p:
                        v = variance_p(spec, i);
                        break;
                    case SweepObservable::energies:
                        v = spec.energies[i] * c.kerr;
                        break;
                    case SweepObservable::gaps:
                        v = (spec.energies[i + 1] - spec.energies[i]) * c.kerr;
                        break;
                }
                row.values.push_back(v);
            }
        }
        row.converged = true;
    } catch (const truncation_failure&) {
        row.values.assign(c.observables.size() * c.state_indices.size(),
                          std::numeric_limits<double>::quiet_NaN());
        row.converged = false;
    } catch (const solver_failure&) {
        row.values.assign(c.observables.size() * c.state_indices.size(),
                          std::numeric_limits<double>::quiet_NaN());
        row.converged = false;
    }
    return row;
}

} // namespace

SweepResult run_sweep(const SweepConfig& config) {
    if (config.count < 2) {
        throw std::invalid_argument("run_sweep: grid needs at least 2 points");
    }
    if (config.p0_over_k == 0.0 && config.axis_in_dc_units) {
        throw std::invalid_argument(
            "run_sweep: Δ/Δc axis is undefined at P0 = 0; use a Δ/K grid");
    }
    const auto t0 = std::chrono::steady_clock::now();

    const double delta_c_over_k =
        critical_detuning(ModelParams(0.0, 1.0, config.p0_over_k));

    SweepResult result;
    result.config = config;
    result.columns = column_names(config);
    result.version = kVersion;
    result.rows.resize(config.count);

    const std::size_t workers =
        std::min(resolve_workers(config.workers), config.count);
    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        while (true) {
            const std::size_t g = cursor.fetch_add(1);
            if (g >= config.count) break;
            const double x = config.start + (config.stop - config.start) *
                                                static_cast<double>(g) /
                                                static_cast<double>(config.count - 1);
            const double delta_over_k = config.axis_in_dc_units ? x * delta_c_over_k : x;
            result.rows[g] = compute_point(config, delta_over_k, delta_c_over_k);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    bool any_ok = false;
    for (const auto& row : result.rows) any_ok = any_ok || row.converged;
    if (!any_ok) throw convergence_error("run_sweep: every grid point failed");

    result.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return result;
}

bool SweepResult::equivalent_to(const SweepResult& other) const {
    return config == other.config && columns == other.columns && rows == other.rows &&
           version == other.version;
}

// ------------------------------- config I/O ---------------------------------

SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error(path, "cannot open config");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error(path, std::string("config parse error: ") + e.what());
    }

    SweepConfig c;
    c.p0_over_k = j.at("p0_over_k").get<double>();
    const bool has_dc = j.contains("delta_over_dc_grid");
    const bool has_k = j.contains("delta_over_k_grid");
    if (has_dc == has_k) {
        throw io_error(path, "config needs exactly one of delta_over_dc_grid / "
                             "delta_over_k_grid");
    }
    const json& g = has_dc ? j["delta_over_dc_grid"] : j["delta_over_k_grid"];
    c.axis_in_dc_units = has_dc;
    c.start = g.at("start").get<double>();
    c.stop = g.at("stop").get<double>();
    c.count = g.at("count").get<std::size_t>();
    c.state_indices = j.at("state_indices").get<std::vector<std::size_t>>();
    for (const auto& name : j.at("observables")) {
        c.observables.insert(observable_from_name(name.get<std::string>()));
    }
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("kerr")) c.kerr = j["kerr"].get<double>();
    if (j.contains("output_path")) c.output_path = j["output_path"].get<std::string>();
    if (j.contains("workers")) c.workers = j["workers"].get<std::size_t>();
    return c;
}

// --------------------------------- exports ----------------------------------

std::string format_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "delta_over_k,delta_over_dc";
    for (const auto& col : result.columns) out << ',' << col;
    out << '\n';
    for (const auto& row : result.rows) {
        out << fmt(row.delta_over_k) << ',' << fmt(row.delta_over_dc);
        for (double v : row.values) out << ',' << fmt(v);
        out << '\n';
    }
    return out.str();
}

void export_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path, "cannot open for writing");
    out << format_csv(result);
    if (!out) throw io_error(path, "write failed");
}

namespace {

json config_to_json(const SweepConfig& c) {
    json grid = {{"start", c.start}, {"stop", c.stop}, {"count", c.count}};
    json j = {
        {"p0_over_k", c.p0_over_k},
        {c.axis_in_dc_units ? "delta_over_dc_grid" : "delta_over_k_grid", grid},
        {"state_indices", c.state_indices},
        {"tol", c.tol},
        {"kerr", c.kerr},
        {"output_path", c.output_path},
        {"workers", c.workers},
    };
    std::vector<std::string> obs;
    for (SweepObservable o : c.observables) obs.push_back(observable_name(o));
    j["observables"] = obs;
    return j;
}

double json_number(const json& v) {
    // NaN serializes as null; map it back.
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return v.get<double>();
}

} // namespace

void export_json(const SweepResult& result, const std::string& path) {
    json rows = json::array();
    for (const auto& row : result.rows) {
        rows.push_back({{"delta_over_k", row.delta_over_k},
                        {"delta_over_dc", row.delta_over_dc},
                        {"values", row.values},
                        {"n_max", row.n_max},
                        {"tail_fraction", row.tail_fraction},
                        {"converged", row.converged}});
    }
    const json j = {
        {"config", config_to_json(result.config)},
        {"columns", result.columns},
        {"rows", rows},
        {"version", result.version},
        {"timing", {{"wall_ms", result.wall_ms}}},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path, "cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out) throw io_error(path, "write failed");
}

SweepResult import_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error(path, "cannot open");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error(path, std::string("parse error: ") + e.what());
    }

    SweepResult result;
    const json& cj = j.at("config");
    result.config.p0_over_k = cj.at("p0_over_k").get<double>();
    const bool has_dc = cj.contains("delta_over_dc_grid");
    const json& g = has_dc ? cj["delta_over_dc_grid"] : cj["delta_over_k_grid"];
    result.config.axis_in_dc_units = has_dc;
    result.config.start = g.at("start").get<double>();
    result.config.stop = g.at("stop").get<double>();
    result.config.count = g.at("count").get<std::size_t>();
    result.config.state_indices = cj.at("state_indices").get<std::vector<std::size_t>>();
    for (const auto& name : cj.at("observables")) {
        result.config.observables.insert(observable_from_name(name.get<std::string>()));
    }
    result.config.tol = cj.at("tol").get<double>();
    result.config.kerr = cj.at("kerr").get<double>();
    result.config.output_path = cj.at("output_path").get<std::string>();
    result.config.workers = cj.at("workers").get<std::size_t>();

    result.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& rj : j.at("rows")) {
        SweepRow row;
        row.delta_over_k = json_number(rj.at("delta_over_k"));
        row.delta_over_dc = json_number(rj.at("delta_over_dc"));
        for (const auto& v : rj.at("values")) row.values.push_back(json_number(v));
        row.n_max = rj.at("n_max").get<std::size_t>();
        row.tail_fraction = rj.at("tail_fraction").get<double>();
        row.converged = rj.at("converged").get<bool>();
        result.rows.push_back(std::move(row));
    }
    result.version = j.at("version").get<std::string>();
    result.wall_ms = j.at("timing").at("wall_ms").get<double>();
    return result;
}

// --------------------------------- grids ------------------------------------

void export_grid(const WignerGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path, "cannot open for writing");
    out << fmt(grid.q_axis.front()) << ' ' << fmt(grid.q_axis.back()) << ' '
        << grid.q_axis.size() << ' ' << fmt(grid.p_axis.front()) << ' '
        << fmt(grid.p_axis.back()) << ' ' << grid.p_axis.size() << '\n';
    const std::size_t np = grid.p_axis.size();
    for (std::size_t iq = 0; iq < grid.q_axis.size(); ++iq) {
        for (std::size_t ip = 0; ip < np; ++ip) {
            if (ip) out << ' ';
            out << fmt(grid.values[iq * np + ip]);
        }
        out << '\n';
    }
    if (!out) throw io_error(path, "write failed");
}

WignerGrid import_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error(path, "cannot open");
    double q_min, q_max, p_min, p_max;
    std::size_t nq, np;
    if (!(in >> q_min >> q_max >> nq >> p_min >> p_max >> np)) {
        throw io_error(path, "bad grid header");
    }
    WignerGrid grid;
    grid.q_axis.resize(nq);
    grid.p_axis.resize(np);
    for (std::size_t j = 0; j < nq; ++j) {
        grid.q_axis[j] = q_min + (q_max - q_min) * static_cast<double>(j) /
                                     static_cast<double>(nq - 1);
    }
    for (std::size_t j = 0; j < np; ++j) {
        grid.p_axis[j] = p_min + (p_max - p_min) * static_cast<double>(j) /
                                     static_cast<double>(np - 1);
    }
    grid.values.resize(nq * np);
    for (double& v : grid.values) {
        if (!(in >> v)) throw io_error(path, "truncated grid data");
    }
    return grid;
}

} // namespace kpo

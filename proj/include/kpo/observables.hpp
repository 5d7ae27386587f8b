// observables.hpp — sensing metrics of eigenstates: quantum Fisher
// information, position/momentum variances, analytic degeneracies, and
// avoided-crossing detection.

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "kpo/tridiag_eigen.hpp"

namespace kpo {

// F = 4 Σ_{j≠i} |<Ψ_j|n̂|Ψ_i>|² / (E_j - E_i)². The sum runs over the full
// decomposition; tail_fraction reports the share contributed by the top 10%
// of states and gates convergence (< 1% accepted). Exact degeneracies with
// nonzero coupling are flagged divergent instead of producing large floats.
struct QfiResult {
    std::size_t state_index = 0;
    double value = 0.0;
    double tail_fraction = 0.0;
    bool divergent = false;
};

QfiResult qfi(const Spectrum& spec, std::size_t i);

// σ_q² and σ_p² of eigenstate i. p̂ has matrix elements ±i√((n+1)/2); for the
// real eigenvectors stored here it acts as a real antisymmetric quadratic
// form with <p> = 0. Throws convergence_error for unconverged indices.
double variance_q(const Spectrum& spec, std::size_t i);
double variance_p(const Spectrum& spec, std::size_t i);

// P0 = 0 prediction: if Δ/K + 1 = s is a positive integer, all pairs (n, m),
// n < m, n + m = s are degenerate under E_n/K = -s·n + n²; otherwise empty.
std::vector<std::pair<std::size_t, std::size_t>>
degenerate_pairs_analytic(double delta_over_k, double int_tol = 1e-9);

struct CrossingRecord {
    double delta_over_k = 0.0;
    std::pair<std::size_t, std::size_t> pair{0, 0};  // adjacent levels (i, i+1)
    double min_gap = 0.0;
    bool within_band = false;  // mean energy inside [E_ESQPT, E_step]
};

// Energy-interval selector for the crossing detector.
struct EnergyBand {
    enum class Mode {
        classical_esqpt,  // [E_ESQPT, E_step] from the phase portrait, per Δ
        explicit_range,   // fixed [lo, hi] above the ground state
        all               // no restriction
    };
    Mode mode = Mode::classical_esqpt;
    double lo = 0.0;
    double hi = 0.0;

    static EnergyBand classical() { return {Mode::classical_esqpt, 0.0, 0.0}; }
    static EnergyBand range(double lo, double hi) { return {Mode::explicit_range, lo, hi}; }
    static EnergyBand all() { return {Mode::all, 0.0, 0.0}; }
};

struct CrossingScan {
    std::vector<CrossingRecord> records;
    bool band_empty = false;  // Δ < Δc over the whole sweep, nothing selectable
};

// Sweeps Δ/K over [delta_lo, delta_hi] with `steps` points (at least 20 per
// unit), finds local minima of adjacent gaps E_{i+1}-E_i for pairs whose mean
// energy lies in the band, and refines each minimum by golden-section search.
CrossingScan find_avoided_crossings(double p0_over_k, double delta_lo_over_k,
                                    double delta_hi_over_k, std::size_t steps,
                                    const EnergyBand& band,
                                    double tol = 1e-10);

} // namespace kpo

#include "kpo/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "kpo/classical.hpp"
#include "kpo/errors.hpp"

namespace kpo {

namespace {

void require_converged(const Spectrum& spec, std::size_t i, const char* who) {
    if (i >= spec.converged_count) {
        throw convergence_error(std::string(who) + ": state " + std::to_string(i) +
                                " beyond converged_count " +
                                std::to_string(spec.converged_count));
    }
}

} // namespace

QfiResult qfi(const Spectrum& spec, std::size_t i) {
    require_converged(spec, i, "qfi");
    const std::size_t n = spec.n_max;

    // n̂|Ψ_i> is a diagonal scaling in the Fock basis.
    std::vector<double> nx(n);
    for (std::size_t m = 0; m < n; ++m) {
        nx[m] = static_cast<double>(m) * spec.states[i][m];
    }

    QfiResult out;
    out.state_index = i;
    const double gap_tol = 1e-12 * spec.params.kerr;
    double total = 0.0;
    double tail = 0.0;
    const auto tail_start = static_cast<std::size_t>(0.9 * static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double elem = std::inner_product(spec.states[j].begin(),
                                               spec.states[j].end(), nx.begin(), 0.0);
        const double gap = spec.energies[j] - spec.energies[i];
        if (std::abs(gap) < gap_tol) {
            if (std::abs(elem) > 1e-14) {
                out.divergent = true;
                out.value = std::numeric_limits<double>::infinity();
                return out;
            }
            continue;
        }
        const double term = 4.0 * elem * elem / (gap * gap);
        total += term;
        if (j >= tail_start) tail += term;
    }
    out.value = total;
    out.tail_fraction = total > 0.0 ? tail / total : 0.0;
    return out;
}

namespace {

// q̂ applied to a real coefficient vector: offdiag √((n+1)/2).
std::vector<double> apply_position(const std::vector<double>& c) {
    const std::size_t n = c.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double w = std::sqrt(static_cast<double>(m + 1) / 2.0);
        y[m] += w * c[m + 1];
        y[m + 1] += w * c[m];
    }
    return y;
}

// The real antisymmetric form B with p̂ = iB; for real c, <p> = c·Bc = 0 and
// <p²> = |Bc|².
std::vector<double> apply_momentum_form(const std::vector<double>& c) {
    const std::size_t n = c.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double w = std::sqrt(static_cast<double>(m + 1) / 2.0);
        y[m] += w * c[m + 1];
        y[m + 1] -= w * c[m];
    }
    return y;
}

double squared_norm(const std::vector<double>& v) {
    return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

} // namespace

double variance_q(const Spectrum& spec, std::size_t i) {
    require_converged(spec, i, "variance_q");
    const auto qc = apply_position(spec.states[i]);
    const double mean =
        std::inner_product(spec.states[i].begin(), spec.states[i].end(), qc.begin(), 0.0);
    return squared_norm(qc) - mean * mean;
}

double variance_p(const Spectrum& spec, std::size_t i) {
    require_converged(spec, i, "variance_p");
    return squared_norm(apply_momentum_form(spec.states[i]));
}

std::vector<std::pair<std::size_t, std::size_t>>
degenerate_pairs_analytic(double delta_over_k, double int_tol) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    const double s = delta_over_k + 1.0;
    const double rounded = std::round(s);
    if (rounded < 1.0 || std::abs(s - rounded) > int_tol) return pairs;
    const auto si = static_cast<std::size_t>(rounded);
    for (std::size_t n = 0; 2 * n < si; ++n) {
        const std::size_t m = si - n;
        if (n < m) pairs.emplace_back(n, m);
    }
    return pairs;
}

namespace {

struct GapProbe {
    ModelParams base;
    std::size_t n_max;
    std::size_t levels;

    std::vector<double> energies(double delta_over_k) const {
        ModelParams p(delta_over_k * base.kerr, base.kerr, base.pump);
        auto res = eigh_tridiagonal(build_hamiltonian(p, n_max));
        res.energies.resize(levels);
        return res.energies;
    }
};

// Golden-section refinement of a gap minimum bracketed by grid neighbours.
// Returns (delta_over_k, gap) at the best point probed.
std::pair<double, double> refine_minimum(const GapProbe& probe, std::size_t pair_lo,
                                         double a, double b) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    auto gap_at = [&](double x) {
        const auto e = probe.energies(x);
        return e[pair_lo + 1] - e[pair_lo];
    };
    double f1 = gap_at(x1);
    double f2 = gap_at(x2);
    for (int it = 0; it < 70 && (b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = gap_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = gap_at(x2);
        }
    }
    return f1 < f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

} // namespace

CrossingScan find_avoided_crossings(double p0_over_k, double delta_lo_over_k,
                                    double delta_hi_over_k, std::size_t steps,
                                    const EnergyBand& band, double tol) {
    if (steps < 2 || delta_hi_over_k <= delta_lo_over_k) {
        throw std::invalid_argument("find_avoided_crossings: bad delta range");
    }
    const double per_unit =
        static_cast<double>(steps - 1) / (delta_hi_over_k - delta_lo_over_k);
    if (per_unit < 20.0) {
        throw std::invalid_argument(
            "find_avoided_crossings: grid must resolve >= 20 points per unit Delta/K");
    }

    // One truncation for the whole scan, converged at the probe detunings.
    const ModelParams hi_params(delta_hi_over_k, 1.0, p0_over_k);
    const ModelParams lo_params(delta_lo_over_k, 1.0, p0_over_k);

    // How many levels can reach the band: E_step at the high end plus margin.
    std::size_t levels =
        std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(delta_hi_over_k)) + 6);
    {
        const auto ce = critical_energies(hi_params);
        if (ce) {
            Spectrum probe = converged_spectrum(hi_params, levels, tol);
            while (probe.energies[levels - 1] - probe.energies[0] < 1.1 * ce->second) {
                levels = levels * 3 / 2;
                probe = converged_spectrum(hi_params, levels, tol);
            }
        }
    }
    const std::size_t n_max =
        std::max(choose_truncation(hi_params, levels, tol),
                 choose_truncation(lo_params, levels, tol));
    GapProbe probe{hi_params, n_max, levels + 1};

    // Tabulate levels over the grid.
    std::vector<double> grid(steps);
    std::vector<std::vector<double>> table(steps);
    for (std::size_t g = 0; g < steps; ++g) {
        grid[g] = delta_lo_over_k + (delta_hi_over_k - delta_lo_over_k) *
                                        static_cast<double>(g) /
                                        static_cast<double>(steps - 1);
        table[g] = probe.energies(grid[g]);
    }

    // Classical [E_ESQPT, E_step] membership, independent of the selector.
    auto classical_inside = [&](double delta_over_k, double mean_above_ground) {
        const auto ce = critical_energies(ModelParams(delta_over_k, 1.0, p0_over_k));
        return ce && ce->first <= mean_above_ground && mean_above_ground <= ce->second;
    };
    auto selected = [&](double delta_over_k, double mean_above_ground) {
        switch (band.mode) {
            case EnergyBand::Mode::all:
                return true;
            case EnergyBand::Mode::explicit_range:
                return band.lo <= mean_above_ground && mean_above_ground <= band.hi;
            case EnergyBand::Mode::classical_esqpt:
                return classical_inside(delta_over_k, mean_above_ground);
        }
        return false;
    };

    CrossingScan scan;
    if (band.mode == EnergyBand::Mode::classical_esqpt) {
        bool any_band = false;
        for (std::size_t g = 0; g < steps && !any_band; ++g) {
            any_band = critical_energies(ModelParams(grid[g], 1.0, p0_over_k)).has_value();
        }
        if (!any_band) {
            scan.band_empty = true;
            return scan;
        }
    }

    for (std::size_t i = 0; i + 1 < levels; ++i) {
        for (std::size_t g = 1; g + 1 < steps; ++g) {
            const double gm = table[g - 1][i + 1] - table[g - 1][i];
            const double gc = table[g][i + 1] - table[g][i];
            const double gp = table[g + 1][i + 1] - table[g + 1][i];
            // ties on the right catch minima that straddle two grid points
            if (!(gc < gm && gc <= gp)) continue;
            const double mean = 0.5 * (table[g][i] + table[g][i + 1]) - table[g][0];
            if (!selected(grid[g], mean)) continue;
            const auto [dstar, gap] = refine_minimum(probe, i, grid[g - 1], grid[g + 1]);
            CrossingRecord rec;
            rec.delta_over_k = dstar;
            rec.pair = {i, i + 1};
            rec.min_gap = gap;
            rec.within_band = classical_inside(grid[g], mean);
            scan.records.push_back(rec);
        }
    }
    return scan;
}

} // namespace kpo

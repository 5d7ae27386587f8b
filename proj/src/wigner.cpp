#include "kpo/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "kpo/classical.hpp"
#include "kpo/errors.hpp"

namespace kpo {

namespace {

// Parity-weighted norm of D(β)|Ψ> without materializing the matrix: columns
// are generated by the recursion and folded into the running overlap vector.
double wigner_point(const std::vector<double>& c, double q, double p) {
    const std::complex<double> alpha(q / std::numbers::sqrt2, p / std::numbers::sqrt2);
    const std::complex<double> beta = -alpha;
    const std::complex<double> beta_conj = std::conj(beta);
    const double beta2 = std::norm(beta);
    const std::size_t n_state = c.size();
    const auto rows = static_cast<std::size_t>(
        std::max<double>(static_cast<double>(n_state),
                         beta2 + 12.0 * std::sqrt(beta2 + 1.0) + 20.0));

    std::vector<std::complex<double>> col(rows), next(rows), overlap(rows, 0.0);
    col[0] = std::exp(-beta2 / 2.0);
    for (std::size_t m = 1; m < rows; ++m) {
        col[m] = col[m - 1] * beta / std::sqrt(static_cast<double>(m));
    }
    for (std::size_t m = 0; m < rows; ++m) overlap[m] = col[m] * c[0];

    for (std::size_t n = 1; n < n_state; ++n) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(n));
        next[0] = -beta_conj * col[0] * inv;
        for (std::size_t m = 1; m < rows; ++m) {
            next[m] = (std::sqrt(static_cast<double>(m)) * col[m - 1] -
                       beta_conj * col[m]) * inv;
        }
        std::swap(col, next);
        if (c[n] != 0.0) {
            for (std::size_t m = 0; m < rows; ++m) overlap[m] += col[m] * c[n];
        }
    }

    double acc = 0.0;
    for (std::size_t m = 0; m < rows; ++m) {
        const double w = std::norm(overlap[m]);
        acc += (m % 2 == 0) ? w : -w;
    }
    return acc / std::numbers::pi;
}

bool axis_is_symmetric(const std::vector<double>& axis) {
    const std::size_t n = axis.size();
    for (std::size_t j = 0; j < n / 2; ++j) {
        if (std::abs(axis[j] + axis[n - 1 - j]) > 1e-12) return false;
    }
    return true;
}

} // namespace

namespace {

// Undersized axes are widened to the Fock-occupation support estimate
// √(2n̄+1) (+3 margin), keeping the point count.
std::vector<double> cover_support(const std::vector<double>& axis, double radius) {
    double reach = 0.0;
    for (double x : axis) reach = std::max(reach, std::abs(x));
    if (reach >= radius) return axis;
    std::vector<double> wide(axis.size());
    for (std::size_t j = 0; j < axis.size(); ++j) {
        wide[j] = -radius + 2.0 * radius * static_cast<double>(j) /
                                static_cast<double>(axis.size() - 1);
    }
    return wide;
}

} // namespace

WignerGrid wigner_function(const std::vector<double>& state,
                           const std::vector<double>& q_axis,
                           const std::vector<double>& p_axis) {
    if (state.empty() || q_axis.size() < 2 || p_axis.size() < 2) {
        throw std::invalid_argument("wigner_function: empty state or degenerate axis");
    }

    double n_mean = 0.0;
    for (std::size_t n = 0; n < state.size(); ++n) {
        n_mean += static_cast<double>(n) * state[n] * state[n];
    }
    const double support = std::sqrt(2.0 * n_mean + 1.0) + 3.0;

    WignerGrid grid;
    grid.q_axis = cover_support(q_axis, support);
    grid.p_axis = cover_support(p_axis, support);
    const std::size_t nq = grid.q_axis.size(), np = grid.p_axis.size();
    grid.values.assign(nq * np, 0.0);

    // Real coefficients give W(q,-p) = W(q,p); a symmetric p axis halves work.
    const bool mirror = axis_is_symmetric(grid.p_axis);
    const std::size_t p_count = mirror ? (np + 1) / 2 : np;

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(nq));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t iq = t; iq < nq; iq += workers) {
                for (std::size_t ip = 0; ip < p_count; ++ip) {
                    const double w = wigner_point(state, grid.q_axis[iq], grid.p_axis[ip]);
                    grid.values[iq * np + ip] = w;
                    if (mirror) grid.values[iq * np + (np - 1 - ip)] = w;
                }
            }
        });
    }
    for (auto& th : pool) th.join();

    // Coverage: the boundary should carry no weight relative to the peak.
    double wmax = 0.0;
    for (double v : grid.values) wmax = std::max(wmax, std::abs(v));
    double edge = 0.0;
    for (std::size_t ip = 0; ip < np; ++ip) {
        edge = std::max({edge, std::abs(grid.at(0, ip)), std::abs(grid.at(nq - 1, ip))});
    }
    for (std::size_t iq = 0; iq < nq; ++iq) {
        edge = std::max({edge, std::abs(grid.at(iq, 0)), std::abs(grid.at(iq, np - 1))});
    }
    grid.coverage_warning = edge > 1e-6 * wmax;
    return grid;
}

std::vector<double> wigner_axis(const Spectrum& spec, std::size_t i, std::size_t n) {
    if (i >= spec.converged_count) {
        throw convergence_error("wigner_axis: state beyond converged_count");
    }
    const double radius = outer_turning_radius(spec.params, spec.energies[i]) + 3.0;
    std::vector<double> axis(n);
    for (std::size_t j = 0; j < n; ++j) {
        axis[j] = -radius + 2.0 * radius * static_cast<double>(j) /
                                static_cast<double>(n - 1);
    }
    return axis;
}

WignerMoments wigner_moments(const WignerGrid& grid) {
    const double dq = grid.dq(), dp = grid.dp();
    const double darea = dq * dp;
    WignerMoments m;
    for (std::size_t iq = 0; iq < grid.q_axis.size(); ++iq) {
        for (std::size_t ip = 0; ip < grid.p_axis.size(); ++ip) {
            const double w = grid.at(iq, ip) * darea;
            m.norm += w;
            m.mean_q += w * grid.q_axis[iq];
            m.mean_p += w * grid.p_axis[ip];
        }
    }
    if (std::abs(m.norm - 1.0) > 1e-3) {
        throw normalization_error("wigner_moments: grid normalization off by " +
                                  std::to_string(m.norm - 1.0));
    }
    m.mean_q /= m.norm;
    m.mean_p /= m.norm;
    for (std::size_t iq = 0; iq < grid.q_axis.size(); ++iq) {
        const double qd = grid.q_axis[iq] - m.mean_q;
        for (std::size_t ip = 0; ip < grid.p_axis.size(); ++ip) {
            const double pd = grid.p_axis[ip] - m.mean_p;
            const double w = grid.at(iq, ip) * darea;
            m.var_q += w * qd * qd;
            m.var_p += w * pd * pd;
        }
    }
    m.var_q /= m.norm;
    m.var_p /= m.norm;
    return m;
}

} // namespace kpo

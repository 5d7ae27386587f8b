#include "kpo/tridiag_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kpo/errors.hpp"

namespace kpo {

namespace {

constexpr int kMaxIterationsPerValue = 50;

// Implicit-shift QL sweep on (d, e) with rotations accumulated into the
// columns of z. Classic EISPACK tql2 scheme, 0-based.
void ql_implicit_shift(std::vector<double>& d, std::vector<double>& e,
                       std::vector<std::vector<double>>& z) {
    const std::size_t n = d.size();
    if (n == 1) return;
    const double eps = std::numeric_limits<double>::epsilon();

    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == kMaxIterationsPerValue) {
                    throw solver_failure(static_cast<int>(l));
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;

                    auto& zi = z[i];
                    auto& zj = z[i + 1];
                    for (std::size_t k = 0; k < n; ++k) {
                        f = zj[k];
                        zj[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

// Modified Gram-Schmidt inside clusters of near-equal eigenvalues. The QL
// rotations keep global orthogonality, but exact crossings deserve an
// explicit pass.
void reorthogonalize_clusters(const std::vector<double>& energies,
                              std::vector<std::vector<double>>& states) {
    const std::size_t n = energies.size();
    if (n < 2) return;
    double emax = 1.0;
    for (double v : energies) emax = std::max(emax, std::abs(v));
    const double gap_tol = 1e-12 * emax;

    std::size_t start = 0;
    while (start + 1 < n) {
        std::size_t stop = start;
        while (stop + 1 < n && energies[stop + 1] - energies[stop] <= gap_tol) ++stop;
        for (std::size_t j = start + 1; j <= stop; ++j) {
            for (std::size_t i = start; i < j; ++i) {
                const double dot =
                    std::inner_product(states[i].begin(), states[i].end(),
                                       states[j].begin(), 0.0);
                for (std::size_t k = 0; k < states[j].size(); ++k) {
                    states[j][k] -= dot * states[i][k];
                }
            }
            const double nrm = std::sqrt(
                std::inner_product(states[j].begin(), states[j].end(),
                                   states[j].begin(), 0.0));
            if (nrm > 0.0) {
                for (double& v : states[j]) v /= nrm;
            }
        }
        start = stop + 1;
    }
}

void fix_signs(std::vector<std::vector<double>>& states) {
    for (auto& v : states) {
        std::size_t imax = 0;
        for (std::size_t k = 1; k < v.size(); ++k) {
            if (std::abs(v[k]) > std::abs(v[imax])) imax = k;
        }
        if (v[imax] < 0.0) {
            for (double& x : v) x = -x;
        }
    }
}

} // namespace

EighResult eigh_tridiagonal(const TridiagonalOperator& op) {
    const std::size_t n = op.dim;
    std::vector<double> d = op.diag;
    std::vector<double> e(n, 0.0);
    std::copy(op.offdiag.begin(), op.offdiag.end(), e.begin() + 1);

    // z[j] holds column j; starts as the identity.
    std::vector<std::vector<double>> z(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) z[j][j] = 1.0;

    ql_implicit_shift(d, e, z);

    // Ascending order with a deterministic tie-break on the original index.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (d[a] != d[b]) return d[a] < d[b];
        return a < b;
    });

    EighResult out;
    out.energies.resize(n);
    out.states.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.energies[j] = d[order[j]];
        out.states[j] = std::move(z[order[j]]);
    }

    reorthogonalize_clusters(out.energies, out.states);
    fix_signs(out.states);
    return out;
}

double Spectrum::tail_occupation(std::size_t i) const {
    const auto tail_start = static_cast<std::size_t>(0.9 * static_cast<double>(n_max));
    double t = 0.0;
    for (std::size_t m = tail_start; m < n_max; ++m) {
        t += states[i][m] * states[i][m];
    }
    return t;
}

Spectrum converged_spectrum(const ModelParams& params, std::size_t k_states,
                            double tol) {
    const std::size_t n = choose_truncation(params, k_states, tol);
    auto small = eigh_tridiagonal(build_hamiltonian(params, n));
    const auto big = eigh_tridiagonal(build_hamiltonian(params, 2 * n));

    Spectrum spec{params, n, std::move(small.energies), std::move(small.states), 0};
    std::size_t count = 0;
    while (count < n) {
        const double scale = std::max(std::abs(spec.energies[count]), params.kerr);
        const bool stable =
            std::abs(spec.energies[count] - big.energies[count]) / scale < tol &&
            spec.tail_occupation(count) < tol;
        if (!stable) break;
        ++count;
    }
    spec.converged_count = count;
    return spec;
}

} // namespace kpo

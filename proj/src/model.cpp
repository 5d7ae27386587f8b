#include "kpo/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kpo/classical.hpp"
#include "kpo/errors.hpp"
#include "kpo/tridiag_eigen.hpp"

namespace kpo {

ModelParams::ModelParams(double delta_, double kerr_, double pump_)
    : delta(delta_), kerr(kerr_), pump(pump_) {
    if (!(kerr > 0.0)) {
        throw std::invalid_argument("ModelParams: kerr must be positive");
    }
    if (pump < 0.0) {
        pump = -pump;  // q -> -q equivalence
        pump_sign_flipped = true;
    }
}

TridiagonalOperator::TridiagonalOperator(std::vector<double> d, std::vector<double> e)
    : dim(d.size()), diag(std::move(d)), offdiag(std::move(e)) {
    if (dim == 0) {
        throw std::invalid_argument("TridiagonalOperator: dimension must be >= 1");
    }
    if (offdiag.size() + 1 != dim) {
        throw std::invalid_argument("TridiagonalOperator: offdiag length must be dim-1");
    }
}

std::vector<double> TridiagonalOperator::apply(const std::vector<double>& x) const {
    if (x.size() != dim) {
        throw std::invalid_argument("TridiagonalOperator::apply: size mismatch");
    }
    std::vector<double> y(dim);
    for (std::size_t n = 0; n < dim; ++n) {
        double acc = diag[n] * x[n];
        if (n > 0) acc += offdiag[n - 1] * x[n - 1];
        if (n + 1 < dim) acc += offdiag[n] * x[n + 1];
        y[n] = acc;
    }
    return y;
}

double TridiagonalOperator::expectation(const std::vector<double>& x) const {
    const auto y = apply(x);
    double acc = 0.0;
    for (std::size_t n = 0; n < dim; ++n) acc += x[n] * y[n];
    return acc;
}

TridiagonalOperator build_hamiltonian(const ModelParams& params, std::size_t n_max) {
    if (n_max < 1) {
        throw std::invalid_argument("build_hamiltonian: n_max must be >= 1");
    }
    std::vector<double> d(n_max), e(n_max - 1);
    for (std::size_t n = 0; n < n_max; ++n) {
        const auto nn = static_cast<double>(n);
        d[n] = -params.delta * nn + params.kerr * nn * (nn - 1.0) + 0.0;
    }
    for (std::size_t n = 0; n + 1 < n_max; ++n) {
        e[n] = -params.pump * std::sqrt(static_cast<double>(n + 1));
    }
    return TridiagonalOperator(std::move(d), std::move(e));
}

TridiagonalOperator build_number_operator(std::size_t n_max) {
    if (n_max < 1) {
        throw std::invalid_argument("build_number_operator: n_max must be >= 1");
    }
    std::vector<double> d(n_max), e(n_max - 1, 0.0);
    for (std::size_t n = 0; n < n_max; ++n) d[n] = static_cast<double>(n);
    return TridiagonalOperator(std::move(d), std::move(e));
}

TridiagonalOperator build_position_operator(std::size_t n_max) {
    if (n_max < 1) {
        throw std::invalid_argument("build_position_operator: n_max must be >= 1");
    }
    std::vector<double> d(n_max, 0.0), e(n_max - 1);
    for (std::size_t n = 0; n + 1 < n_max; ++n) {
        e[n] = std::sqrt(static_cast<double>(n + 1) / 2.0);
    }
    return TridiagonalOperator(std::move(d), std::move(e));
}

namespace {

// Crude estimate of the k-th lowest eigenvalue from the pump-free diagonal.
double diagonal_energy_estimate(const ModelParams& p, std::size_t k) {
    // diag(n) = -Δn + Kn(n-1) is convex in n; scan a window around its vertex.
    const double vertex = std::max(0.0, (p.delta + p.kerr) / (2.0 * p.kerr));
    const std::size_t span = static_cast<std::size_t>(vertex) + k + 2;
    std::vector<double> vals(span + 1);
    for (std::size_t n = 0; n <= span; ++n) {
        const auto nn = static_cast<double>(n);
        vals[n] = -p.delta * nn + p.kerr * nn * (nn - 1.0);
    }
    std::sort(vals.begin(), vals.end());
    return vals[std::min(k, span)];
}

} // namespace

std::size_t choose_truncation(const ModelParams& params, std::size_t k_states,
                              double tol, std::size_t hard_cap) {
    if (k_states < 1) {
        throw std::invalid_argument("choose_truncation: k_states must be >= 1");
    }
    if (!(tol > 0.0 && tol < 1.0)) {
        throw std::invalid_argument("choose_truncation: tol must lie in (0, 1)");
    }

    // Seed from the classical orbit radius at (an estimate of) the highest
    // requested energy: Fock support is bounded by n ≈ (q²+p²)/2.
    const double e_top = diagonal_energy_estimate(params, k_states) +
                         std::abs(params.delta) + params.kerr + params.pump;
    const double r = outer_turning_radius(params, e_top);
    const auto n_est = static_cast<std::size_t>(std::ceil(0.65 * r * r)) + 2;
    const std::size_t n0 = std::max(k_states + 2, n_est);
    if (n0 > hard_cap) {
        throw truncation_failure(static_cast<int>(n0), static_cast<int>(hard_cap),
                                 std::numeric_limits<double>::infinity());
    }
    std::size_t n = n0;

    auto small = eigh_tridiagonal(build_hamiltonian(params, n));
    while (true) {
        auto big = eigh_tridiagonal(build_hamiltonian(params, 2 * n));

        double shift = 0.0;
        for (std::size_t i = 0; i < k_states; ++i) {
            const double scale = std::max(std::abs(small.energies[i]), params.kerr);
            shift = std::max(shift, std::abs(small.energies[i] - big.energies[i]) / scale);
        }
        double tail = 0.0;
        const auto tail_start = static_cast<std::size_t>(0.9 * static_cast<double>(n));
        for (std::size_t i = 0; i < k_states; ++i) {
            double t = 0.0;
            for (std::size_t m = tail_start; m < n; ++m) {
                t += small.states[i][m] * small.states[i][m];
            }
            tail = std::max(tail, t);
        }
        if (shift < tol && tail < tol) return n;

        if (2 * n > hard_cap) {
            throw truncation_failure(static_cast<int>(2 * n), static_cast<int>(n),
                                     std::max(shift, tail));
        }
        small = std::move(big);
        n *= 2;
    }
}

} // namespace kpo

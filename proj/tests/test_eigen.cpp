#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kpo/model.hpp"
#include "kpo/tridiag_eigen.hpp"
#include "oracles.hpp"

using namespace kpo;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

TridiagonalOperator random_tridiagonal(std::mt19937& rng, std::size_t n) {
    std::normal_distribution<double> dist(0.0, 2.0);
    std::vector<double> d(n), e(n - 1);
    for (auto& x : d) x = dist(rng);
    for (auto& x : e) x = dist(rng);
    return TridiagonalOperator(std::move(d), std::move(e));
}

void check_against_oracle(const TridiagonalOperator& op, double tol) {
    const auto got = eigh_tridiagonal(op);
    const auto want = oracle::jacobi_eigen(
        oracle::dense_from_tridiagonal(op.diag, op.offdiag), op.dim);
    double scale = 1.0;
    for (double v : want.values) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < op.dim; ++i) {
        CHECK(std::abs(got.energies[i] - want.values[i]) <= tol * scale);
    }
}

} // namespace

TEST_CASE("1x1 and 2x2 closed forms") {
    const auto one = eigh_tridiagonal(TridiagonalOperator({3.0}, {}));
    CHECK(one.energies == std::vector<double>{3.0});
    CHECK(one.states[0] == std::vector<double>{1.0});

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int rep = 0; rep < 50; ++rep) {
        const double a = dist(rng), c = dist(rng), b = dist(rng);
        const auto res = eigh_tridiagonal(TridiagonalOperator({a, c}, {b}));
        const double mid = 0.5 * (a + c);
        const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
        CHECK(res.energies[0] == doctest::Approx(mid - rad).epsilon(1e-12));
        CHECK(res.energies[1] == doctest::Approx(mid + rad).epsilon(1e-12));
    }
}

TEST_CASE("random 50x50 matches the dense Jacobi oracle") {
    std::mt19937 rng(42);
    check_against_oracle(random_tridiagonal(rng, 50), 1e-10);
}

TEST_CASE("oracle agreement on random dims up to 64 and model instances") {
    std::mt19937 rng(1234);
    std::uniform_int_distribution<std::size_t> dim_dist(2, 64);
    for (int rep = 0; rep < 10; ++rep) {
        check_against_oracle(random_tridiagonal(rng, dim_dist(rng)), 1e-10);
    }
    std::uniform_real_distribution<double> delta_dist(-5.0, 12.0);
    std::uniform_real_distribution<double> pump_dist(0.0, 5.0);
    for (int rep = 0; rep < 6; ++rep) {
        const ModelParams p(delta_dist(rng), 1.0, pump_dist(rng));
        check_against_oracle(build_hamiltonian(p, 48), 1e-10);
    }
}

TEST_CASE("orthonormality, residuals, trace preservation") {
    std::mt19937 rng(5);
    const auto op = random_tridiagonal(rng, 60);
    const auto res = eigh_tridiagonal(op);

    for (std::size_t i = 0; i < op.dim; ++i) {
        for (std::size_t j = i; j < op.dim; ++j) {
            const double expected = i == j ? 1.0 : 0.0;
            CHECK(std::abs(dot(res.states[i], res.states[j]) - expected) < 1e-10);
        }
    }

    double max_abs = 1.0;
    for (double v : res.energies) max_abs = std::max(max_abs, std::abs(v));
    for (std::size_t i = 0; i < op.dim; ++i) {
        const auto hv = op.apply(res.states[i]);
        double rnorm = 0.0;
        for (std::size_t m = 0; m < op.dim; ++m) {
            const double r = hv[m] - res.energies[i] * res.states[i][m];
            rnorm += r * r;
        }
        CHECK(std::sqrt(rnorm) <= 1e-10 * max_abs);
    }

    double tr_diag = 0.0, tr_eig = 0.0, dmax = 0.0;
    for (double v : op.diag) {
        tr_diag += v;
        dmax = std::max(dmax, std::abs(v));
    }
    for (double v : res.energies) tr_eig += v;
    CHECK(std::abs(tr_diag - tr_eig) <= 1e-8 * static_cast<double>(op.dim) * dmax);
}

TEST_CASE("diagonal input is exact, eigenvectors are Fock vectors up to sign") {
    const auto op = build_hamiltonian(ModelParams(1.0, 1.0, 0.0), 20);
    auto sorted = op.diag;
    std::sort(sorted.begin(), sorted.end());
    const auto res = eigh_tridiagonal(op);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(res.energies[i] == sorted[i]);
        double max_c = 0.0;
        int nonzero = 0;
        for (double c : res.states[i]) {
            if (c != 0.0) ++nonzero;
            max_c = std::max(max_c, c);
        }
        CHECK(nonzero == 1);
        CHECK(max_c == 1.0);
    }
}

TEST_CASE("deterministic output across repeated runs") {
    std::mt19937 rng1(99), rng2(99);
    const auto op1 = random_tridiagonal(rng1, 40);
    const auto op2 = random_tridiagonal(rng2, 40);
    const auto r1 = eigh_tridiagonal(op1);
    const auto r2 = eigh_tridiagonal(op2);
    CHECK(r1.energies == r2.energies);
    CHECK(r1.states == r2.states);
}

TEST_CASE("converged spectrum at P0 = 0 reproduces the diagonal values") {
    // E_n/K = -(Δ/K+1)n + n²; Δ/K = 1 gives (0, -1, 0, 3, ...) -> sorted (-1, 0, 0)
    const auto s1 = converged_spectrum(ModelParams(1.0, 1.0, 0.0), 3, 1e-10);
    CHECK(s1.energies[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(s1.energies[1] == doctest::Approx(0.0));
    CHECK(s1.energies[2] == doctest::Approx(0.0));

    // Δ/K = -2 gives E_n = n + n²: (0, 2) for n = 0, 1.
    const auto s2 = converged_spectrum(ModelParams(-2.0, 1.0, 0.0), 2, 1e-10);
    CHECK(s2.energies[0] == doctest::Approx(0.0));
    CHECK(s2.energies[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("orthonormality survives exact degeneracies") {
    const auto spec = converged_spectrum(ModelParams(4.0, 1.0, 0.0), 8, 1e-10);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = i; j < 8; ++j) {
            const double expected = i == j ? 1.0 : 0.0;
            CHECK(std::abs(dot(spec.states[i], spec.states[j]) - expected) < 1e-10);
        }
    }
}

TEST_CASE("spectral scaling identity E(Δ,K,P0) = K·E(Δ/K,1,P0/K)") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> kerr_dist(0.1, 10.0);
    std::uniform_real_distribution<double> delta_dist(-6.0, 12.0);
    std::uniform_real_distribution<double> pump_dist(0.0, 4.0);
    for (int rep = 0; rep < 10; ++rep) {
        const double kerr = kerr_dist(rng);
        const double delta = delta_dist(rng);
        const double pump = pump_dist(rng);
        const std::size_t n = 48;
        const auto full = eigh_tridiagonal(
            build_hamiltonian(ModelParams(delta, kerr, pump), n));
        const auto unit = eigh_tridiagonal(
            build_hamiltonian(ModelParams(delta / kerr, 1.0, pump / kerr), n));
        for (std::size_t i = 0; i < n; ++i) {
            const double scaled = kerr * unit.energies[i];
            const double scale = std::max(std::abs(scaled), kerr);
            CHECK(std::abs(full.energies[i] - scaled) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("spectrum residual bound for converged states") {
    const ModelParams params(2.0 * 4.9528908733419401, 1.0, 3.0);
    const auto spec = converged_spectrum(params, 10, 1e-10);
    const auto op = build_hamiltonian(params, spec.n_max);
    for (std::size_t i = 0; i < spec.converged_count; ++i) {
        const auto hv = op.apply(spec.states[i]);
        double rnorm = 0.0;
        for (std::size_t m = 0; m < spec.n_max; ++m) {
            const double r = hv[m] - spec.energies[i] * spec.states[i][m];
            rnorm += r * r;
        }
        CHECK(std::sqrt(rnorm) <=
              1e-8 * std::max(std::abs(spec.energies[i]), params.kerr));
    }
}

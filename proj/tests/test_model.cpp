#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kpo/errors.hpp"
#include "kpo/model.hpp"
#include "kpo/tridiag_eigen.hpp"

using namespace kpo;

TEST_CASE("model params enforce the unit convention") {
    CHECK_THROWS_AS(ModelParams(1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams(1.0, -2.0, 1.0), std::invalid_argument);

    const ModelParams flipped(1.0, 1.0, -3.0);
    CHECK(flipped.pump == 3.0);
    CHECK(flipped.pump_sign_flipped);
    const ModelParams plain(1.0, 1.0, 3.0);
    CHECK_FALSE(plain.pump_sign_flipped);
}

TEST_CASE("hamiltonian matrix elements in the Fock basis") {
    const auto h1 = build_hamiltonian(ModelParams(1.0, 1.0, 0.0), 3);
    CHECK(h1.diag == std::vector<double>{0.0, -1.0, 0.0});
    CHECK(h1.offdiag == std::vector<double>{0.0, 0.0});

    const auto h2 = build_hamiltonian(ModelParams(0.7, 2.0, 1.0), 2);
    CHECK(h2.offdiag[0] == doctest::Approx(-1.0).epsilon(1e-15));

    const auto h3 = build_hamiltonian(ModelParams(0.0, 1.0, 0.0), 5);
    CHECK(h3.diag == std::vector<double>{0.0, 0.0, 2.0, 6.0, 12.0});

    CHECK_THROWS_AS(build_hamiltonian(ModelParams(1.0, 1.0, 0.0), 0),
                    std::invalid_argument);
}

TEST_CASE("number operator") {
    const auto n = build_number_operator(3);
    CHECK(n.diag == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(n.offdiag == std::vector<double>{0.0, 0.0});

    // Fock vectors are eigenvectors: n e_k = k e_k.
    const auto n8 = build_number_operator(8);
    for (std::size_t k = 0; k < 8; ++k) {
        std::vector<double> ek(8, 0.0);
        ek[k] = 1.0;
        const auto y = n8.apply(ek);
        for (std::size_t m = 0; m < 8; ++m) {
            CHECK(y[m] == doctest::Approx(k == m ? double(k) : 0.0));
        }
    }

    // <n> is non-negative for any normalized state.
    std::mt19937 rng(7);
    std::normal_distribution<double> dist;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> psi(8);
        for (auto& x : psi) x = dist(rng);
        const double nrm = std::sqrt(std::inner_product(psi.begin(), psi.end(),
                                                        psi.begin(), 0.0));
        for (auto& x : psi) x /= nrm;
        CHECK(n8.expectation(psi) >= 0.0);
    }
}

TEST_CASE("position operator and the q = (a+a†)/√2 convention") {
    const auto q = build_position_operator(8);
    std::vector<double> vac(8, 0.0);
    vac[0] = 1.0;
    CHECK(q.expectation(vac) == doctest::Approx(0.0));

    const auto qv = q.apply(vac);
    const double q2 = std::inner_product(qv.begin(), qv.end(), qv.begin(), 0.0);
    CHECK(q2 == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("coherent state has <q> = √2 α") {
    const double alpha = 1.0;
    const std::size_t n_max = 64;
    std::vector<double> c(n_max);
    double log_fact = 0.0;
    for (std::size_t n = 0; n < n_max; ++n) {
        if (n > 0) log_fact += std::log(static_cast<double>(n));
        c[n] = std::exp(-alpha * alpha / 2.0 + n * std::log(alpha) - 0.5 * log_fact);
    }
    const auto q = build_position_operator(n_max);
    CHECK(q.expectation(c) == doctest::Approx(std::sqrt(2.0) * alpha).epsilon(1e-12));
}

TEST_CASE("tridiagonal operator is symmetric by construction") {
    const auto h = build_hamiltonian(ModelParams(2.0, 1.0, 3.0), 12);
    for (std::size_t i = 0; i < h.dim; ++i) {
        for (std::size_t j = 0; j < h.dim; ++j) {
            const double hij = i == j ? h.diag[i]
                               : (j == i + 1) ? h.offdiag[i]
                               : (i == j + 1) ? h.offdiag[j]
                                              : 0.0;
            const double hji = j == i ? h.diag[j]
                               : (i == j + 1) ? h.offdiag[j]
                               : (j == i + 1) ? h.offdiag[i]
                                              : 0.0;
            CHECK(hij == hji);
        }
    }
}

TEST_CASE("truncation search stays small for a diagonal problem") {
    const std::size_t n = choose_truncation(ModelParams(-1.0, 1.0, 0.0), 3, 1e-10);
    CHECK(n <= 8);
}

TEST_CASE("truncation search result passes its own doubling test") {
    const ModelParams params(0.5 * 4.9528908733419401, 1.0, 3.0);
    const double tol = 1e-10;
    const std::size_t k = 10;
    const std::size_t n = choose_truncation(params, k, tol);

    const auto small = eigh_tridiagonal(build_hamiltonian(params, n));
    const auto big = eigh_tridiagonal(build_hamiltonian(params, 2 * n));
    for (std::size_t i = 0; i < k; ++i) {
        const double scale = std::max(std::abs(small.energies[i]), params.kerr);
        CHECK(std::abs(small.energies[i] - big.energies[i]) / scale < tol);
        double tail = 0.0;
        for (std::size_t m = static_cast<std::size_t>(0.9 * n); m < n; ++m) {
            tail += small.states[i][m] * small.states[i][m];
        }
        CHECK(tail < tol);
    }
}

TEST_CASE("truncation grows past k_states") {
    const std::size_t n = choose_truncation(ModelParams(-1.0, 1.0, 0.0), 40, 1e-10);
    CHECK(n > 40);
    const auto spec = converged_spectrum(ModelParams(-1.0, 1.0, 0.0), 40, 1e-10);
    CHECK(spec.converged_count >= 40);
}

TEST_CASE("truncation failure carries the last two estimates") {
    try {
        choose_truncation(ModelParams(64.0, 1.0, 50.0), 200, 1e-10, 64);
        FAIL("expected truncation_failure");
    } catch (const truncation_failure& e) {
        CHECK(e.last_dim > e.prev_dim);
        CHECK(e.max_shift > 0.0);
    }
}

TEST_CASE("truncation input validation") {
    CHECK_THROWS_AS(choose_truncation(ModelParams(0.0, 1.0, 1.0), 0, 1e-10),
                    std::invalid_argument);
    CHECK_THROWS_AS(choose_truncation(ModelParams(0.0, 1.0, 1.0), 3, 2.0),
                    std::invalid_argument);
}

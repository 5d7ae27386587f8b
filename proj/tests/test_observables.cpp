#include <doctest.h>

#include <cmath>
#include <random>

#include "kpo/classical.hpp"
#include "kpo/errors.hpp"
#include "kpo/observables.hpp"
#include "kpo/tridiag_eigen.hpp"

using namespace kpo;

namespace {
const double kDeltaC3 = 3.0 * std::cbrt(9.0 / 2.0);  // Δc/K at P0/K = 3
}

TEST_CASE("qfi vanishes identically at P0 = 0") {
    const auto spec = converged_spectrum(ModelParams(0.7, 1.0, 0.0), 20, 1e-10);
    for (std::size_t i = 0; i < 20; ++i) {
        const auto r = qfi(spec, i);
        CHECK_FALSE(r.divergent);
        CHECK(r.value <= 1e-20);
    }
}

TEST_CASE("perturbative qfi matches 4P0²/Δ⁴") {
    const double delta = -5.0, pump = 0.005;
    const auto spec = converged_spectrum(ModelParams(delta, 1.0, pump), 3, 1e-12);
    const double oracle = 4.0 * pump * pump / std::pow(delta, 4);
    const auto r = qfi(spec, 0);
    CHECK(r.value == doctest::Approx(oracle).epsilon(0.01));
    CHECK(r.tail_fraction < 0.01);
}

TEST_CASE("exact degeneracy with nonzero coupling is flagged divergent") {
    // hand-built spectrum: two degenerate states mixing |0> and |1>
    const double s = 1.0 / std::sqrt(2.0);
    Spectrum spec{ModelParams(1.0, 1.0, 1.0),
                  2,
                  {0.0, 0.0},
                  {{s, s}, {s, -s}},
                  2};
    const auto r = qfi(spec, 0);
    CHECK(r.divergent);
    CHECK(std::isinf(r.value));
}

TEST_CASE("qfi is invariant under eigenvector sign flips") {
    auto spec = converged_spectrum(ModelParams(kDeltaC3, 1.0, 3.0), 8, 1e-10);
    const double before = qfi(spec, 5).value;
    for (std::size_t j = 0; j < spec.n_max; j += 2) {
        for (double& c : spec.states[j]) c = -c;
    }
    CHECK(qfi(spec, 5).value == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("qfi stays put when the truncation doubles") {
    const ModelParams params(kDeltaC3, 1.0, 3.0);
    const std::size_t n = choose_truncation(params, 8, 1e-10);
    auto make_spec = [&](std::size_t dim) {
        auto r = eigh_tridiagonal(build_hamiltonian(params, dim));
        return Spectrum{params, dim, std::move(r.energies), std::move(r.states), 8};
    };
    const double f1 = qfi(make_spec(n), 5).value;
    const double f2 = qfi(make_spec(2 * n), 5).value;
    CHECK(std::abs(f1 - f2) / f2 < 0.01);
}

TEST_CASE("variances of Fock states and the Heisenberg bound") {
    const auto spec = converged_spectrum(ModelParams(-2.0, 1.0, 0.0), 6, 1e-10);
    for (std::size_t i = 0; i < 6; ++i) {
        // P0 = 0 eigenstates are Fock states: σ_q² = n + 1/2
        CHECK(variance_q(spec, i) ==
              doctest::Approx(static_cast<double>(i) + 0.5).epsilon(1e-12));
        CHECK(variance_p(spec, i) ==
              doctest::Approx(static_cast<double>(i) + 0.5).epsilon(1e-12));
    }

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> delta_dist(-4.0, 10.0);
    std::uniform_real_distribution<double> pump_dist(0.0, 4.0);
    for (int rep = 0; rep < 8; ++rep) {
        const auto s =
            converged_spectrum(ModelParams(delta_dist(rng), 1.0, pump_dist(rng)), 6, 1e-10);
        for (std::size_t i = 0; i < s.converged_count && i < 6; ++i) {
            CHECK(variance_q(s, i) * variance_p(s, i) >= 0.25 * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("variance demands a converged index") {
    const auto spec = converged_spectrum(ModelParams(1.0, 1.0, 1.0), 4, 1e-10);
    CHECK_THROWS_AS(variance_q(spec, spec.converged_count + 1), convergence_error);
}

TEST_CASE("analytic degenerate pairs at P0 = 0") {
    const auto p4 = degenerate_pairs_analytic(4.0);
    REQUIRE(p4.size() == 3);
    CHECK(p4[0] == std::pair<std::size_t, std::size_t>{0, 5});
    CHECK(p4[1] == std::pair<std::size_t, std::size_t>{1, 4});
    CHECK(p4[2] == std::pair<std::size_t, std::size_t>{2, 3});

    CHECK(degenerate_pairs_analytic(0.5).empty());

    const auto p1 = degenerate_pairs_analytic(1.0);
    REQUIRE(p1.size() == 1);
    CHECK(p1[0] == std::pair<std::size_t, std::size_t>{0, 2});
    // verify the predicted degeneracy in the spectrum
    const auto spec = converged_spectrum(ModelParams(1.0, 1.0, 0.0), 3, 1e-10);
    CHECK(std::abs(spec.energies[1] - spec.energies[2]) < 1e-10);
}

TEST_CASE("degeneracy formula checks E_n = n² - 5n at Δ/K = 4") {
    const auto spec = converged_spectrum(ModelParams(4.0, 1.0, 0.0), 6, 1e-10);
    // E_0 = 0 = E_5, E_1 = -4 = E_4, E_2 = -6 = E_3 (sorted ascending)
    CHECK(spec.energies[0] == doctest::Approx(-6.0));
    CHECK(spec.energies[1] == doctest::Approx(-6.0));
    CHECK(spec.energies[2] == doctest::Approx(-4.0));
    CHECK(spec.energies[3] == doctest::Approx(-4.0));
    CHECK(spec.energies[4] == doctest::Approx(0.0));
    CHECK(spec.energies[5] == doctest::Approx(0.0));
}

TEST_CASE("crossing detector finds exact zeros at P0 = 0") {
    const auto scan =
        find_avoided_crossings(0.0, 0.5, 5.5, 120, EnergyBand::all(), 1e-10);
    CHECK_FALSE(scan.band_empty);
    REQUIRE_FALSE(scan.records.empty());
    bool found_any = false;
    for (const auto& rec : scan.records) {
        const double nearest = std::round(rec.delta_over_k);
        CHECK(std::abs(rec.delta_over_k - nearest) < 1e-6);
        CHECK(rec.min_gap < 1e-10);
        found_any = true;
    }
    CHECK(found_any);
}

TEST_CASE("crossing detector flags an empty band below Δc") {
    const auto scan = find_avoided_crossings(3.0, 1.0, 3.0, 60,
                                             EnergyBand::classical(), 1e-10);
    CHECK(scan.band_empty);
    CHECK(scan.records.empty());
}

TEST_CASE("in-band crossings at P0/K = 3 sit near integer Δ/K") {
    const auto scan = find_avoided_crossings(3.0, 7.0, 12.5, 140,
                                             EnergyBand::classical(), 1e-10);
    CHECK_FALSE(scan.band_empty);
    REQUIRE_FALSE(scan.records.empty());
    for (const auto& rec : scan.records) {
        CHECK(rec.within_band);
        CHECK(std::abs(rec.delta_over_k - std::round(rec.delta_over_k)) < 0.1);
        CHECK(rec.min_gap >= 0.0);
    }
}

TEST_CASE("crossing detector validates its grid density") {
    CHECK_THROWS_AS(find_avoided_crossings(3.0, 0.0, 10.0, 50, EnergyBand::all()),
                    std::invalid_argument);
}

TEST_CASE("explicit energy band filters records") {
    // at P0 = 0 all crossings sit at 0 gap; an empty band keeps none
    const auto none = find_avoided_crossings(0.0, 0.5, 5.5, 120,
                                             EnergyBand::range(1e6, 2e6), 1e-10);
    CHECK(none.records.empty());
    CHECK_FALSE(none.band_empty);

    const auto wide = find_avoided_crossings(0.0, 0.5, 5.5, 120,
                                             EnergyBand::range(0.0, 1e6), 1e-10);
    CHECK_FALSE(wide.records.empty());
}

TEST_CASE("ground-state QFI peak moves toward Δc as P0/K grows") {
    // system size here is the ratio P0/K; only the location trend is pinned
    double prev_where = 0.0;
    for (double p0 : {3.0, 10.0, 30.0}) {
        const double dc = critical_detuning(ModelParams(0.0, 1.0, p0));
        double best = 0.0, where = 0.0;
        for (int j = 0; j <= 48; ++j) {
            const double x = 0.2 + (1.4 - 0.2) * j / 48.0;
            const auto spec = converged_spectrum(ModelParams(x * dc, 1.0, p0), 2, 1e-10);
            const double f = qfi(spec, 0).value;
            if (f > best) {
                best = f;
                where = x;
            }
        }
        CHECK(best > 0.0);
        CHECK(where > prev_where);
        CHECK(where < 1.05);
        prev_where = where;
    }
}

// model.hpp — model parameters and truncated Fock-space operators
//
// The Hamiltonian
//     H = -delta a†a + kerr a†²a² - pump (a + a†)
// is real symmetric tridiagonal in the Fock basis, so every operator here is
// stored as (diagonal, subdiagonal) pairs. Position convention q = (a+a†)/√2.

#pragma once

#include <cstddef>
#include <vector>

namespace kpo {

// Control parameters (Δ, K, P0). K > 0 sets the energy scale; a negative
// pump is folded into its modulus at construction (q -> -q equivalence),
// recorded in pump_sign_flipped.
struct ModelParams {
    double delta;
    double kerr;
    double pump;
    bool pump_sign_flipped = false;

    ModelParams(double delta_, double kerr_, double pump_);

    double delta_over_k() const { return delta / kerr; }
    double pump_over_k() const { return pump / kerr; }
};

// Real symmetric tridiagonal matrix: entry (n, n+1) = entry (n+1, n) = offdiag[n].
struct TridiagonalOperator {
    std::size_t dim = 0;
    std::vector<double> diag;     // length dim
    std::vector<double> offdiag;  // length dim-1

    TridiagonalOperator() = default;
    TridiagonalOperator(std::vector<double> d, std::vector<double> e);

    // y = T x
    std::vector<double> apply(const std::vector<double>& x) const;

    // <x|T|x> for a real coefficient vector
    double expectation(const std::vector<double>& x) const;
};

// H in the Fock basis: diag[n] = -Δn + Kn(n-1), offdiag[n] = -P0 √(n+1).
TridiagonalOperator build_hamiltonian(const ModelParams& params, std::size_t n_max);

// n̂: diag[n] = n.
TridiagonalOperator build_number_operator(std::size_t n_max);

// q̂ = (a+a†)/√2: offdiag[n] = √((n+1)/2).
TridiagonalOperator build_position_operator(std::size_t n_max);

// Smallest tested dimension such that the k_states lowest eigenvalues move by
// less than tol (relative, floored at K) under doubling and each of those
// eigenvectors keeps its occupation tail beyond 0.9·n_max below tol.
// Throws truncation_failure past the hard cap.
std::size_t choose_truncation(const ModelParams& params, std::size_t k_states,
                              double tol, std::size_t hard_cap = 1u << 15);

} // namespace kpo

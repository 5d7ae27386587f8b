// tridiag_eigen.hpp — full eigendecomposition of symmetric tridiagonal operators

#pragma once

#include <cstddef>
#include <vector>

#include "kpo/model.hpp"

namespace kpo {

struct EighResult {
    std::vector<double> energies;              // ascending
    std::vector<std::vector<double>> states;   // states[i] = eigenvector i
};

// All dim eigenpairs by implicit-shift QL iteration with accumulated
// rotations. Energies ascending, eigenvectors orthonormal, sign fixed so the
// largest-magnitude coefficient of each vector is positive. Near-degenerate
// clusters are re-orthogonalized pairwise. Throws solver_failure if the
// iteration cap is exceeded.
EighResult eigh_tridiagonal(const TridiagonalOperator& op);

// Eigendecomposition of H(params) at a truncation that passed the doubling
// test for at least k_states states.
struct Spectrum {
    ModelParams params;
    std::size_t n_max = 0;
    std::vector<double> energies;
    std::vector<std::vector<double>> states;
    std::size_t converged_count = 0;

    // Occupation tail sum_{n > 0.9 n_max} |c_n|² of state i.
    double tail_occupation(std::size_t i) const;
};

Spectrum converged_spectrum(const ModelParams& params, std::size_t k_states,
                            double tol = 1e-10);

} // namespace kpo

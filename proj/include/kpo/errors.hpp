// errors.hpp — exception taxonomy shared across the library
//
// Exit-code mapping used by the CLI: invalid arguments -> 1,
// convergence/solver failures -> 2, I/O failures -> 3.

#pragma once

#include <stdexcept>
#include <string>

namespace kpo {

// Requested truncation search exceeded the hard cap before the spectrum
// stabilized. Carries the last two tested dimensions and the residual shift.
struct truncation_failure : std::runtime_error {
    int last_dim;
    int prev_dim;
    double max_shift;

    truncation_failure(int last, int prev, double shift)
        : std::runtime_error("truncation search did not converge: n_max=" +
                             std::to_string(prev) + " -> " + std::to_string(last) +
                             " still shifts eigenvalues by " + std::to_string(shift)),
          last_dim(last), prev_dim(prev), max_shift(shift) {}
};

// Eigenvalue iteration failed to converge for one index.
struct solver_failure : std::runtime_error {
    int eigen_index;

    explicit solver_failure(int index)
        : std::runtime_error("eigenvalue iteration cap exceeded at index " +
                             std::to_string(index)),
          eigen_index(index) {}
};

// A result was requested beyond the converged part of a spectrum, or a
// window exceeds the converged range.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A quadrature grid failed its normalization contract.
struct normalization_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File I/O failure; message carries the offending path.
struct io_error : std::runtime_error {
    std::string path;

    io_error(const std::string& p, const std::string& what)
        : std::runtime_error(what + ": " + p), path(p) {}
};

} // namespace kpo

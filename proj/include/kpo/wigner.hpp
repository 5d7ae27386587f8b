// wigner.hpp — Wigner functions of Fock-basis states on phase-space grids,
// evaluated in displaced-parity form: W(q,p) = (1/π) Σ_n (-1)^n |<n|D†(α)|Ψ>|²
// with α = (q+ip)/√2.

#pragma once

#include <cstddef>
#include <vector>

#include "kpo/tridiag_eigen.hpp"

namespace kpo {

struct WignerGrid {
    std::vector<double> q_axis;
    std::vector<double> p_axis;
    std::vector<double> values;  // row-major, values[iq * p_axis.size() + ip]
    std::size_t state_index = 0;
    bool coverage_warning = false;  // boundary |W| not negligible

    double at(std::size_t iq, std::size_t ip) const {
        return values[iq * p_axis.size() + ip];
    }
    double dq() const { return q_axis.size() > 1 ? q_axis[1] - q_axis[0] : 0.0; }
    double dp() const { return p_axis.size() > 1 ? p_axis[1] - p_axis[0] : 0.0; }
};

// Displacement overlaps come from the stable column recursion
//   √(n+1) D_{m,n+1} = √m D_{m-1,n} - β* D_{m,n},  β = -α,
// seeded by D_{m,0} = e^{-|β|²/2} β^m/√(m!). The parity sum is truncated far
// past the Poisson tail of |β|². Axes smaller than the occupation estimate
// √(2n̄+1)+3 are widened to it (same point count); the returned axes are the
// ones actually used, and coverage_warning flags residual boundary weight.
WignerGrid wigner_function(const std::vector<double>& state,
                           const std::vector<double>& q_axis,
                           const std::vector<double>& p_axis);

// Uniform symmetric axis of n points covering ±(outer classical turning
// radius of state i + 3).
std::vector<double> wigner_axis(const Spectrum& spec, std::size_t i,
                                std::size_t n = 256);

struct WignerMoments {
    double mean_q = 0.0;
    double mean_p = 0.0;
    double var_q = 0.0;
    double var_p = 0.0;
    double norm = 0.0;
};

// Quadrature moments; throws normalization_error if the grid integral is off
// unity by more than 1e-3.
WignerMoments wigner_moments(const WignerGrid& grid);

} // namespace kpo

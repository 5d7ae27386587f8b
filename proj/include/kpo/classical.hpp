// classical.hpp — classical limit of the oscillator: stationary-point
// analysis, critical detuning, separatrix energies, phase-space regions, and
// quantum/semiclassical densities of states.
//
//     h(q,p) = -Δ/2 (q²+p²) + K/4 (q²+p²)² - √2 P0 q

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kpo/model.hpp"
#include "kpo/tridiag_eigen.hpp"

namespace kpo {

double classical_energy(double q, double p, const ModelParams& params);

// (dq/dt, dp/dt) = (∂h/∂p, -∂h/∂q)
struct PhaseVelocity {
    double dq_dt;
    double dp_dt;
};
PhaseVelocity hamilton_rhs(double q, double p, const ModelParams& params);

// Δc = 3·(K P0²/2)^(1/3); the discriminant zero of the stationary cubic.
double critical_detuning(const ModelParams& params);

enum class StationaryKind { minimum, saddle, local_max, degenerate_ring };

struct StationaryPoint {
    double q = 0.0;
    double p = 0.0;
    double energy = 0.0;
    StationaryKind kind = StationaryKind::minimum;
};

struct PhasePortrait {
    ModelParams params;
    std::vector<StationaryPoint> stationary;
    double delta_c = 0.0;
    double eps_min = 0.0;
    std::optional<double> eps_sad;
    std::optional<double> eps_max;
};

// Roots of the p = 0 branch cubic K q³ - Δ q - √2 P0 = 0, classified by the
// diagonal Hessian signs. For P0 = 0, Δ > 0 the stationary set is the ring
// q²+p² = Δ/K plus the local maximum at the origin.
PhasePortrait stationary_points(const ModelParams& params);

// Real roots of the depressed-form cubic a x³ + b x² + c x + d = 0 by the
// trigonometric/Cardano closed form with one Newton polish per root.
// Ascending; a double root is reported twice.
std::vector<double> cubic_real_roots(double a, double b, double c, double d);

enum class Region { I, IIa, IIb, III, separatrix };

// Energy-based region of a phase-space point. For Δ ≤ Δc everything bound is
// region I. IIa/IIb connectivity is decided by flood fill on a bounded grid;
// |ε - ε_sad| < 1e-9 returns the separatrix flag.
Region classify_region(double q, double p, const ModelParams& params,
                       std::size_t grid_n = 512);

std::string to_string(Region r);
std::string to_string(StationaryKind k);

// Quadrature controls for phase-space areas and the smooth density of states.
struct DosOptions {
    std::size_t grid_n = 2048;   // area grid resolution per axis
    double denergy = 0.0;        // central-difference step; 0 = window/512
};

// Phase-space areas A(ε) = |{h ≤ ε}| for a batch of energies, one grid pass.
std::vector<double> sublevel_areas(const ModelParams& params,
                                   const std::vector<double>& energies,
                                   std::size_t grid_n = 2048);

// Smooth (phase-space-volume) density of states ν(ε) = (1/2π) dA/dε by
// central differences of the quadrature area. Zero below ε_min.
double semiclassical_dos(double energy, const ModelParams& params,
                         const DosOptions& opts = {});

// Quantum histogram and the smooth curve on a shared energy grid. Energies
// are measured above the respective ground levels: E - E_0 for eigenvalues,
// ε - ε_min for the classical curve.
struct DosCurve {
    std::vector<double> energies;       // bin centers, above ground
    std::vector<double> quantum_counts; // states per unit energy
    std::vector<double> semiclassical;  // ν at the same centers
    double bin_width = 0.0;
};

// Histogram of (E_i - E_0) over [window_lo, window_hi] with `bins` bins,
// semiclassical ν evaluated at the bin centers. Throws convergence_error if
// the window exceeds the converged range of the spectrum.
DosCurve quantum_dos(const Spectrum& spec, double window_lo, double window_hi,
                     std::size_t bins = 64, const DosOptions& opts = {});

// (E_ESQPT, E_step) = (ε_sad - ε_min, ε_max - ε_min); absent for Δ ≤ Δc.
std::optional<std::pair<double, double>> critical_energies(const ModelParams& params);

// Largest |x| on the boundary of {h ≤ energy}; bounds every orbit with that
// energy and sizes quadrature boxes and Wigner grids.
double outer_turning_radius(const ModelParams& params, double energy);

} // namespace kpo

#include "kpo/classical.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "kpo/errors.hpp"

namespace kpo {

double classical_energy(double q, double p, const ModelParams& params) {
    const double r2 = q * q + p * p;
    return -params.delta / 2.0 * r2 + params.kerr / 4.0 * r2 * r2 -
           std::numbers::sqrt2 * params.pump * q;
}

PhaseVelocity hamilton_rhs(double q, double p, const ModelParams& params) {
    const double r2 = q * q + p * p;
    return {p * (-params.delta + params.kerr * r2),
            params.delta * q - params.kerr * q * r2 + std::numbers::sqrt2 * params.pump};
}

double critical_detuning(const ModelParams& params) {
    const double dc = 3.0 * std::cbrt(params.kerr * params.pump * params.pump / 2.0);
    // The same point is the discriminant zero of K q³ - Δ q - √2 P0:
    // disc(Δc) = 4 Δc³/K³ - 54 P0²/K² = 0 by construction.
    assert(params.pump == 0.0 ||
           std::abs(4.0 * std::pow(dc / params.kerr, 3) -
                    54.0 * std::pow(params.pump / params.kerr, 2)) <
               1e-9 * 54.0 * std::pow(params.pump / params.kerr, 2));
    return dc;
}

std::vector<double> cubic_real_roots(double a, double b, double c, double d) {
    if (a == 0.0) {
        throw std::invalid_argument("cubic_real_roots: leading coefficient is zero");
    }
    // Monic, then depressed: x = t - B/3 turns x³+Bx²+Cx+D into t³ + pt + q.
    const double B = b / a, C = c / a, D = d / a;
    const double shift = B / 3.0;
    const double p = C - B * B / 3.0;
    const double q = 2.0 * B * B * B / 27.0 - B * C / 3.0 + D;

    std::vector<double> roots;
    const double disc = -4.0 * p * p * p - 27.0 * q * q;
    const double scale = std::max(4.0 * std::abs(p * p * p), 27.0 * q * q);
    const double disc_tol = 1e-12 * std::max(scale, 1e-300);

    if (p == 0.0 && q == 0.0) {
        roots = {0.0, 0.0, 0.0};
    } else if (std::abs(disc) <= disc_tol) {
        // Double root t2 (twice) and a simple root t1.
        const double t2 = -1.5 * q / p;    // p != 0 here
        const double t1 = 3.0 * q / p;
        roots = {t1, t2, t2};
    } else if (disc > 0.0) {
        // Three distinct real roots: trigonometric form.
        const double m = 2.0 * std::sqrt(-p / 3.0);
        double arg = 3.0 * q / (p * m);
        arg = std::clamp(arg, -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0));
        }
    } else {
        // One real root: Cardano.
        const double s = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
        const double u = std::cbrt(-q / 2.0 + s);
        const double v = std::cbrt(-q / 2.0 - s);
        roots = {u + v};
    }

    for (double& t : roots) {
        double x = t - shift;
        // One Newton step against the original cubic keeps the Δ→Δc limit sharp.
        for (int it = 0; it < 2; ++it) {
            const double f = ((a * x + b) * x + c) * x + d;
            const double fp = (3.0 * a * x + 2.0 * b) * x + c;
            if (fp != 0.0) {
                const double step = f / fp;
                if (std::abs(step) < 0.5 * (1.0 + std::abs(x))) x -= step;
            }
        }
        t = x;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

namespace {

StationaryPoint classify_root(double q, const ModelParams& params) {
    StationaryPoint pt;
    pt.q = q;
    pt.p = 0.0;
    pt.energy = classical_energy(q, 0.0, params);
    const double hqq = 3.0 * params.kerr * q * q - params.delta;
    const double hpp = params.kerr * q * q - params.delta;
    if (hqq > 0.0 && hpp > 0.0) {
        pt.kind = StationaryKind::minimum;
    } else if (hqq < 0.0 && hpp < 0.0) {
        pt.kind = StationaryKind::local_max;
    } else {
        pt.kind = StationaryKind::saddle;
    }
    return pt;
}

} // namespace

PhasePortrait stationary_points(const ModelParams& params) {
    PhasePortrait portrait{params, {}, critical_detuning(params), 0.0, {}, {}};

    if (params.pump == 0.0) {
        if (params.delta > 0.0) {
            // Degenerate minimum ring plus the local maximum at the origin.
            const double r = std::sqrt(params.delta / params.kerr);
            StationaryPoint ring{r, 0.0, classical_energy(r, 0.0, params),
                                 StationaryKind::degenerate_ring};
            StationaryPoint origin{0.0, 0.0, 0.0, StationaryKind::local_max};
            portrait.stationary = {ring, origin};
            portrait.eps_min = ring.energy;
            portrait.eps_max = 0.0;
        } else {
            portrait.stationary = {StationaryPoint{0.0, 0.0, 0.0, StationaryKind::minimum}};
            portrait.eps_min = 0.0;
        }
        return portrait;
    }

    auto roots = cubic_real_roots(params.kerr, 0.0, -params.delta,
                                  -std::numbers::sqrt2 * params.pump);
    // Collapse the Δ=Δc double root into one marginal point.
    bool marginal = false;
    if (roots.size() == 3 &&
        std::abs(roots[1] - roots[0]) <= 1e-9 * (1.0 + std::abs(roots[0]))) {
        roots.erase(roots.begin());
        marginal = true;
    }

    for (double q : roots) portrait.stationary.push_back(classify_root(q, params));
    if (marginal) {
        // hqq vanishes at the double root; report it as the saddle it is
        // about to split into.
        portrait.stationary.front().kind = StationaryKind::saddle;
    }

    for (const auto& pt : portrait.stationary) {
        switch (pt.kind) {
            case StationaryKind::minimum:
                portrait.eps_min = pt.energy;
                break;
            case StationaryKind::saddle:
                portrait.eps_sad = pt.energy;
                break;
            case StationaryKind::local_max:
                portrait.eps_max = pt.energy;
                break;
            case StationaryKind::degenerate_ring:
                break;
        }
    }
    // The marginal point at Δ=Δc carries both critical energies.
    if (marginal && portrait.eps_sad) portrait.eps_max = portrait.eps_sad;
    return portrait;
}

double outer_turning_radius(const ModelParams& params, double energy) {
    // Radial minorant f(r) = K/4 r⁴ - |Δ|/2 r² - √2 P0 r bounds h from below;
    // its largest root bounds every orbit at this energy.
    auto f = [&](double r) {
        return params.kerr / 4.0 * r * r * r * r -
               std::abs(params.delta) / 2.0 * r * r -
               std::numbers::sqrt2 * params.pump * r;
    };
    // f is increasing beyond its outermost stationary radius.
    const auto crit = cubic_real_roots(params.kerr, 0.0, -std::abs(params.delta),
                                       -std::numbers::sqrt2 * params.pump);
    const double r_star = std::max(0.0, crit.back());
    if (f(r_star) >= energy) return r_star;
    double hi = std::max(1.0, 2.0 * r_star);
    while (f(hi) < energy) hi *= 1.5;
    double lo = r_star;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < energy ? lo : hi) = mid;
    }
    return hi;
}

// --------------------------- area quadrature --------------------------------

namespace {

// Fraction of a linear-interpolated triangle lying below `level`, given the
// sorted corner values.
inline double triangle_fraction(double lo, double mid, double hi, double level) {
    if (level >= hi) return 1.0;
    if (level <= lo) return 0.0;
    if (level < mid) {
        return (level - lo) * (level - lo) / ((mid - lo) * (hi - lo));
    }
    return 1.0 - (hi - level) * (hi - level) / ((hi - mid) * (hi - lo));
}

} // namespace

std::vector<double> sublevel_areas(const ModelParams& params,
                                   const std::vector<double>& energies,
                                   std::size_t grid_n) {
    if (energies.empty()) return {};
    if (grid_n < 8) throw std::invalid_argument("sublevel_areas: grid too small");

    std::vector<std::size_t> order(energies.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });
    std::vector<double> sorted(energies.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = energies[order[i]];

    const double e_top = sorted.back();
    const double rmax = outer_turning_radius(params, e_top) + 0.5;
    const double step = 2.0 * rmax / static_cast<double>(grid_n);
    const double tri_area = step * step / 2.0;

    std::vector<double> partial(sorted.size(), 0.0);
    std::vector<double> full_from(sorted.size() + 1, 0.0);

    auto corner_row = [&](std::size_t i) {
        std::vector<double> row(grid_n + 1);
        const double x = -rmax + static_cast<double>(i) * step;
        for (std::size_t j = 0; j <= grid_n; ++j) {
            const double y = -rmax + static_cast<double>(j) * step;
            row[j] = classical_energy(x, y, params);
        }
        return row;
    };

    auto add_triangle = [&](double a, double b, double c) {
        double lo = a, mid = b, hi = c;
        if (lo > mid) std::swap(lo, mid);
        if (mid > hi) std::swap(mid, hi);
        if (lo > mid) std::swap(lo, mid);
        if (hi <= sorted.front()) {
            // fully below every level
            full_from[0] += tri_area;
            return;
        }
        const auto it0 = std::lower_bound(sorted.begin(), sorted.end(), lo);
        const auto it1 = std::lower_bound(sorted.begin(), sorted.end(), hi);
        const auto k1 = static_cast<std::size_t>(it1 - sorted.begin());
        for (auto it = it0; it != it1; ++it) {
            const auto k = static_cast<std::size_t>(it - sorted.begin());
            partial[k] += tri_area * triangle_fraction(lo, mid, hi, *it);
        }
        full_from[k1] += tri_area;
    };

    std::vector<double> prev = corner_row(0);
    for (std::size_t i = 1; i <= grid_n; ++i) {
        std::vector<double> cur = corner_row(i);
        for (std::size_t j = 0; j < grid_n; ++j) {
            add_triangle(prev[j], cur[j], prev[j + 1]);
            add_triangle(cur[j + 1], cur[j], prev[j + 1]);
        }
        prev = std::move(cur);
    }

    // Areas in sorted order: cumulative full-triangle area plus partials.
    std::vector<double> out(energies.size());
    double cum = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cum += full_from[k];
        out[order[k]] = cum + partial[k];
    }
    return out;
}

double semiclassical_dos(double energy, const ModelParams& params,
                         const DosOptions& opts) {
    const auto portrait = stationary_points(params);
    const double eps_min = portrait.eps_min;
    if (energy < eps_min) return 0.0;

    double de = opts.denergy;
    if (de <= 0.0) {
        de = std::max(energy - eps_min, params.kerr) / 512.0;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    if (energy - de >= eps_min) {
        const auto a = sublevel_areas(params, {energy - de, energy + de}, opts.grid_n);
        return std::max(0.0, (a[1] - a[0]) / (2.0 * de) / two_pi);
    }
    // Second-order forward stencil keeps ν finite down to ε_min.
    const auto a = sublevel_areas(params, {energy, energy + de, energy + 2.0 * de},
                                  opts.grid_n);
    return std::max(0.0, (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * de) / two_pi);
}

DosCurve quantum_dos(const Spectrum& spec, double window_lo, double window_hi,
                     std::size_t bins, const DosOptions& opts) {
    if (!(window_hi > window_lo) || bins < 1) {
        throw std::invalid_argument("quantum_dos: bad window or bin count");
    }
    const double ground = spec.energies.front();
    if (spec.converged_count == 0 ||
        spec.energies[spec.converged_count - 1] - ground < window_hi) {
        throw convergence_error("quantum_dos: window exceeds converged range");
    }

    DosCurve curve;
    curve.bin_width = (window_hi - window_lo) / static_cast<double>(bins);
    curve.energies.resize(bins);
    curve.quantum_counts.assign(bins, 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
        curve.energies[b] = window_lo + (static_cast<double>(b) + 0.5) * curve.bin_width;
    }
    for (std::size_t i = 0; i < spec.converged_count; ++i) {
        const double rel = spec.energies[i] - ground;
        if (rel < window_lo || rel > window_hi) continue;
        auto b = static_cast<std::size_t>((rel - window_lo) / curve.bin_width);
        if (b >= bins) b = bins - 1;
        curve.quantum_counts[b] += 1.0;
    }
    for (double& c : curve.quantum_counts) c /= curve.bin_width;

    // Smooth curve at the bin centers, one quadrature pass for all stencils.
    const auto portrait = stationary_points(spec.params);
    const double eps_min = portrait.eps_min;
    double de = opts.denergy;
    if (de <= 0.0) de = (window_hi - window_lo) / 512.0;
    std::vector<double> stencil;
    stencil.reserve(3 * bins);
    std::vector<int> kind(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const double e = eps_min + curve.energies[b];
        if (e - de >= eps_min) {
            kind[b] = 0;
            stencil.push_back(e - de);
            stencil.push_back(e + de);
        } else {
            kind[b] = 1;
            stencil.push_back(e);
            stencil.push_back(e + de);
            stencil.push_back(e + 2.0 * de);
        }
    }
    const auto areas = sublevel_areas(spec.params, stencil, opts.grid_n);
    curve.semiclassical.resize(bins);
    const double two_pi = 2.0 * std::numbers::pi;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        if (kind[b] == 0) {
            curve.semiclassical[b] =
                std::max(0.0, (areas[pos + 1] - areas[pos]) / (2.0 * de) / two_pi);
            pos += 2;
        } else {
            curve.semiclassical[b] = std::max(
                0.0, (-3.0 * areas[pos] + 4.0 * areas[pos + 1] - areas[pos + 2]) /
                         (2.0 * de) / two_pi);
            pos += 3;
        }
    }
    return curve;
}

std::optional<std::pair<double, double>> critical_energies(const ModelParams& params) {
    const auto portrait = stationary_points(params);
    if (!portrait.eps_sad || !portrait.eps_max) return std::nullopt;
    return std::make_pair(*portrait.eps_sad - portrait.eps_min,
                          *portrait.eps_max - portrait.eps_min);
}

// --------------------------- region classification --------------------------

Region classify_region(double q, double p, const ModelParams& params,
                       std::size_t grid_n) {
    const auto portrait = stationary_points(params);
    if (!portrait.eps_sad || !portrait.eps_max || params.pump == 0.0) {
        return Region::I;  // no separatrix below Δc
    }
    const double eps = classical_energy(q, p, params);
    const double eps_sad = *portrait.eps_sad;
    const double eps_max = *portrait.eps_max;
    if (std::abs(eps - eps_sad) < 1e-9) return Region::separatrix;
    if (eps < eps_sad) return Region::I;
    if (eps > eps_max) return Region::III;

    // Between the critical energies: decide which superlevel lobe the point
    // borders by walking uphill, then flood-filling {h > ε} on a bounded grid.
    const StationaryPoint* local_max = nullptr;
    for (const auto& pt : portrait.stationary) {
        if (pt.kind == StationaryKind::local_max) local_max = &pt;
    }
    if (local_max == nullptr) return Region::I;  // marginal Δ≈Δc portrait

    const double rmax = outer_turning_radius(params, eps_max) + 1.0;
    const double cell = 2.0 * rmax / static_cast<double>(grid_n);

    // Uphill walk until the containing cell centre clears the level.
    double x = q, y = p;
    auto cell_of = [&](double cx, double cy) {
        auto ix = static_cast<long>((cx + rmax) / cell);
        auto iy = static_cast<long>((cy + rmax) / cell);
        ix = std::clamp<long>(ix, 0, static_cast<long>(grid_n) - 1);
        iy = std::clamp<long>(iy, 0, static_cast<long>(grid_n) - 1);
        return std::make_pair(ix, iy);
    };
    auto center_energy = [&](long ix, long iy) {
        const double cx = -rmax + (static_cast<double>(ix) + 0.5) * cell;
        const double cy = -rmax + (static_cast<double>(iy) + 0.5) * cell;
        return classical_energy(cx, cy, params);
    };
    for (int it = 0; it < 10000; ++it) {
        const auto [ix, iy] = cell_of(x, y);
        if (center_energy(ix, iy) > eps) break;
        const auto v = hamilton_rhs(x, y, params);
        // ∇h = (-dp/dt, dq/dt)
        const double gx = -v.dp_dt, gy = v.dq_dt;
        const double norm = std::hypot(gx, gy);
        if (norm == 0.0) break;
        x += cell * gx / norm;
        y += cell * gy / norm;
    }

    // Flood fill over cells with centre energy above ε.
    const auto n = static_cast<long>(grid_n);
    std::vector<char> seen(grid_n * grid_n, 0);
    auto idx = [&](long ix, long iy) {
        return static_cast<std::size_t>(ix) * grid_n + static_cast<std::size_t>(iy);
    };
    const auto [sx, sy] = cell_of(x, y);
    std::queue<std::pair<long, long>> frontier;
    frontier.push({sx, sy});
    seen[idx(sx, sy)] = 1;
    bool touches_border = false;
    while (!frontier.empty()) {
        const auto [ix, iy] = frontier.front();
        frontier.pop();
        if (ix == 0 || iy == 0 || ix == n - 1 || iy == n - 1) touches_border = true;
        const long neigh[4][2] = {{ix + 1, iy}, {ix - 1, iy}, {ix, iy + 1}, {ix, iy - 1}};
        for (const auto& nb : neigh) {
            if (nb[0] < 0 || nb[1] < 0 || nb[0] >= n || nb[1] >= n) continue;
            if (seen[idx(nb[0], nb[1])]) continue;
            if (center_energy(nb[0], nb[1]) <= eps) continue;
            seen[idx(nb[0], nb[1])] = 1;
            frontier.push({nb[0], nb[1]});
        }
    }
    // The unbounded superlevel component always reaches the border; the lobe
    // around the local maximum never does.
    return touches_border ? Region::IIa : Region::IIb;
}

std::string to_string(Region r) {
    switch (r) {
        case Region::I: return "I";
        case Region::IIa: return "IIa";
        case Region::IIb: return "IIb";
        case Region::III: return "III";
        case Region::separatrix: return "separatrix";
    }
    return "?";
}

std::string to_string(StationaryKind k) {
    switch (k) {
        case StationaryKind::minimum: return "minimum";
        case StationaryKind::saddle: return "saddle";
        case StationaryKind::local_max: return "local_max";
        case StationaryKind::degenerate_ring: return "degenerate_ring";
    }
    return "?";
}

} // namespace kpo

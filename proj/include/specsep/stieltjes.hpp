#pragma once

// Stieltjes transforms of the limiting spectral distribution F of
// S_n = (1/n) B X X* B* and of its companion F^{c,H}, the limit law of the
// n x n matrix (1/n) X* B* B X. The two are tied by
//
//     m_companion(z) = -(1 - c)/z + c m(z),
//
// and the companion transform is the unique solution in C+ of
//
//     m_companion = -1 / (z - c * sum_k w_k t_k / (1 + t_k m_companion)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "specsep/errors.hpp"
#include "specsep/measure.hpp"

namespace specsep {

/// Imaginary height at which densities are read off Im m(x + i v) / pi.
inline constexpr double kDensityHeight = 1e-6;

struct StieltjesPair {
    Complex m;            // transform of F
    Complex m_companion;  // transform of F^{c,H}
    UpperHalfPoint z;
    double residual;
};

namespace detail {

inline constexpr double kValueMapPoleTol = 1e-14;

inline void check_value_map_poles(Complex mu, const SpectralMeasure& H) {
    if (std::abs(mu) < kValueMapPoleTol)
        throw PoleError("companion value map: argument coincides with the pole at 0");
    for (const Atom& a : H.atoms()) {
        if (a.location == 0.0) continue;
        if (std::abs(mu + 1.0 / a.location) < kValueMapPoleTol) {
            std::ostringstream msg;
            msg << "companion value map: argument coincides with the pole at " << -1.0 / a.location;
            throw PoleError(msg.str());
        }
    }
}

/// mu -> -1 / (z - c sum w t / (1 + t mu)); nullopt on a singular denominator.
inline std::optional<Complex> companion_map(Complex mu, Complex z, double c, const SpectralMeasure& H) {
    const Complex den = z - c * H.mean_resolvent(mu);
    if (!(std::abs(den) > 0.0) || !std::isfinite(std::abs(den))) return std::nullopt;
    return -1.0 / den;
}

inline double companion_residual(Complex mu, Complex z, double c, const SpectralMeasure& H) {
    const auto next = companion_map(mu, z, c, H);
    if (!next) return std::numeric_limits<double>::infinity();
    return std::abs(mu - *next);
}

/// Newton on z(mu) - z = 0, with step halving to stay in C+.
inline std::optional<Complex> newton_refine(Complex mu, Complex z, double c, const SpectralMeasure& H,
                                            double tol, int max_steps = 60) {
    for (int k = 0; k < max_steps; ++k) {
        if (companion_residual(mu, z, c, H) < tol) return mu;
        const Complex g = -1.0 / mu + c * H.mean_resolvent(mu) - z;
        const Complex dg = 1.0 / (mu * mu) - c * H.mean_resolvent_sq(mu);
        if (!(std::abs(dg) > 0.0)) return std::nullopt;
        const Complex step = g / dg;
        if (!std::isfinite(std::abs(step))) return std::nullopt;
        double lambda = 1.0;
        Complex trial = mu - step;
        while (trial.imag() <= 0.0 && lambda > 1e-10) {
            lambda *= 0.5;
            trial = mu - lambda * step;
        }
        if (trial.imag() <= 0.0) return std::nullopt;
        if (std::abs(trial - mu) <= 1e-17 * std::abs(mu)) {
            mu = trial;
            break;
        }
        mu = trial;
    }
    if (mu.imag() > 0.0 && companion_residual(mu, z, c, H) < tol) return mu;
    return std::nullopt;
}

struct IterationOutcome {
    std::optional<Complex> root;
    double last_residual;
    int iterations;
};

/// Damped fixed-point iteration. Gives up early when the residual stops
/// shrinking (oscillation or stagnation near a support edge).
inline IterationOutcome damped_iteration(Complex start, Complex z, double c, const SpectralMeasure& H,
                                         double alpha, double tol, int budget) {
    constexpr int kWindow = 100;
    constexpr double kNewtonSwitch = 1e-4;
    Complex mu = start;
    double residual = std::numeric_limits<double>::infinity();
    double window_start_residual = residual;
    bool newton_tried_at_level = false;
    double newton_level = kNewtonSwitch;
    int it = 0;
    for (; it < budget; ++it) {
        const auto next = companion_map(mu, z, c, H);
        if (!next) throw PoleError("solve_companion: iteration hit a singularity");
        residual = std::abs(mu - *next);
        if (residual < tol && mu.imag() > 0.0) return {mu, residual, it};
        if (residual < newton_level && !newton_tried_at_level) {
            if (auto polished = newton_refine(mu, z, c, H, tol)) return {polished, tol, it};
            newton_tried_at_level = true;
        }
        if (newton_tried_at_level && residual < 1e-3 * newton_level) {
            newton_level *= 1e-3;
            newton_tried_at_level = false;
        }
        if (it % kWindow == 0) {
            if (it > 0 && residual > 0.5 * window_start_residual) break;
            window_start_residual = residual;
        }
        mu = (1.0 - alpha) * mu + alpha * *next;
    }
    return {std::nullopt, residual, it};
}

/// Follow the root down from Im z = max(1, v) to Im z = v with Newton steps.
/// `budget` caps the total number of iterations and Newton steps.
inline std::optional<Complex> continuation_solve(Complex z, double c, const SpectralMeasure& H, double tol,
                                                 int budget) {
    if (budget <= 0) return std::nullopt;
    const double u = z.real();
    const double v_target = z.imag();
    double v = std::max(1.0, v_target);
    Complex start_z{u, v};
    auto first = damped_iteration(-1.0 / start_z, start_z, c, H, 0.5, tol, budget);
    if (!first.root) return std::nullopt;
    budget -= first.iterations;
    Complex mu = *first.root;
    double ratio = 0.3;
    while (v > v_target) {
        if (budget <= 0) return std::nullopt;
        const double v_next = std::max(v_target, v * ratio);
        const Complex z_next{u, v_next};
        const int steps = std::min(80, budget);
        budget -= steps;
        if (auto next = newton_refine(mu, z_next, c, H, tol, steps)) {
            mu = *next;
            v = v_next;
            ratio = std::max(ratio * ratio, 1e-2);
        } else {
            ratio = std::sqrt(ratio);
            if (ratio > 0.999) return std::nullopt;
        }
    }
    return mu;
}

}  // namespace detail

/// z(mu) = -1/mu + c sum_k w_k t_k / (1 + t_k mu): the value of z at which mu
/// solves the companion equation exactly.
inline Complex companion_value_map(Complex mu, AspectRatio c, const SpectralMeasure& H) {
    detail::check_value_map_poles(mu, H);
    return -1.0 / mu + c.value() * H.mean_resolvent(mu);
}

inline double companion_value_map(double mu, AspectRatio c, const SpectralMeasure& H) {
    return companion_value_map(Complex{mu, 0.0}, c, H).real();
}

/// Solve the companion equation at z.
///
/// Damped fixed-point iteration from `warm_start` (default -1/z), polished by
/// Newton once the residual is small. On stagnation the iteration restarts
/// from -1/z with damping 0.1; if that also stalls, the root is tracked down
/// from Im z = 1 by continuation. Throws ConvergenceError if nothing reaches
/// opts.tol.
inline StieltjesPair solve_companion(UpperHalfPoint z, AspectRatio c, const SpectralMeasure& H,
                                     const SolverOptions& opts = {},
                                     std::optional<Complex> warm_start = std::nullopt) {
    opts.validate();
    const Complex zz = z.value();
    const double cc = c.value();
    const Complex asymptote = -1.0 / zz;

    Complex start = asymptote;
    if (warm_start && warm_start->imag() > 0.0 && std::isfinite(std::abs(*warm_start))) start = *warm_start;

    auto first = detail::damped_iteration(start, zz, cc, H, opts.damping, opts.tol, opts.max_iters);
    std::optional<Complex> root = first.root;
    double last_residual = first.last_residual;
    int remaining = opts.max_iters - first.iterations;
    if (!root && remaining > 0) {
        auto second = detail::damped_iteration(asymptote, zz, cc, H, 0.1, opts.tol, remaining);
        root = second.root;
        last_residual = std::min(last_residual, second.last_residual);
        remaining -= second.iterations;
    }
    if (!root) root = detail::continuation_solve(zz, cc, H, opts.tol, remaining);
    if (!root) {
        std::ostringstream msg;
        msg << "solve_companion: no convergence at z = " << zz << " (last residual " << last_residual << ")";
        throw ConvergenceError(msg.str(), last_residual);
    }

    const Complex mc = *root;
    const Complex m = (mc + (1.0 - cc) / zz) / cc;
    return StieltjesPair{m, mc, z, detail::companion_residual(mc, zz, cc, H)};
}

/// Companion transform for H = delta_1 in closed form,
/// (-(z + 1 - c) + sqrt((z - 1 - c)^2 - 4c)) / (2z), with the square-root
/// branch chosen so that the result lies in C+.
inline Complex mp_closed_form(UpperHalfPoint z, AspectRatio c) {
    const Complex zz = z.value();
    const double cc = c.value();
    const Complex root = std::sqrt((zz - 1.0 - cc) * (zz - 1.0 - cc) - 4.0 * cc);
    const Complex plus = (-(zz + 1.0 - cc) + root) / (2.0 * zz);
    const Complex minus = (-(zz + 1.0 - cc) - root) / (2.0 * zz);
    return plus.imag() >= minus.imag() ? plus : minus;
}

/// Density of F at x > 0, read off Im m(x + i kDensityHeight) / pi.
inline double density_at(double x, AspectRatio c, const SpectralMeasure& H, const SolverOptions& opts = {}) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("density_at: x must be positive");
    const auto pair = solve_companion(UpperHalfPoint(x, kDensityHeight), c, H, opts);
    return std::max(0.0, pair.m.imag() / std::numbers::pi);
}

/// Density of F on a sorted grid of positive points, warm-starting each solve
/// from its left neighbour.
inline std::vector<double> density_scan(std::span<const double> xs, AspectRatio c, const SpectralMeasure& H,
                                        const SolverOptions& opts = {}) {
    std::vector<double> out;
    out.reserve(xs.size());
    std::optional<Complex> warm;
    for (double x : xs) {
        if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("density_scan: points must be positive");
        const auto pair = solve_companion(UpperHalfPoint(x, kDensityHeight), c, H, opts, warm);
        warm = pair.m_companion;
        out.push_back(std::max(0.0, pair.m.imag() / std::numbers::pi));
    }
    return out;
}

/// Stieltjes transform of an empirical spectral distribution,
/// (1/p) sum_j 1 / (lambda_j - z).
inline Complex esd_stieltjes(std::span<const double> eigenvalues, UpperHalfPoint z) {
    if (eigenvalues.empty()) throw ValidationError("esd_stieltjes: empty eigenvalue list");
    const Complex zz = z.value();
    Complex acc{0.0, 0.0};
    for (double lambda : eigenvalues) acc += 1.0 / (lambda - zz);
    return acc / static_cast<double>(eigenvalues.size());
}

}  // namespace specsep

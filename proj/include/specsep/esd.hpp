#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "specsep/eigen_solver.hpp"
#include "specsep/errors.hpp"
#include "specsep/measure.hpp"
#include "specsep/stieltjes.hpp"
#include "specsep/support.hpp"

namespace specsep {

/// Right-continuous step CDF with mass 1/p at each eigenvalue.
class EmpiricalCDF {
public:
    explicit EmpiricalCDF(std::span<const double> values) {
        if (values.empty()) throw ValidationError("EmpiricalCDF: no values");
        std::vector<double> sorted(values.begin(), values.end());
        std::sort(sorted.begin(), sorted.end());
        const double unit = 1.0 / static_cast<double>(sorted.size());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (jumps_.empty() || sorted[i] != jumps_.back()) {
                jumps_.push_back(sorted[i]);
                cumulative_.push_back(0.0);
            }
            cumulative_.back() = unit * static_cast<double>(i + 1);
        }
        cumulative_.back() = 1.0;
    }

    explicit EmpiricalCDF(const EigenSpectrum& spec) : EmpiricalCDF(std::span<const double>(spec.values)) {}

    double operator()(double x) const {
        const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), x);
        if (it == jumps_.begin()) return 0.0;
        return cumulative_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
    }

    /// Value just before the k-th jump.
    double before_jump(std::size_t k) const { return k == 0 ? 0.0 : cumulative_[k - 1]; }

    const std::vector<double>& jumps() const noexcept { return jumps_; }
    const std::vector<double>& cumulative() const noexcept { return cumulative_; }

private:
    std::vector<double> jumps_;
    std::vector<double> cumulative_;
};

/// CDF of the limiting law F, assembled from the density on the computed
/// support plus the atom at zero.
///
/// Each support interval [a, b] is cut into cells x = a + (b - a)(1 - cos t)/2
/// with t on a uniform grid; the density is sampled at cell midpoints in t,
/// which clusters nodes at the square-root edges.
class LimitCDF {
public:
    static constexpr std::size_t kDefaultNodes = 2048;

    LimitCDF(AspectRatio c, const SpectralMeasure& H, std::size_t total_nodes = kDefaultNodes,
             const SolverOptions& opts = {})
        : support_(find_support(c, H)), zero_atom_(lsd_zero_atom(c, H)) {
        double total_length = 0.0;
        for (const Interval& iv : support_.intervals) total_length += iv.length();
        for (const Interval& iv : support_.intervals) {
            const auto cells = std::max<std::size_t>(
                64, static_cast<std::size_t>(std::round(static_cast<double>(total_nodes) * iv.length() / total_length)));
            std::vector<double> nodes(cells);
            std::vector<double> weights(cells);
            for (std::size_t j = 0; j < cells; ++j) {
                const double theta = (static_cast<double>(j) + 0.5) * std::numbers::pi / static_cast<double>(cells);
                nodes[j] = iv.left + 0.5 * iv.length() * (1.0 - std::cos(theta));
                weights[j] = 0.5 * iv.length() * std::sin(theta) * std::numbers::pi / static_cast<double>(cells);
            }
            const std::vector<double> dens = density_scan(nodes, c, H, opts);
            double mass = boundaries_.empty() ? zero_atom_ : masses_.back();
            for (std::size_t j = 0; j <= cells; ++j) {
                const double theta = static_cast<double>(j) * std::numbers::pi / static_cast<double>(cells);
                boundaries_.push_back(iv.left + 0.5 * iv.length() * (1.0 - std::cos(theta)));
                masses_.push_back(mass);
                if (j < cells) mass += weights[j] * dens[j];
            }
            for (std::size_t j = 0; j < cells; ++j) {
                profile_x_.push_back(nodes[j]);
                profile_density_.push_back(dens[j]);
            }
        }
    }

    double operator()(double x) const {
        if (x < 0.0) return 0.0;
        if (boundaries_.empty() || x <= boundaries_.front()) return zero_atom_;
        if (x >= boundaries_.back()) return masses_.back();
        const auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), x);
        const std::size_t hi = static_cast<std::size_t>(it - boundaries_.begin());
        const std::size_t lo = hi - 1;
        const double span = boundaries_[hi] - boundaries_[lo];
        if (span <= 0.0) return masses_[hi];
        const double t = (x - boundaries_[lo]) / span;
        return masses_[lo] + t * (masses_[hi] - masses_[lo]);
    }

    /// Left limit; differs from operator() only at the zero atom.
    double left_limit(double x) const { return x <= 0.0 ? 0.0 : (*this)(x); }

    /// Smallest x with F(x) >= q, by bisection on the piecewise-linear table.
    double quantile(double q) const {
        if (q <= zero_atom_) return 0.0;
        double lo = 0.0;
        double hi = boundaries_.back();
        for (int k = 0; k < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++k) {
            const double mid = 0.5 * (lo + hi);
            if ((*this)(mid) >= q) hi = mid;
            else lo = mid;
        }
        return hi;
    }

    /// Integrated density plus zero atom; 1 up to quadrature error.
    double total_mass() const { return masses_.empty() ? zero_atom_ : masses_.back(); }
    double zero_atom() const noexcept { return zero_atom_; }
    const SupportSet& support() const noexcept { return support_; }
    const std::vector<double>& profile_x() const noexcept { return profile_x_; }
    const std::vector<double>& profile_density() const noexcept { return profile_density_; }

private:
    SupportSet support_;
    double zero_atom_;
    std::vector<double> boundaries_;
    std::vector<double> masses_;
    std::vector<double> profile_x_;
    std::vector<double> profile_density_;
};

/// sup_x |ECDF(x) - F(x)|, checked at both sides of every jump. Eigenvalues
/// within 1e-9 max|lambda| of zero are treated as exact zeros.
inline double ks_distance(const EmpiricalCDF& ecdf, const LimitCDF& limit) {
    const auto& jumps = ecdf.jumps();
    const double scale = std::max(std::abs(jumps.front()), std::abs(jumps.back()));
    const double zero_tol = 1e-9 * std::max(scale, 1.0);
    auto near_zero = [&](std::size_t k) { return std::abs(jumps[k]) <= zero_tol; };
    double worst = 0.0;
    std::size_t first_zero = jumps.size();
    for (std::size_t k = 0; k < jumps.size(); ++k) {
        // Jumps collapsed onto zero are checked once, as a single jump.
        if (near_zero(k) && k + 1 < jumps.size() && near_zero(k + 1)) {
            first_zero = std::min(first_zero, k);
            continue;
        }
        const double x = near_zero(k) ? 0.0 : jumps[k];
        const double after = ecdf.cumulative()[k];
        const double before = ecdf.before_jump(near_zero(k) ? std::min(first_zero, k) : k);
        worst = std::max(worst, std::abs(limit(x) - after));
        worst = std::max(worst, std::abs(limit.left_limit(x) - before));
    }
    return worst;
}

inline double ks_distance(const EmpiricalCDF& ecdf, AspectRatio c, const SpectralMeasure& H,
                          const SolverOptions& opts = {}) {
    return ks_distance(ecdf, LimitCDF(c, H, LimitCDF::kDefaultNodes, opts));
}

}  // namespace specsep

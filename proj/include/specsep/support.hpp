#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "specsep/errors.hpp"
#include "specsep/measure.hpp"
#include "specsep/stieltjes.hpp"

namespace specsep {

struct Interval {
    double left;
    double right;

    double length() const noexcept { return right - left; }
    double midpoint() const noexcept { return 0.5 * (left + right); }
};

/// Support of the companion law F^{c,H} on (0, inf), plus its mass at zero.
/// F itself has the same support on (0, inf).
struct SupportSet {
    std::vector<Interval> intervals;
    double zero_atom_weight = 0.0;

    bool contains(double x) const noexcept {
        return std::any_of(intervals.begin(), intervals.end(),
                           [x](const Interval& iv) { return iv.left <= x && x <= iv.right; });
    }

    /// Open gaps between consecutive support intervals.
    std::vector<Interval> gaps() const {
        std::vector<Interval> out;
        for (std::size_t i = 0; i + 1 < intervals.size(); ++i)
            out.push_back({intervals[i].right, intervals[i + 1].left});
        return out;
    }

    double left_edge() const { return intervals.front().left; }
    double right_edge() const { return intervals.back().right; }
};

/// Test interval [a, b] inside a spectral gap, kept `margin` away from the
/// support on both sides.
struct GapInterval {
    double a;
    double b;
    double margin;
};

namespace detail {

inline constexpr double kDerivativePoleTol = 1e-12;
inline constexpr int kBranchGridPoints = 4096;
inline constexpr double kTouchTolerance = 1e-8;

inline double value_map_derivative_unchecked(double mu, double c, const SpectralMeasure& H) {
    return 1.0 / (mu * mu) - c * H.mean_resolvent_sq(mu);
}

inline double value_map_unchecked(double mu, double c, const SpectralMeasure& H) {
    return -1.0 / mu + c * H.mean_resolvent(mu);
}

/// One maximal real interval of mu free of poles. Infinite ends are encoded
/// with +-infinity.
struct Branch {
    double left;
    double right;
};

/// Limit of the value map at a branch end. At +-inf it tends to 0; at the pole
/// 0 it tends to +inf from the left and -inf from the right; at a pole -1/t it
/// tends to -inf from the left and +inf from the right.
inline double limit_at_end(double end, bool approached_from_left) {
    if (std::isinf(end)) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    if (end == 0.0) return approached_from_left ? inf : -inf;
    return approached_from_left ? -inf : inf;
}

/// Composite grid on a branch: geometric clusters at each finite end plus a
/// linear fill. Infinite branches use a geometric sweep over many decades.
inline std::vector<double> branch_grid(const Branch& br, double scale) {
    const int n_geo = kBranchGridPoints / 4;
    const int n_lin = kBranchGridPoints - 2 * n_geo;
    std::vector<double> g;
    g.reserve(kBranchGridPoints);
    auto geometric = [&](double lo_exp, double hi_exp, int count, auto&& emit) {
        for (int i = 0; i < count; ++i) {
            const double e = lo_exp + (hi_exp - lo_exp) * (static_cast<double>(i) / (count - 1));
            emit(std::pow(10.0, e));
        }
    };
    if (std::isinf(br.left) && std::isinf(br.right)) {
        throw ValidationError("find_support: branch without a finite end");
    }
    if (std::isinf(br.left) || std::isinf(br.right)) {
        // mu = anchor -/+ y, y from scale*1e-10 to scale*1e10, plus linear fill on (0, 10 scale).
        const double anchor = std::isinf(br.left) ? br.right : br.left;
        const double dir = std::isinf(br.left) ? -1.0 : 1.0;
        geometric(-10.0, 10.0, 2 * n_geo, [&](double y) { g.push_back(anchor + dir * scale * y); });
        for (int i = 1; i <= n_lin; ++i) g.push_back(anchor + dir * 10.0 * scale * i / (n_lin + 1));
    } else {
        const double w = br.right - br.left;
        geometric(-10.0, -1.0, n_geo, [&](double d) { g.push_back(br.left + w * d); });
        geometric(-10.0, -1.0, n_geo, [&](double d) { g.push_back(br.right - w * d); });
        for (int i = 1; i <= n_lin; ++i) g.push_back(br.left + w * i / (n_lin + 1));
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    g.erase(std::remove_if(g.begin(), g.end(), [&](double m) { return !(m > br.left && m < br.right); }),
            g.end());
    return g;
}

inline double bisect_root(double lo, double hi, double c, const SpectralMeasure& H) {
    double flo = value_map_derivative_unchecked(lo, c, H);
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mid)) || mid == lo || mid == hi) break;
        const double fmid = value_map_derivative_unchecked(mid, c, H);
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Images of the increasing pieces of the value map: the complement of the
/// support on the real line.
inline std::vector<Interval> increasing_images(double c, const SpectralMeasure& H,
                                               std::vector<double>* critical_points = nullptr) {
    std::vector<double> poles{0.0};
    for (const Atom& a : H.atoms())
        if (a.location > 0.0) poles.push_back(-1.0 / a.location);
    std::sort(poles.begin(), poles.end());

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Branch> branches;
    branches.push_back({-inf, poles.front()});
    for (std::size_t i = 0; i + 1 < poles.size(); ++i) branches.push_back({poles[i], poles[i + 1]});
    branches.push_back({0.0, inf});

    const double t_max = H.max_location();
    const double t_min = H.min_positive_location();
    std::vector<Interval> images;
    for (const Branch& br : branches) {
        double scale = 1.0;
        if (std::isinf(br.left)) scale = br.right != 0.0 ? std::abs(br.right) : 1.0;
        if (std::isinf(br.right)) scale = t_max > 0.0 ? 1.0 / t_max : 1.0;
        if (std::isinf(br.left) && br.right == 0.0 && t_min > 0.0) scale = 1.0 / t_min;
        const std::vector<double> grid = branch_grid(br, scale);
        if (grid.empty()) continue;

        // Walk the grid, splitting into monotone pieces at sign changes of x'.
        double piece_start = br.left;
        bool start_is_branch_end = true;
        double prev_m = grid.front();
        double prev_d = value_map_derivative_unchecked(prev_m, c, H);
        auto close_piece = [&](double piece_end, bool end_is_branch_end, bool increasing) {
            if (!increasing) return;
            const double lo = start_is_branch_end ? limit_at_end(piece_start, false)
                                                  : value_map_unchecked(piece_start, c, H);
            const double hi = end_is_branch_end ? limit_at_end(piece_end, true)
                                                : value_map_unchecked(piece_end, c, H);
            if (hi > lo) images.push_back({lo, hi});
        };
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double m = grid[i];
            const double d = value_map_derivative_unchecked(m, c, H);
            if ((d > 0.0) != (prev_d > 0.0)) {
                const double root = bisect_root(prev_m, m, c, H);
                if (critical_points) critical_points->push_back(root);
                close_piece(root, false, prev_d > 0.0);
                piece_start = root;
                start_is_branch_end = false;
            }
            prev_m = m;
            prev_d = d;
        }
        close_piece(br.right, true, prev_d > 0.0);
    }
    return images;
}

}  // namespace detail

/// Derivative of the companion value map on the real line,
/// 1/mu^2 - c sum_k w_k t_k^2 / (1 + t_k mu)^2.
inline double value_map_derivative(double mu, AspectRatio c, const SpectralMeasure& H) {
    if (std::abs(mu) < detail::kDerivativePoleTol)
        throw PoleError("value_map_derivative: argument coincides with the pole at 0");
    for (const Atom& a : H.atoms()) {
        if (a.location > 0.0 && std::abs(mu + 1.0 / a.location) < detail::kDerivativePoleTol) {
            std::ostringstream msg;
            msg << "value_map_derivative: argument coincides with the pole at " << -1.0 / a.location;
            throw PoleError(msg.str());
        }
    }
    return detail::value_map_derivative_unchecked(mu, c.value(), H);
}

/// Real critical points of the companion value map, ascending.
inline std::vector<double> value_map_critical_points(AspectRatio c, const SpectralMeasure& H) {
    std::vector<double> roots;
    detail::increasing_images(c.value(), H, &roots);
    std::sort(roots.begin(), roots.end());
    return roots;
}

/// Support of F^{c,H} on (0, inf).
///
/// The complement of the support on the real line is the union of the images
/// x(I) over intervals I of real mu (away from 0 and the poles -1/t_k) on which
/// the value map x is increasing. Support intervals whose endpoints touch
/// within 1e-8 are merged.
inline SupportSet find_support(AspectRatio c, const SpectralMeasure& H) {
    if (H.max_location() <= 0.0) throw ValidationError("find_support: population spectrum is concentrated at 0");
    std::vector<Interval> images = detail::increasing_images(c.value(), H);
    // A gap narrower than the touch tolerance is a closed gap.
    images.erase(std::remove_if(images.begin(), images.end(),
                                [](const Interval& iv) {
                                    return std::isfinite(iv.length()) && iv.length() < detail::kTouchTolerance;
                                }),
                 images.end());
    std::sort(images.begin(), images.end(), [](const Interval& a, const Interval& b) { return a.left < b.left; });

    SupportSet out;
    out.zero_atom_weight = companion_zero_atom(c, H);
    double cursor = 0.0;
    for (const Interval& iv : images) {
        if (iv.right <= cursor) continue;
        if (iv.left > cursor) {
            if (iv.left - cursor > detail::kTouchTolerance) out.intervals.push_back({cursor, iv.left});
        }
        cursor = std::max(cursor, iv.right);
    }
    if (std::isfinite(cursor) || out.intervals.empty()) {
        std::ostringstream msg;
        msg << "find_support: could not close the support (complement ends at " << cursor << ")";
        throw Error(msg.str());
    }
    return out;
}

/// True iff [a - margin, b + margin] misses every support interval and
/// a - margin > 0.
inline bool is_outside_support(Interval interval, const SupportSet& support, double margin) {
    if (!(interval.left < interval.right)) throw ValidationError("is_outside_support: need a < b");
    if (!(margin >= 0.0)) throw ValidationError("is_outside_support: margin must be nonnegative");
    const double lo = interval.left - margin;
    const double hi = interval.right + margin;
    if (!(lo > 0.0)) return false;
    for (const Interval& iv : support.intervals)
        if (lo <= iv.right && iv.left <= hi) return false;
    return true;
}

/// Right endpoint of the rightmost support interval.
inline double largest_edge(AspectRatio c, const SpectralMeasure& H) { return find_support(c, H).right_edge(); }

/// Default margin for a gap of the given width.
inline double default_gap_margin(const Interval& gap) { return 1e-3 * gap.length(); }

/// Shrink a support gap into a test interval whose margin-padded hull stays
/// strictly inside the gap.
inline GapInterval make_gap_interval(const Interval& gap, std::optional<double> margin = std::nullopt) {
    const double m = margin.value_or(default_gap_margin(gap));
    if (!(m > 0.0)) throw ValidationError("make_gap_interval: margin must be positive");
    GapInterval out{gap.left + 2.0 * m, gap.right - 2.0 * m, m};
    if (!(out.a > 0.0 && out.a < out.b)) throw ValidationError("make_gap_interval: gap too narrow for margin");
    return out;
}

/// Widest gap of the support, if any.
inline std::optional<Interval> widest_gap(const SupportSet& support) {
    std::optional<Interval> best;
    for (const Interval& g : support.gaps())
        if (!best || g.length() > best->length()) best = g;
    return best;
}

}  // namespace specsep

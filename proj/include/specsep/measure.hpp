#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <sstream>
#include <vector>

#include "specsep/errors.hpp"

namespace specsep {

using Complex = std::complex<double>;

/// One point mass of a population spectrum.
struct Atom {
    double location;
    double weight;
};

/// Discrete population spectral distribution H = sum_k w_k delta_{t_k}.
///
/// Atoms are kept sorted by location. Locations are distinct and nonnegative,
/// weights are positive and sum to one within 1e-12.
class SpectralMeasure {
public:
    static constexpr double kWeightSumTolerance = 1e-12;

    explicit SpectralMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw ValidationError("SpectralMeasure: no atoms");
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom& a, const Atom& b) { return a.location < b.location; });
        double total = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            const Atom& a = atoms_[k];
            if (!std::isfinite(a.location) || a.location < 0.0)
                throw ValidationError("SpectralMeasure: atom locations must be finite and >= 0");
            if (!std::isfinite(a.weight) || a.weight <= 0.0)
                throw ValidationError("SpectralMeasure: atom weights must be positive");
            if (k > 0 && atoms_[k - 1].location == a.location)
                throw ValidationError("SpectralMeasure: duplicate atom location");
            total += a.weight;
        }
        if (std::abs(total - 1.0) > kWeightSumTolerance) {
            std::ostringstream msg;
            msg << "SpectralMeasure: weights sum to " << total << ", expected 1";
            throw ValidationError(msg.str());
        }
    }

    /// Point mass at t.
    static SpectralMeasure dirac(double t) { return SpectralMeasure({{t, 1.0}}); }

    /// Empirical measure of a list of values (weights 1/size), merging values
    /// whose consecutive gap is at most merge_tol. Tiny negative values from
    /// rounding are clamped to zero.
    static SpectralMeasure from_values(std::span<const double> values, double merge_tol = 1e-10) {
        if (values.empty()) throw ValidationError("SpectralMeasure: no values");
        std::vector<double> sorted(values.begin(), values.end());
        std::sort(sorted.begin(), sorted.end());
        const double unit = 1.0 / static_cast<double>(sorted.size());
        std::vector<Atom> atoms;
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i + 1;
            while (j < sorted.size() && sorted[j] - sorted[j - 1] <= merge_tol) ++j;
            double sum = 0.0;
            for (std::size_t k = i; k < j; ++k) sum += sorted[k];
            const double loc = std::max(0.0, sum / static_cast<double>(j - i));
            atoms.push_back({loc, unit * static_cast<double>(j - i)});
            i = j;
        }
        // Clamping can make two clusters collide at zero.
        if (atoms.size() >= 2 && atoms[0].location == atoms[1].location) {
            atoms[1].weight += atoms[0].weight;
            atoms.erase(atoms.begin());
        }
        renormalize(atoms);
        return SpectralMeasure(std::move(atoms));
    }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    /// Mass sitting at t = 0.
    double zero_weight() const noexcept {
        return atoms_.front().location == 0.0 ? atoms_.front().weight : 0.0;
    }

    double max_location() const noexcept { return atoms_.back().location; }

    /// Smallest strictly positive location; 0 if there is none.
    double min_positive_location() const noexcept {
        for (const Atom& a : atoms_)
            if (a.location > 0.0) return a.location;
        return 0.0;
    }

    /// Pushforward under t -> s t.
    SpectralMeasure scaled(double s) const {
        if (!(s > 0.0)) throw ValidationError("SpectralMeasure::scaled: factor must be positive");
        std::vector<Atom> out = atoms_;
        for (Atom& a : out) a.location *= s;
        return SpectralMeasure(std::move(out));
    }

    /// sum_k w_k t_k / (1 + t_k mu)
    template <class T>
    T mean_resolvent(T mu) const {
        T acc{0.0};
        for (const Atom& a : atoms_) acc += a.weight * a.location / (1.0 + a.location * mu);
        return acc;
    }

    /// sum_k w_k t_k^2 / (1 + t_k mu)^2
    template <class T>
    T mean_resolvent_sq(T mu) const {
        T acc{0.0};
        for (const Atom& a : atoms_) {
            const T d = 1.0 + a.location * mu;
            acc += a.weight * a.location * a.location / (d * d);
        }
        return acc;
    }

private:
    static void renormalize(std::vector<Atom>& atoms) {
        double total = 0.0;
        for (const Atom& a : atoms) total += a.weight;
        for (Atom& a : atoms) a.weight /= total;
    }

    std::vector<Atom> atoms_;
};

/// Dimension-to-sample-size ratio c = p / n.
class AspectRatio {
public:
    explicit AspectRatio(double c) : c_(c) {
        if (!std::isfinite(c) || c <= 0.0) throw ValidationError("AspectRatio: c must be finite and > 0");
    }
    static AspectRatio of(std::size_t p, std::size_t n) {
        return AspectRatio(static_cast<double>(p) / static_cast<double>(n));
    }
    double value() const noexcept { return c_; }

private:
    double c_;
};

/// z = u + i v with v > 0.
class UpperHalfPoint {
public:
    UpperHalfPoint(double u, double v) : u_(u), v_(v) {
        if (!std::isfinite(u) || !std::isfinite(v) || v <= 0.0)
            throw ValidationError("UpperHalfPoint: imaginary part must be positive");
    }
    explicit UpperHalfPoint(Complex z) : UpperHalfPoint(z.real(), z.imag()) {}

    double re() const noexcept { return u_; }
    double im() const noexcept { return v_; }
    Complex value() const noexcept { return {u_, v_}; }

private:
    double u_;
    double v_;
};

struct SolverOptions {
    double tol = 1e-12;
    int max_iters = 10000;
    double damping = 0.5;

    void validate() const {
        if (!(tol > 0.0)) throw ValidationError("SolverOptions: tol must be > 0");
        if (max_iters < 1) throw ValidationError("SolverOptions: max_iters must be >= 1");
        if (!(damping > 0.0 && damping <= 1.0)) throw ValidationError("SolverOptions: damping must be in (0,1]");
    }
};

/// Mass of F (the limit law of S_n) at zero: max(w0, 1 - (1 - w0)/c).
inline double lsd_zero_atom(AspectRatio c, const SpectralMeasure& H) {
    const double w0 = H.zero_weight();
    return std::max(w0, 1.0 - (1.0 - w0) / c.value());
}

/// Mass of the companion law F^{c,H} at zero: max(0, 1 - c (1 - w0)).
inline double companion_zero_atom(AspectRatio c, const SpectralMeasure& H) {
    return std::max(0.0, 1.0 - c.value() * (1.0 - H.zero_weight()));
}

}  // namespace specsep

#pragma once

// Dense Hermitian eigenvalues without eigenvectors.
//
// Reduction: Householder reflectors bring the matrix to Hermitian
// tridiagonal form. The off-diagonals are then rotated to |e_i| by a
// diagonal unitary similarity, which leaves a real symmetric tridiagonal
// matrix for the implicit-shift QL sweep.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "specsep/errors.hpp"

namespace specsep {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

/// Eigenvalues sorted ascending.
struct EigenSpectrum {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double max() const { return values.back(); }
    double min() const { return values.front(); }
    double sum() const {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
};

namespace detail {

template <class Scalar>
Scalar unit_phase(Scalar x) {
    if constexpr (is_complex<Scalar>::value) {
        const double r = std::abs(x);
        return r > 0.0 ? x / r : Scalar(1.0);
    } else {
        return x < 0.0 ? Scalar(-1.0) : Scalar(1.0);
    }
}

/// Reflector H = I - 2 v v* (v unit) with H x = beta e_1, |beta| = |x|.
/// Returns false when x = 0 (no reflection needed).
template <class Scalar>
bool make_reflector(Vector<Scalar>& x, double& beta_abs) {
    const double norm = x.norm();
    beta_abs = norm;
    if (norm == 0.0) return false;
    const Scalar alpha = -unit_phase(x(0)) * norm;
    x(0) -= alpha;
    const double vnorm = x.norm();
    if (vnorm == 0.0) return false;
    x /= vnorm;
    return true;
}

/// Eigenvalues of the real symmetric tridiagonal matrix with diagonal d and
/// off-diagonal e (e[i] couples d[i] and d[i+1]); implicit-shift QL.
inline std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> e) {
    const std::size_t n = d.size();
    if (n == 0) return d;
    e.resize(n, 0.0);
    e[n - 1] = 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const std::size_t max_sweeps = 30 * n;
    std::size_t sweeps = 0;

    for (std::size_t l = 0; l < n; ++l) {
        while (true) {
            std::size_t m = l;
            for (; m + 1 < n; ++m)
                if (std::abs(e[m]) <= eps * (std::abs(d[m]) + std::abs(d[m + 1]))) break;
            if (m == l) break;
            if (++sweeps > max_sweeps) {
                std::ostringstream msg;
                msg << "tridiagonal QL: no convergence after " << max_sweeps << " sweeps";
                throw ConvergenceError(msg.str(), std::abs(e[l]));
            }
            // Wilkinson-type shift from the leading 2x2 block.
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            bool underflow = false;
            for (std::size_t i = m; i-- > l;) {
                const double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    std::sort(d.begin(), d.end());
    return d;
}

template <class Scalar>
double max_abs(const Matrix<Scalar>& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Eigenvalues of a Hermitian (or real symmetric) matrix.
///
/// Throws ValidationError when max|M - M*| exceeds 1e-10 max|M|, and
/// ConvergenceError if QL needs more than 30 p sweeps.
template <class Scalar>
EigenSpectrum hermitian_eigenvalues(const Matrix<Scalar>& M) {
    if (M.rows() != M.cols()) throw DimensionError("hermitian_eigenvalues: matrix is not square");
    const Eigen::Index n = M.rows();
    if (n == 0) return {};
    const double scale = detail::max_abs(M);
    const double asym = detail::max_abs<Scalar>(M - M.adjoint());
    if (asym > 1e-10 * scale) {
        std::ostringstream msg;
        msg << "hermitian_eigenvalues: input is not Hermitian (max |M - M*| = " << asym << ")";
        throw ValidationError(msg.str());
    }

    Matrix<Scalar> A = 0.5 * (M + M.adjoint());
    std::vector<double> d(static_cast<std::size_t>(n));
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index k = 0; k + 2 < n; ++k) {
        const Eigen::Index len = n - k - 1;
        Vector<Scalar> v = A.col(k).tail(len);
        double beta = 0.0;
        if (detail::make_reflector(v, beta)) {
            auto trailing = A.bottomRightCorner(len, len);
            Vector<Scalar> p = trailing * v;
            const Scalar vp = v.dot(p);  // v* p, real for Hermitian trailing block
            Vector<Scalar> w = p - vp * v;
            trailing.noalias() -= 2.0 * (v * w.adjoint());
            trailing.noalias() -= 2.0 * (w * v.adjoint());
        }
        e[static_cast<std::size_t>(k)] = beta;
    }
    if (n >= 2) e[static_cast<std::size_t>(n - 2)] = std::abs(A(n - 1, n - 2));
    for (Eigen::Index i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = std::real(A(i, i));

    return {detail::tridiagonal_eigenvalues(std::move(d), std::move(e))};
}

/// Eigenvalues of (1/n) B X X* B* computed as squared singular values of
/// (1/sqrt n) B X, without forming the Gram matrix: Householder
/// bidiagonalization, then QL on the tridiagonal Gram of the bidiagonal.
/// Padded with zeros to length p when X has fewer columns than p. The
/// normalizing sample count defaults to the number of columns of X.
template <class Scalar>
EigenSpectrum singular_values_scaled(const Matrix<Scalar>& B, const Matrix<Scalar>& X,
                                     std::optional<std::size_t> sample_count = std::nullopt) {
    if (B.cols() != X.rows()) throw DimensionError("singular_values_scaled: B.cols() != X.rows()");
    const Eigen::Index p = B.rows();
    const Eigen::Index n = X.cols();
    if (p == 0) return {};
    if (n == 0) throw DimensionError("singular_values_scaled: X has no columns");
    const double norm_count = static_cast<double>(sample_count.value_or(static_cast<std::size_t>(n)));
    if (!(norm_count > 0.0)) throw DimensionError("singular_values_scaled: sample count must be positive");

    Matrix<Scalar> Y = (B * X) / std::sqrt(norm_count);
    Matrix<Scalar> A = p >= n ? Y : Matrix<Scalar>(Y.adjoint());
    const Eigen::Index r = A.rows();
    const Eigen::Index s = A.cols();

    std::vector<double> diag(static_cast<std::size_t>(s), 0.0);
    std::vector<double> super(static_cast<std::size_t>(s), 0.0);
    for (Eigen::Index k = 0; k < s; ++k) {
        Vector<Scalar> v = A.col(k).tail(r - k);
        double beta = 0.0;
        if (detail::make_reflector(v, beta) && k + 1 < s) {
            auto block = A.bottomRightCorner(r - k, s - k - 1);
            Matrix<Scalar> vtb = v.adjoint() * block;
            block.noalias() -= 2.0 * (v * vtb);
        }
        diag[static_cast<std::size_t>(k)] = beta;
        if (k + 1 < s) {
            Vector<Scalar> u = A.row(k).tail(s - k - 1).adjoint();
            double gamma = 0.0;
            if (detail::make_reflector(u, gamma) && k + 1 < r) {
                auto block = A.bottomRightCorner(r - k - 1, s - k - 1);
                Vector<Scalar> bu = block * u;
                block.noalias() -= 2.0 * (bu * u.adjoint());
            }
            super[static_cast<std::size_t>(k)] = gamma;
        }
    }

    // Tridiagonal Gram of the upper bidiagonal matrix.
    std::vector<double> td(static_cast<std::size_t>(s));
    std::vector<double> te(static_cast<std::size_t>(s), 0.0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(s); ++i) {
        const double left = i > 0 ? super[i - 1] : 0.0;
        td[i] = diag[i] * diag[i] + left * left;
        if (i + 1 < static_cast<std::size_t>(s)) te[i] = diag[i] * super[i];
    }
    std::vector<double> values = detail::tridiagonal_eigenvalues(std::move(td), std::move(te));
    values.resize(static_cast<std::size_t>(p), 0.0);
    std::sort(values.begin(), values.end());
    return {std::move(values)};
}

/// #{j : a <= lambda_j <= b}.
inline std::size_t count_in_interval(const EigenSpectrum& spec, double a, double b) {
    if (a > b) throw ValidationError("count_in_interval: need a <= b");
    const auto lo = std::lower_bound(spec.values.begin(), spec.values.end(), a);
    const auto hi = std::upper_bound(spec.values.begin(), spec.values.end(), b);
    return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

}  // namespace specsep

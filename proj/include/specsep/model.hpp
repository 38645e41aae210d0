#pragma once

// Observation model Y = B X with X an m x n matrix of i.i.d. standardized
// entries and B a deterministic p x m filter, Sigma = B B*. The sample
// covariance is S = (1/n) Y Y*.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "specsep/eigen_solver.hpp"
#include "specsep/errors.hpp"
#include "specsep/measure.hpp"

namespace specsep {

enum class FilterKind { identity, scaled_identity, explicit_sigma_sqrt, toeplitz_filter };

inline std::string to_string(FilterKind k) {
    switch (k) {
        case FilterKind::identity: return "identity";
        case FilterKind::scaled_identity: return "scaled_identity";
        case FilterKind::explicit_sigma_sqrt: return "explicit_sigma_sqrt";
        case FilterKind::toeplitz_filter: return "toeplitz_filter";
    }
    return "unknown";
}

/// Recipe for a p x m filter B.
struct FilterSpec {
    FilterKind kind = FilterKind::identity;
    std::size_t p = 0;
    double scale = 1.0;                 // scaled_identity
    ComplexMatrix sigma_sqrt;           // explicit_sigma_sqrt, p x p Hermitian
    std::vector<double> coefficients;   // toeplitz_filter, b_0..b_q

    static FilterSpec identity(std::size_t p) { return {FilterKind::identity, p, 1.0, {}, {}}; }
    static FilterSpec scaled_identity(std::size_t p, double s) { return {FilterKind::scaled_identity, p, s, {}, {}}; }
    static FilterSpec explicit_sigma_sqrt(ComplexMatrix root) {
        const auto p = static_cast<std::size_t>(root.rows());
        return {FilterKind::explicit_sigma_sqrt, p, 1.0, std::move(root), {}};
    }
    static FilterSpec explicit_sigma_sqrt(const RealMatrix& root) {
        return explicit_sigma_sqrt(ComplexMatrix(root.cast<std::complex<double>>()));
    }
    static FilterSpec toeplitz(std::size_t p, std::vector<double> b) {
        return {FilterKind::toeplitz_filter, p, 1.0, {}, std::move(b)};
    }

    /// Number of columns of B.
    std::size_t columns() const {
        return kind == FilterKind::toeplitz_filter ? p + coefficients.size() - 1 : p;
    }

    void validate() const {
        if (p < 1) throw ValidationError("FilterSpec: p must be >= 1");
        switch (kind) {
            case FilterKind::identity: break;
            case FilterKind::scaled_identity:
                if (!std::isfinite(scale) || scale == 0.0)
                    throw ValidationError("FilterSpec: scaled_identity needs a finite nonzero scale");
                break;
            case FilterKind::explicit_sigma_sqrt: {
                if (sigma_sqrt.rows() != sigma_sqrt.cols() || static_cast<std::size_t>(sigma_sqrt.rows()) != p)
                    throw ValidationError("FilterSpec: explicit_sigma_sqrt must be p x p");
                const double norm = sigma_sqrt.cwiseAbs().maxCoeff();
                const double asym = (sigma_sqrt - sigma_sqrt.adjoint()).cwiseAbs().maxCoeff();
                if (asym > 1e-12 * std::max(norm, 1.0))
                    throw ValidationError("FilterSpec: explicit_sigma_sqrt is not Hermitian");
                break;
            }
            case FilterKind::toeplitz_filter:
                if (coefficients.empty()) throw ValidationError("FilterSpec: toeplitz_filter needs coefficients");
                for (double b : coefficients)
                    if (!std::isfinite(b)) throw ValidationError("FilterSpec: non-finite filter coefficient");
                break;
        }
    }

    /// True when the implied Sigma is a multiple of the identity.
    bool is_scalar_covariance() const {
        return kind == FilterKind::identity || kind == FilterKind::scaled_identity;
    }

    /// Sigma = sigma2 * I for identity-type filters.
    double scalar_variance() const { return kind == FilterKind::scaled_identity ? scale * scale : 1.0; }
};

/// B for the given recipe. Toeplitz rows carry (b_0..b_q) at columns j..j+q.
inline ComplexMatrix build_filter(const FilterSpec& spec) {
    spec.validate();
    const auto p = static_cast<Eigen::Index>(spec.p);
    switch (spec.kind) {
        case FilterKind::identity: return ComplexMatrix::Identity(p, p);
        case FilterKind::scaled_identity: return spec.scale * ComplexMatrix::Identity(p, p);
        case FilterKind::explicit_sigma_sqrt: return spec.sigma_sqrt;
        case FilterKind::toeplitz_filter: {
            const auto q1 = static_cast<Eigen::Index>(spec.coefficients.size());
            ComplexMatrix B = ComplexMatrix::Zero(p, p + q1 - 1);
            for (Eigen::Index j = 0; j < p; ++j)
                for (Eigen::Index k = 0; k < q1; ++k) B(j, j + k) = spec.coefficients[static_cast<std::size_t>(k)];
            return B;
        }
    }
    throw ValidationError("build_filter: unknown filter kind");
}

/// Sigma implied by the recipe, computed without forming B. For a Toeplitz
/// filter, Sigma_{j+d, j} = sum_k b_k b_{k+d}.
inline ComplexMatrix implied_sigma(const FilterSpec& spec) {
    spec.validate();
    const auto p = static_cast<Eigen::Index>(spec.p);
    switch (spec.kind) {
        case FilterKind::identity: return ComplexMatrix::Identity(p, p);
        case FilterKind::scaled_identity: return spec.scale * spec.scale * ComplexMatrix::Identity(p, p);
        case FilterKind::explicit_sigma_sqrt: return spec.sigma_sqrt * spec.sigma_sqrt.adjoint();
        case FilterKind::toeplitz_filter: {
            const auto& b = spec.coefficients;
            ComplexMatrix S = ComplexMatrix::Zero(p, p);
            for (std::size_t d = 0; d < b.size() && static_cast<Eigen::Index>(d) < p; ++d) {
                double acf = 0.0;
                for (std::size_t k = 0; k + d < b.size(); ++k) acf += b[k] * b[k + d];
                for (Eigen::Index j = 0; j + static_cast<Eigen::Index>(d) < p; ++j) {
                    S(j + static_cast<Eigen::Index>(d), j) = acf;
                    S(j, j + static_cast<Eigen::Index>(d)) = acf;
                }
            }
            return S;
        }
    }
    throw ValidationError("implied_sigma: unknown filter kind");
}

inline bool is_real(const ComplexMatrix& M) { return M.imag().cwiseAbs().maxCoeff() == 0.0; }

/// Population spectrum H_n: eigenvalues of Sigma = B B* with weight 1/p each,
/// atoms closer than 1e-10 merged.
inline SpectralMeasure filter_spectrum(const FilterSpec& spec) {
    spec.validate();
    if (spec.is_scalar_covariance()) return SpectralMeasure::dirac(spec.scalar_variance());
    const ComplexMatrix B = build_filter(spec);
    EigenSpectrum eig;
    if (is_real(B)) {
        const RealMatrix Br = B.real();
        const RealMatrix sigma = Br * Br.transpose();
        eig = hermitian_eigenvalues<double>(sigma);
    } else {
        const ComplexMatrix sigma = B * B.adjoint();
        eig = hermitian_eigenvalues<std::complex<double>>(sigma);
    }
    return SpectralMeasure::from_values(eig.values, 1e-10);
}

enum class EntryKind { gaussian_real, gaussian_complex, rademacher, student_t };

inline std::string to_string(EntryKind k) {
    switch (k) {
        case EntryKind::gaussian_real: return "gaussian_real";
        case EntryKind::gaussian_complex: return "gaussian_complex";
        case EntryKind::rademacher: return "rademacher";
        case EntryKind::student_t: return "student_t";
    }
    return "unknown";
}

/// Law of the i.i.d. entries, standardized to mean 0 and variance 1.
struct EntryDistribution {
    EntryKind kind = EntryKind::gaussian_real;
    double dof = 8.0;             // student_t only
    double moment_margin = 1.0;   // delta in E|x|^{6+delta} < inf

    bool is_complex() const noexcept { return kind == EntryKind::gaussian_complex; }

    void validate() const {
        if (!(moment_margin > 0.0)) throw ValidationError("EntryDistribution: moment margin must be > 0");
        if (kind == EntryKind::student_t && !(dof > 6.0 + moment_margin)) {
            std::ostringstream msg;
            msg << "EntryDistribution: student_t needs dof > 6 + delta = " << 6.0 + moment_margin << ", got " << dof;
            throw ValidationError(msg.str());
        }
    }
};

/// Draws standardized entries from one seeded 64-bit stream.
class EntrySampler {
public:
    EntrySampler(EntryDistribution dist, std::uint64_t seed) : dist_(dist), engine_(seed) { dist_.validate(); }

    double real_draw() {
        switch (dist_.kind) {
            case EntryKind::gaussian_real: return normal_(engine_);
            case EntryKind::rademacher: return coin_(engine_) ? 1.0 : -1.0;
            case EntryKind::student_t: {
                std::student_t_distribution<double> t(dist_.dof);
                return t(engine_) * std::sqrt((dist_.dof - 2.0) / dist_.dof);
            }
            case EntryKind::gaussian_complex:
                throw ValidationError("EntrySampler: gaussian_complex entries need a complex matrix");
        }
        return 0.0;
    }

    std::complex<double> complex_draw() {
        if (dist_.kind != EntryKind::gaussian_complex) return {real_draw(), 0.0};
        const double re = normal_(engine_) * std::numbers::sqrt2 * 0.5;
        const double im = normal_(engine_) * std::numbers::sqrt2 * 0.5;
        return {re, im};
    }

    template <class Scalar>
    void fill(Matrix<Scalar>& X) {
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                if constexpr (is_complex<Scalar>::value) X(i, j) = complex_draw();
                else X(i, j) = real_draw();
            }
    }

private:
    EntryDistribution dist_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::bernoulli_distribution coin_{0.5};
};

/// m x n matrix of i.i.d. entries; identical seeds give identical matrices.
template <class Scalar>
Matrix<Scalar> sample_entries(std::size_t m, std::size_t n, const EntryDistribution& dist, std::uint64_t seed) {
    if (m < 1 || n < 1) throw DimensionError("sample_entries: dimensions must be positive");
    if (dist.is_complex() && !is_complex<Scalar>::value)
        throw ValidationError("sample_entries: gaussian_complex entries need a complex matrix");
    EntrySampler sampler(dist, seed);
    Matrix<Scalar> X(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    sampler.fill(X);
    return X;
}

/// S = (1/n) B X X* B*, symmetrized.
template <class Scalar>
Matrix<Scalar> form_sample_covariance(const Matrix<Scalar>& B, const Matrix<Scalar>& X, std::size_t n) {
    if (B.cols() != X.rows()) {
        std::ostringstream msg;
        msg << "form_sample_covariance: B is " << B.rows() << "x" << B.cols() << " but X is " << X.rows() << "x"
            << X.cols();
        throw DimensionError(msg.str());
    }
    if (n < 1) throw DimensionError("form_sample_covariance: n must be >= 1");
    const Matrix<Scalar> Y = B * X;
    Matrix<Scalar> S = Matrix<Scalar>::Zero(B.rows(), B.rows());
    S.template selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0 / static_cast<double>(n));
    S.template triangularView<Eigen::StrictlyUpper>() = S.adjoint();
    return S;
}

/// Full description of one ensemble.
struct ModelSpec {
    FilterSpec filter;
    std::size_t n = 0;
    EntryDistribution entry;
    std::uint64_t seed = 0;

    std::size_t p() const noexcept { return filter.p; }
    std::size_t m() const { return filter.columns(); }
    double aspect_ratio() const { return static_cast<double>(filter.p) / static_cast<double>(n); }

    void validate() const {
        filter.validate();
        entry.validate();
        if (filter.p < 2 || n < 2) throw ValidationError("ModelSpec: need p, n >= 2");
    }
};

namespace detail {

/// Half bandwidth of M: the largest |i - j| with M_ij != 0.
template <class Scalar>
Eigen::Index half_bandwidth(const Matrix<Scalar>& M) {
    Eigen::Index bw = 0;
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            if (M(i, j) != Scalar(0)) bw = std::max(bw, i > j ? i - j : j - i);
    return bw;
}

/// Deviations for trials first..first+count-1; trial t draws its vector from
/// the stream seeded with seed + t, so any split into chunks gives the same
/// values. A banded M (Toeplitz filters, identities) is applied band by band
/// instead of through a dense product.
template <class Scalar>
std::vector<double> quadratic_form_deviation_impl(const Matrix<Scalar>& M, Eigen::Index bandwidth, double target,
                                                  const EntryDistribution& dist, std::size_t first,
                                                  std::size_t count, std::uint64_t seed) {
    constexpr std::size_t kBlock = 256;
    const Eigen::Index dim = M.cols();
    const bool banded = 4 * (2 * bandwidth + 1) < dim;
    std::vector<double> out;
    out.reserve(count);
    Matrix<Scalar> X;
    while (out.size() < count) {
        const std::size_t cols = std::min(kBlock, count - out.size());
        X.resize(dim, static_cast<Eigen::Index>(cols));
        for (std::size_t j = 0; j < cols; ++j) {
            EntrySampler sampler(dist, seed + first + out.size() + j);
            Matrix<Scalar> col(dim, 1);
            sampler.fill(col);
            X.col(static_cast<Eigen::Index>(j)) = col;
        }
        if (banded) {
            Matrix<Scalar> MX = Matrix<Scalar>::Zero(dim, X.cols());
            for (Eigen::Index d = -bandwidth; d <= bandwidth; ++d) {
                const Eigen::Index len = dim - (d < 0 ? -d : d);
                const Eigen::Index r0 = d < 0 ? -d : 0;  // row offset: M(r0 + i, c0 + i)
                const Eigen::Index c0 = d > 0 ? d : 0;
                const Vector<Scalar> band = M.diagonal(d);
                MX.middleRows(r0, len).array() +=
                    X.middleRows(c0, len).array().colwise() * band.array();
            }
            for (Eigen::Index j = 0; j < X.cols(); ++j)
                out.push_back(std::abs(std::real(X.col(j).dot(MX.col(j))) - target));
        } else {
            const Matrix<Scalar> MX = M * X;
            for (Eigen::Index j = 0; j < X.cols(); ++j)
                out.push_back(std::abs(std::real(X.col(j).dot(MX.col(j))) - target));
        }
    }
    return out;
}

}  // namespace detail

/// Precomputed x -> |x* B* A B x - tr(A Sigma)| for a fixed pair (B, A).
class QuadraticFormProbe {
public:
    QuadraticFormProbe(const ComplexMatrix& B, const ComplexMatrix& A, EntryDistribution dist)
        : dist_(dist) {
        if (A.rows() != A.cols() || A.rows() != B.rows())
            throw DimensionError("quadratic_form_deviation: A must be p x p with p = B.rows()");
        dist_.validate();
        real_ = is_real(B) && is_real(A) && !dist_.is_complex();
        // tr(A Sigma) = tr(B* A B). B is usually sparse (identity, banded).
        if (real_) {
            real_form_ = form_of<double>(B.real(), A.real());
            bandwidth_ = detail::half_bandwidth(real_form_);
            target_ = real_form_.trace();
        } else {
            complex_form_ = form_of<std::complex<double>>(B, A);
            bandwidth_ = detail::half_bandwidth(complex_form_);
            target_ = std::real(complex_form_.trace());
        }
    }

    /// Exact E|x* M x - tr M|^2 with M = B* A B:
    /// (mu4 - 3) sum M_ii^2 + 2 ||Re M||_F^2 for real entries with fourth
    /// moment mu4, ||M||_F^2 for circular complex Gaussian entries. Infinite
    /// when mu4 is.
    double exact_second_moment() const {
        if (dist_.is_complex()) return complex_form_.squaredNorm();
        double mu4 = 3.0;
        if (dist_.kind == EntryKind::rademacher) mu4 = 1.0;
        if (dist_.kind == EntryKind::student_t) {
            if (!(dist_.dof > 4.0)) return std::numeric_limits<double>::infinity();
            mu4 = 3.0 * (dist_.dof - 2.0) / (dist_.dof - 4.0);
        }
        const double diag = real_ ? real_form_.diagonal().squaredNorm() : complex_form_.diagonal().real().squaredNorm();
        const double frob = real_ ? real_form_.squaredNorm() : complex_form_.real().squaredNorm();
        return (mu4 - 3.0) * diag + 2.0 * frob;
    }

    /// Length of the random vector x.
    Eigen::Index vector_length() const noexcept { return real_ ? real_form_.cols() : complex_form_.cols(); }

    /// Deviations of trials first..first+count-1 (trial t uses seed + t).
    std::vector<double> deviations(std::size_t first, std::size_t count, std::uint64_t seed) const {
        if (real_)
            return detail::quadratic_form_deviation_impl<double>(real_form_, bandwidth_, target_, dist_, first, count,
                                                                 seed);
        return detail::quadratic_form_deviation_impl<std::complex<double>>(complex_form_, bandwidth_, target_, dist_,
                                                                           first, count, seed);
    }

    double target() const noexcept { return target_; }

private:
    template <class Scalar>
    static Matrix<Scalar> form_of(const Matrix<Scalar>& B, const Matrix<Scalar>& A) {
        const Eigen::SparseMatrix<Scalar> Bs = B.sparseView();
        const Matrix<Scalar> AB = A * Bs;
        return Matrix<Scalar>(Bs.adjoint() * AB);
    }

    EntryDistribution dist_;
    double target_ = 0.0;
    bool real_ = false;
    Eigen::Index bandwidth_ = 0;
    RealMatrix real_form_;
    ComplexMatrix complex_form_;
};

/// Samples of |x* B* A B x - tr(A Sigma)| for `trials` independent x; trial
/// t draws x from the stream seeded with seed + t.
inline std::vector<double> quadratic_form_deviation(const ComplexMatrix& B, const ComplexMatrix& A,
                                                    const EntryDistribution& dist, std::size_t trials,
                                                    std::uint64_t seed) {
    return QuadraticFormProbe(B, A, dist).deviations(0, trials, seed);
}

}  // namespace specsep

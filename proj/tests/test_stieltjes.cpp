#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "specsep/eigen_solver.hpp"
#include "specsep/model.hpp"
#include "specsep/stieltjes.hpp"

using namespace specsep;
using namespace std::complex_literals;

namespace {

const SpectralMeasure kTwoAtoms({{1.0, 0.5}, {4.0, 0.5}});

std::vector<UpperHalfPoint> z_grid() {
    std::vector<UpperHalfPoint> out;
    for (int i = 0; i < 20; ++i) {
        const double u = -5.0 + 20.0 * i / 19.0;
        for (int j = 0; j < 20; ++j) {
            const double v = std::pow(10.0, -3.0 + 4.0 * j / 19.0);
            out.emplace_back(u, v);
        }
    }
    return out;
}

}  // namespace

TEST(CompanionValueMap, HandExamples) {
    const Complex z = companion_value_map(Complex{0.0, 1.0}, AspectRatio(1.0), SpectralMeasure::dirac(1.0));
    EXPECT_NEAR(z.real(), 0.5, 1e-15);
    EXPECT_NEAR(z.imag(), 0.5, 1e-15);

    // Lower Marchenko-Pastur edge (1 - sqrt c)^2 at c = 0.25.
    const double x = companion_value_map(-2.0, AspectRatio(0.25), SpectralMeasure::dirac(1.0));
    EXPECT_NEAR(x, 0.25, 1e-15);
    EXPECT_NEAR(x, std::pow(1.0 - std::sqrt(0.25), 2), 1e-15);
}

TEST(CompanionValueMap, BlowsUpNearZero) {
    const auto H = kTwoAtoms;
    double previous = 0.0;
    for (double s : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const double size = std::abs(companion_value_map(Complex{0.0, s}, AspectRatio(0.3), H));
        EXPECT_GT(size, previous);
        EXPECT_GT(size, 0.5 / s);
        previous = size;
    }
}

TEST(CompanionValueMap, PoleErrors) {
    EXPECT_THROW(companion_value_map(Complex{0.0, 0.0}, AspectRatio(0.5), kTwoAtoms), PoleError);
    EXPECT_THROW(companion_value_map(Complex{-0.25, 0.0}, AspectRatio(0.5), kTwoAtoms), PoleError);
    EXPECT_THROW(companion_value_map(-1.0, AspectRatio(0.5), kTwoAtoms), PoleError);
    EXPECT_NO_THROW(companion_value_map(-1.0 + 1e-9, AspectRatio(0.5), kTwoAtoms));
}

TEST(SolveCompanion, LargeArgumentAsymptote) {
    const UpperHalfPoint z(0.0, 1e6);
    const auto pair = solve_companion(z, AspectRatio(0.5), SpectralMeasure::dirac(1.0));
    const Complex expected = -1.0 / z.value();
    EXPECT_LT(std::abs(pair.m_companion - expected) / std::abs(expected), 1e-5);
}

TEST(SolveCompanion, MatchesClosedFormForIdentityPopulation) {
    const UpperHalfPoint z(1.0, 0.5);
    const auto pair = solve_companion(z, AspectRatio(0.5), SpectralMeasure::dirac(1.0));
    const Complex closed = mp_closed_form(z, AspectRatio(0.5));
    EXPECT_LT(std::abs(pair.m_companion - closed), 1e-9);
    EXPECT_LT(std::abs(pair.m_companion - oracle::mp_companion_long(z.value(), 0.5)), 1e-9);
}

TEST(SolveCompanion, MatchesMultiStartNewtonOracle) {
    const UpperHalfPoint z(2.0, 0.1);
    const auto [expected, count] = oracle::companion_multistart(z.value(), 0.3, {{1.0, 0.5}, {4.0, 0.5}});
    ASSERT_EQ(count, 1) << "oracle must find exactly one root in C+";
    const auto pair = solve_companion(z, AspectRatio(0.3), kTwoAtoms);
    EXPECT_LT(std::abs(pair.m_companion - expected), 1e-9);
}

TEST(SolveCompanion, WarmStartGivesSameRoot) {
    const UpperHalfPoint z(2.5, 1e-6);
    const auto cold = solve_companion(z, AspectRatio(0.3), kTwoAtoms);
    const auto warm = solve_companion(z, AspectRatio(0.3), kTwoAtoms, {}, Complex{-0.3, 0.2});
    EXPECT_LT(std::abs(cold.m_companion - warm.m_companion), 1e-9);
}

TEST(SolveCompanion, ReportsNonConvergence) {
    SolverOptions opts;
    opts.tol = 1e-300;
    opts.max_iters = 5;
    try {
        solve_companion(UpperHalfPoint(1.0, 1e-3), AspectRatio(0.5), kTwoAtoms, opts);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_GE(e.last_residual(), 0.0);
    }
}

TEST(SolveCompanion, RejectsInvalidOptions) {
    SolverOptions opts;
    opts.damping = 0.0;
    EXPECT_THROW(solve_companion(UpperHalfPoint(1.0, 1.0), AspectRatio(0.5), kTwoAtoms, opts), ValidationError);
}

// Fixed-point consistency, companion coupling, Herglotz and closed-form
// equivalence over the 20 x 20 grid.
TEST(SolveCompanion, GridProperties) {
    const SolverOptions opts;
    for (double c : {0.25, 0.5, 1.0, 2.0}) {
        for (const auto& H : {SpectralMeasure::dirac(1.0), kTwoAtoms}) {
            for (const auto& z : z_grid()) {
                const auto pair = solve_companion(z, AspectRatio(c), H, opts);
                EXPECT_LT(pair.residual, opts.tol) << "z=" << z.value() << " c=" << c;
                EXPECT_GT(pair.m.imag(), 0.0) << "z=" << z.value() << " c=" << c;
                EXPECT_GT(pair.m_companion.imag(), 0.0) << "z=" << z.value() << " c=" << c;
                const Complex coupled = -(1.0 - c) / z.value() + c * pair.m;
                EXPECT_LT(std::abs(coupled - pair.m_companion), 1e-10);
                if (H.size() == 1) {
                    EXPECT_LT(std::abs(pair.m_companion - mp_closed_form(z, AspectRatio(c))), 1e-9)
                        << "z=" << z.value() << " c=" << c;
                }
            }
        }
    }
}

TEST(SolveCompanion, ImaginaryAxisAsymptotics) {
    for (double v : {1e3, 1e6}) {
        const UpperHalfPoint z(0.0, v);
        const auto pair = solve_companion(z, AspectRatio(0.3), kTwoAtoms);
        const double gap = std::abs(pair.m_companion * z.value() + 1.0);
        EXPECT_LT(gap, 10.0 / v) << "v=" << v;
    }
}

TEST(MpClosedForm, Examples) {
    const Complex far = mp_closed_form(UpperHalfPoint(0.0, 1e6), AspectRatio(1.0));
    EXPECT_NEAR(far.real(), 0.0, 1e-11);
    EXPECT_NEAR(far.imag(), 1e-6, 1e-11);

    // Outside the support [0.25, 2.25] the density vanishes.
    const Complex outside = mp_closed_form(UpperHalfPoint(4.0, 1e-8), AspectRatio(0.25));
    EXPECT_LT(outside.imag(), 1e-3);
    EXPECT_GT(outside.imag(), 0.0);

    const UpperHalfPoint z(1.0, 0.5);
    const Complex value = mp_closed_form(z, AspectRatio(0.5));
    const Complex reference = oracle::mp_companion_long(z.value(), 0.5);
    EXPECT_LT(std::abs(value - reference), 1e-14);
    EXPECT_GT(value.imag(), 0.0);
}

TEST(DensityAt, FarOutsideSupport) {
    EXPECT_LT(density_at(10.0, AspectRatio(0.25), SpectralMeasure::dirac(1.0)), 1e-4);
}

TEST(DensityAt, MatchesMarchenkoPasturDensity) {
    const double expected = oracle::mp_density(2.0, 1.0);
    EXPECT_NEAR(expected, 1.0 / (2.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(density_at(2.0, AspectRatio(1.0), SpectralMeasure::dirac(1.0)), expected, 1e-3);
    for (double c : {0.25, 0.5, 0.9}) {
        for (double x : {0.4, 0.8, 1.2, 1.6, 2.0}) {
            const double ref = oracle::mp_density(x, c);
            if (ref == 0.0) continue;
            EXPECT_NEAR(density_at(x, AspectRatio(c), SpectralMeasure::dirac(1.0)), ref, 1e-3)
                << "x=" << x << " c=" << c;
        }
    }
}

TEST(DensityAt, RejectsNonPositiveArgument) {
    EXPECT_THROW(density_at(0.0, AspectRatio(0.5), kTwoAtoms), ValidationError);
    EXPECT_THROW(density_at(-1.0, AspectRatio(0.5), kTwoAtoms), ValidationError);
}

TEST(DensityAt, MatchesSimulatedHistogram) {
    constexpr std::size_t p = 1500;
    constexpr std::size_t n = 5000;
    RealMatrix root = RealMatrix::Identity(p, p);
    for (std::size_t i = p / 2; i < p; ++i) root(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 2.0;
    const auto X = sample_entries<double>(p, n, EntryDistribution{}, 2024);
    const auto S = form_sample_covariance<double>(root, X, n);
    const auto eig = hermitian_eigenvalues<double>(S);
    const double width = 0.05;
    const double x = 2.5;
    const auto count = count_in_interval(eig, x - width / 2, x + width / 2);
    const double histogram = static_cast<double>(count) / (static_cast<double>(p) * width);
    EXPECT_NEAR(density_at(x, AspectRatio::of(p, n), kTwoAtoms), histogram, 0.02);
}

TEST(EsdStieltjes, SmallExamples) {
    const std::vector<double> one{5.0};
    const Complex a = esd_stieltjes(one, UpperHalfPoint(0.0, 1.0));
    EXPECT_NEAR(a.real(), 5.0 / 26.0, 1e-15);
    EXPECT_NEAR(a.imag(), 1.0 / 26.0, 1e-15);

    const std::vector<double> four{1.0, 1.0, 1.0, 1.0};
    const Complex b = esd_stieltjes(four, UpperHalfPoint(0.0, 2.0));
    EXPECT_NEAR(b.real(), 0.2, 1e-15);
    EXPECT_NEAR(b.imag(), 0.4, 1e-15);

    EXPECT_THROW(esd_stieltjes(std::vector<double>{}, UpperHalfPoint(0.0, 1.0)), ValidationError);
}

TEST(EsdStieltjes, ApproachesLimitAtFiniteSize) {
    constexpr std::size_t p = 400;
    constexpr std::size_t n = 800;
    const RealMatrix B = RealMatrix::Identity(p, p);
    const auto X = sample_entries<double>(p, n, EntryDistribution{}, 99);
    const auto eig = hermitian_eigenvalues<double>(form_sample_covariance<double>(B, X, n));
    const UpperHalfPoint z(1.0, 1.0);
    const Complex empirical = esd_stieltjes(eig.values, z);
    EXPECT_GT(empirical.imag(), 0.0);
    const auto pair = solve_companion(z, AspectRatio(0.5), SpectralMeasure::dirac(1.0));
    EXPECT_LT(std::abs(empirical - pair.m), 0.05);
}

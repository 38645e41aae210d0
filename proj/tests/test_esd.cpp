#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "specsep/esd.hpp"
#include "specsep/model.hpp"

using namespace specsep;

namespace {

EigenSpectrum simulate_identity(std::size_t p, std::size_t n, std::uint64_t seed) {
    const RealMatrix B = RealMatrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    const auto X = sample_entries<double>(p, n, EntryDistribution{}, seed);
    return hermitian_eigenvalues<double>(form_sample_covariance<double>(B, X, n));
}

}  // namespace

TEST(EmpiricalCDF, StepFunction) {
    const std::vector<double> v{3.0, 1.0, 2.0, 2.0};
    const EmpiricalCDF F(v);
    EXPECT_EQ(F(0.5), 0.0);
    EXPECT_EQ(F(1.0), 0.25);
    EXPECT_EQ(F(1.5), 0.25);
    EXPECT_EQ(F(2.0), 0.75);
    EXPECT_EQ(F(3.0), 1.0);
    EXPECT_EQ(F(10.0), 1.0);
    ASSERT_EQ(F.jumps().size(), 3u);
    EXPECT_EQ(F.before_jump(1), 0.25);
    EXPECT_THROW(EmpiricalCDF(std::vector<double>{}), ValidationError);
}

TEST(LimitCDF, MatchesMarchenkoPasturIntegral) {
    const double c = 0.5;
    const LimitCDF F(AspectRatio(c), SpectralMeasure::dirac(1.0));
    // Independent quadrature of the closed-form density on a fine midpoint grid.
    const double a = std::pow(1.0 - std::sqrt(c), 2);
    for (double x : {0.3, 0.8, 1.5, 2.5}) {
        const int cells = 200000;
        double acc = 0.0;
        for (int i = 0; i < cells; ++i) {
            const double t = a + (x - a) * (i + 0.5) / cells;
            acc += oracle::mp_density(t, c) * (x - a) / cells;
        }
        EXPECT_NEAR(F(x), acc, 2e-4) << "x=" << x;
    }
    EXPECT_EQ(F(-1.0), 0.0);
    EXPECT_NEAR(F(100.0), 1.0, 1e-3);
}

TEST(LimitCDF, NormalizationIncludingZeroAtom) {
    struct Case {
        double c;
        SpectralMeasure H;
    };
    const std::vector<Case> cases{
        {0.1, SpectralMeasure::dirac(1.0)},  {0.25, SpectralMeasure::dirac(1.0)},
        {0.5, SpectralMeasure::dirac(1.0)},  {0.9, SpectralMeasure::dirac(1.0)},
        {1.0, SpectralMeasure::dirac(1.0)},  {2.0, SpectralMeasure::dirac(1.0)},
        {0.05, SpectralMeasure({{1.0, 0.5}, {10.0, 0.5}})}, {0.3, SpectralMeasure({{1.0, 0.5}, {4.0, 0.5}})},
    };
    for (const auto& cs : cases) {
        const LimitCDF F(AspectRatio(cs.c), cs.H);
        EXPECT_NEAR(F.total_mass(), 1.0, 1e-3) << "c=" << cs.c;
        EXPECT_DOUBLE_EQ(F.zero_atom(), std::max(0.0, 1.0 - 1.0 / cs.c));
    }
}

TEST(KsDistance, SelfDistanceOfQuantiles) {
    for (double c : {0.5, 2.0}) {
        const LimitCDF F(AspectRatio(c), SpectralMeasure({{1.0, 0.5}, {4.0, 0.5}}));
        std::vector<double> q;
        for (int i = 0; i < 1000; ++i) q.push_back(F.quantile((i + 0.5) / 1000.0));
        const double d = ks_distance(EmpiricalCDF(q), F);
        EXPECT_LE(d, 1.0 / 1000.0 + 1e-3) << "c=" << c;
    }
}

TEST(KsDistance, SmallAtModerateSize) {
    const LimitCDF F(AspectRatio(0.5), SpectralMeasure::dirac(1.0));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const double d = ks_distance(EmpiricalCDF(simulate_identity(400, 800, seed)), F);
        EXPECT_LT(d, 0.05) << "seed " << seed;
    }
}

TEST(KsDistance, ShrinksWithDimension) {
    const LimitCDF F(AspectRatio(0.5), SpectralMeasure::dirac(1.0));
    int improved = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const double small = ks_distance(EmpiricalCDF(simulate_identity(50, 100, seed)), F);
        const double large = ks_distance(EmpiricalCDF(simulate_identity(400, 800, seed)), F);
        if (large < small) ++improved;
    }
    EXPECT_GE(improved, 18);
}

TEST(KsDistance, HandlesZeroEigenvaluesWhenDimensionExceedsSamples) {
    const std::size_t p = 200;
    const std::size_t n = 100;
    const LimitCDF F(AspectRatio::of(p, n), SpectralMeasure::dirac(1.0));
    const double d = ks_distance(EmpiricalCDF(simulate_identity(p, n, 3)), F);
    EXPECT_LT(d, 0.05);
}

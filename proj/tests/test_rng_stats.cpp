#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "fbmdim/rng.hpp"
#include "fbmdim/stats.hpp"

using namespace fbmdim;

TEST(CounterRng, SameSeedSameStream) {
    CounterRng a(42);
    CounterRng b(42);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a(), b());
    }
}

TEST(CounterRng, DifferentSeedsDiffer) {
    CounterRng a(1);
    CounterRng b(2);
    int equal = 0;
    for (int i = 0; i < 1000; ++i) {
        equal += a() == b() ? 1 : 0;
    }
    EXPECT_EQ(equal, 0);
}

TEST(CounterRng, SplitStreamsAreDistinctAndReproducible) {
    const CounterRng root(7);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t s = 0; s < 256; ++s) {
        CounterRng child = root.split(s);
        CounterRng again = root.split(s);
        const auto v = child();
        EXPECT_EQ(v, again());
        firsts.insert(v);
    }
    EXPECT_EQ(firsts.size(), 256U);
}

TEST(CounterRng, SplitDoesNotAdvanceParent) {
    CounterRng a(9);
    CounterRng b(9);
    (void)a.split(3);
    EXPECT_EQ(a(), b());
}

TEST(CounterRng, UniformInOpenInterval) {
    CounterRng rng(3);
    double sum = 0.0;
    constexpr int kDraws = 200000;
    for (int i = 0; i < kDraws; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    // mean 1/2, sd of the mean sqrt(1/12 / n)
    EXPECT_NEAR(sum / kDraws, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / kDraws));
}

TEST(CounterRng, NormalMoments) {
    CounterRng rng(11);
    stats::RunningMoments m;
    std::vector<double> xs;
    for (int i = 0; i < 100000; ++i) {
        const double x = rng.normal();
        m.add(x);
        xs.push_back(x);
    }
    EXPECT_NEAR(m.mean(), 0.0, 5.0 / std::sqrt(100000.0));
    EXPECT_NEAR(m.variance(), 1.0, 5.0 * std::sqrt(2.0 / 100000.0));
    EXPECT_GT(stats::ks_test_standard_normal(xs).p_value, 0.001);
}

TEST(CounterRng, WorksWithStdDistributions) {
    CounterRng rng(5);
    std::uniform_int_distribution<int> die(1, 6);
    for (int i = 0; i < 100; ++i) {
        const int v = die(rng);
        EXPECT_GE(v, 1);
        EXPECT_LE(v, 6);
    }
}

TEST(Mix64, IsInjectiveOnSample) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        seen.insert(mix64(i));
    }
    EXPECT_EQ(seen.size(), 10000U);
}

TEST(LinearFit, ExactLine) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{3, 5, 7, 9, 11};
    const auto fit = stats::linear_fit(x, y);
    EXPECT_NEAR(fit.slope, 2.0, 1e-12);
    EXPECT_NEAR(fit.intercept, 1.0, 1e-12);
    EXPECT_NEAR(fit.slope_stderr, 0.0, 1e-12);
    EXPECT_EQ(fit.points, 5U);
}

TEST(LinearFit, StandardErrorMatchesTextbookFormula) {
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{0.1, 0.9, 2.2, 2.8};
    const auto fit = stats::linear_fit(x, y);
    // by hand: xbar = 1.5, Sxx = 5, slope = Sxy / Sxx
    const double sxy = (-1.5 * 0.1) + (-0.5 * 0.9) + (0.5 * 2.2) + (1.5 * 2.8);
    const double slope = sxy / 5.0;
    const double intercept = 1.5 - slope * 1.5;
    double sse = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double r = y[static_cast<std::size_t>(i)] - intercept - slope * i;
        sse += r * r;
    }
    EXPECT_NEAR(fit.slope, slope, 1e-12);
    EXPECT_NEAR(fit.slope_stderr, std::sqrt(sse / 2.0 / 5.0), 1e-12);
}

TEST(LinearFit, RejectsDegenerateInput) {
    const std::vector<double> one{1.0};
    EXPECT_THROW(stats::linear_fit(one, one), std::invalid_argument);
    const std::vector<double> x{2.0, 2.0, 2.0};
    const std::vector<double> y{1.0, 2.0, 3.0};
    EXPECT_THROW(stats::linear_fit(x, y), std::invalid_argument);
}

TEST(RunningMoments, MergeIsOrderIndependent) {
    CounterRng rng(17);
    std::vector<double> xs;
    for (int i = 0; i < 999; ++i) {
        xs.push_back(rng.normal() * 3.0 + 1.0);
    }
    stats::RunningMoments all;
    stats::RunningMoments a;
    stats::RunningMoments b;
    stats::RunningMoments c;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.add(xs[i]);
        (i % 3 == 0 ? a : i % 3 == 1 ? b : c).add(xs[i]);
    }
    stats::RunningMoments ab = a;
    ab.merge(b);
    ab.merge(c);
    stats::RunningMoments cb = c;
    cb.merge(b);
    cb.merge(a);
    EXPECT_EQ(ab.count(), all.count());
    EXPECT_NEAR(ab.mean(), all.mean(), 1e-12);
    EXPECT_NEAR(ab.variance(), all.variance(), 1e-10);
    EXPECT_NEAR(cb.mean(), ab.mean(), 1e-12);
    EXPECT_NEAR(cb.variance(), ab.variance(), 1e-10);
}

TEST(Summary, MatchesDirectComputation) {
    const std::vector<double> v{1, 2, 3, 4};
    const auto s = stats::summarize(v);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-12);
    EXPECT_NEAR(s.stderr_mean, std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
}

TEST(NormalCdf, KnownValues) {
    EXPECT_NEAR(stats::normal_cdf(0.0), 0.5, 1e-15);
    EXPECT_NEAR(stats::normal_cdf(1.959963984540054), 0.975, 1e-12);
    EXPECT_NEAR(stats::normal_cdf(-1.0), 0.15865525393145707, 1e-12);
}

TEST(KsTest, RejectsShiftedSample) {
    CounterRng rng(23);
    std::vector<double> xs;
    for (int i = 0; i < 5000; ++i) {
        xs.push_back(rng.normal() + 0.2);
    }
    EXPECT_LT(stats::ks_test_standard_normal(xs).p_value, 1e-6);
}

TEST(Quantile, LinearInterpolation) {
    const std::vector<double> v{4, 1, 3, 2, 5};
    EXPECT_DOUBLE_EQ(stats::quantile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(stats::quantile(v, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(stats::quantile(v, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(stats::quantile(v, 0.125), 1.5);
}

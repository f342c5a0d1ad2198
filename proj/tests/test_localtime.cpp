#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "fbmdim/fbm.hpp"
#include "fbmdim/localtime.hpp"
#include "fbmdim/sojourn.hpp"
#include "fbmdim/stats.hpp"

using namespace fbmdim;

namespace {

FbmPath linear_path(int n, int r) {
    std::vector<double> samples((std::size_t{1} << (n + r)) + 1);
    for (std::size_t j = 0; j < samples.size(); ++j) {
        samples[j] = std::ldexp(static_cast<double>(j), -r);
    }
    return FbmPath(HurstIndex(0.5), n, r, std::move(samples));
}

double oracle_increment(double x, double s, double t, double h) {
    auto f = [&](double u) { return std::exp(-x * x / (2.0 * std::pow(u, 2.0 * h))) / std::pow(u, h); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, s, t, 15, 1e-14) /
           std::sqrt(2.0 * std::numbers::pi);
}

} // namespace

TEST(Occupation, LinearPathHasUnitDensity) {
    const auto path = linear_path(3, 4);
    const double bw = 0.25;
    const auto grid = occupation_localtime(path, {1.5, 3.0, 20.0}, {1.0, 8.0}, bw);
    ASSERT_EQ(grid.values().size(), 6u);
    // 2 bw / Delta + 1 samples fall in the closed window.
    const double expected = 1.0 + path.delta() / (2.0 * bw);
    EXPECT_DOUBLE_EQ(grid.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(grid.at(0, 1), expected);
    EXPECT_DOUBLE_EQ(grid.at(1, 1), expected);
    EXPECT_DOUBLE_EQ(grid.at(2, 1), 0.0);
    EXPECT_DOUBLE_EQ(grid.bandwidth(), bw);
}

TEST(Occupation, MassIsConservedAcrossTilingLevels) {
    const auto path = synthesize_path(HurstIndex(0.43), 8, 3, 21);
    const auto [lo, hi] = std::minmax_element(path.samples().begin(), path.samples().end());
    const double bw = 0.05;
    std::vector<double> levels;
    // Offset so that no sample (B_0 = 0 in particular) sits on a tile boundary.
    for (double x = *lo - 0.37 * bw; x <= *hi + 2.0 * bw; x += 2.0 * bw) {
        levels.push_back(x);
    }
    const std::vector<double> checkpoints{0.0, 10.0, 100.0, 256.0};
    const auto grid = occupation_localtime(path, levels, checkpoints, bw);
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
        double mass = 0.0;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            mass += grid.at(i, k) * 2.0 * bw;
            if (k > 0) {
                EXPECT_GE(grid.at(i, k), grid.at(i, k - 1));
            }
        }
        const double samples = std::floor(checkpoints[k] / path.delta()) + 1.0;
        EXPECT_NEAR(mass, samples * path.delta(), 1e-9);
    }
}

TEST(Occupation, RejectsBadArguments) {
    const auto path = linear_path(2, 1);
    EXPECT_THROW(occupation_localtime(path, {}, {1.0}, 0.1), std::invalid_argument);
    EXPECT_THROW(occupation_localtime(path, {0.0}, {1.0}, 0.0), std::invalid_argument);
    EXPECT_THROW(occupation_localtime(path, {1.0, 0.0}, {1.0}, 0.1), std::invalid_argument);
    EXPECT_THROW(occupation_localtime(path, {0.0}, {5.0}, 0.1), std::invalid_argument);
}

TEST(Occupation, BrownianMeanLocalTimeAtZero) {
    // E L^0_1 = (2 pi)^(-1/2) int_0^1 u^(-1/2) du = 2 / sqrt(2 pi).
    const PathSynthesizer synth(HurstIndex(0.5), 1, 12);
    std::vector<double> values;
    for (std::uint64_t s = 0; s < 600; ++s) {
        values.push_back(occupation_localtime(synth(s), {0.0}, {1.0}, 0.02).at(0, 0));
    }
    const auto summary = stats::summarize(values);
    EXPECT_NEAR(summary.mean, 2.0 / std::sqrt(2.0 * std::numbers::pi), 5.0 * summary.stderr_mean);
}

TEST(ExpectedIncrement, ClosedFormAtTheOrigin) {
    const double closed = (1.0 - std::sqrt(0.5)) / (0.5 * std::sqrt(2.0 * std::numbers::pi));
    EXPECT_NEAR(closed, 0.233695, 1e-6);
    EXPECT_NEAR(expected_localtime_increment(0.0, 0.5, 1.0, HurstIndex(0.5)), closed, 1e-12);
}

TEST(ExpectedIncrement, MatchesIndependentQuadrature) {
    for (double h : {0.2, 0.43, 0.8}) {
        for (double x : {0.0, 0.7, -2.0}) {
            EXPECT_NEAR(expected_localtime_increment(x, 0.5, 1.0, HurstIndex(h)), oracle_increment(x, 0.5, 1.0, h),
                        1e-11);
            EXPECT_NEAR(expected_localtime_increment(x, 0.01, 3.0, HurstIndex(h)), oracle_increment(x, 0.01, 3.0, h),
                        1e-11);
        }
    }
}

TEST(ExpectedIncrement, VanishesFarAwayAndValidates) {
    EXPECT_LT(expected_localtime_increment(40.0, 0.5, 1.0, HurstIndex(0.43)), 1e-300);
    EXPECT_THROW(expected_localtime_increment(0.0, 0.0, 1.0, HurstIndex(0.5)), std::invalid_argument);
    EXPECT_THROW(expected_localtime_increment(0.0, 1.0, 1.0, HurstIndex(0.5)), std::invalid_argument);
}

TEST(LevelSet, CrossingCellsExample) {
    const std::vector<double> samples{0.0, 1.0, -1.0, 2.0};
    EXPECT_EQ(level_crossing_cells(samples, 0, 0.0, 0.0), (std::vector<std::int64_t>{0, 1, 2}));
    EXPECT_TRUE(level_crossing_cells(samples, 0, 5.0, 0.0).empty());
    EXPECT_EQ(level_crossing_cells(samples, 1, 0.0, 0.0), (std::vector<std::int64_t>{0, 1}));
    EXPECT_EQ(level_crossing_cells(samples, 0, 2.0, 0.0), (std::vector<std::int64_t>{3}));
    EXPECT_EQ(level_crossing_cells(samples, 0, 1.5, 0.6), (std::vector<std::int64_t>{1, 2, 3}));
}

TEST(LevelSet, ExtractBinsCellsPerAnnulus) {
    const auto path = synthesize_path(HurstIndex(0.43), 10, 2, 4);
    const auto record = level_set_extract(path, 0.0);
    ASSERT_EQ(record.annuli.size(), 11u);
    EXPECT_EQ(record.annulus(0).n(), 0);
    EXPECT_FALSE(record.annulus(0).empty()); // B_0 = 0
    const auto all = level_crossing_cells(path.samples(), 2, 0.0, 0.0);
    std::size_t total = 0;
    for (const auto& a : record.annuli) {
        total += a.size();
    }
    const auto inside = std::count_if(all.begin(), all.end(), [](std::int64_t c) { return c < 1024; });
    EXPECT_EQ(total, static_cast<std::size_t>(inside));
}

TEST(LevelSet, ZeroLevelSetSitsInsideTheSojournSet) {
    const auto path = synthesize_path(HurstIndex(0.43), 14, 2, 12);
    const GammaExponent gamma(0.22, path.hurst());
    const auto sojourn = extract_sojourn(path, gamma);
    const auto level = level_set_extract(path, 0.0);
    const auto samples = path.samples();
    std::size_t checked = 0;
    for (int n = 1; n <= 14; ++n) {
        const auto& occupied = sojourn.annulus(n).occupied_cells;
        for (std::int64_t c : level.annulus(n).cells()) {
            ++checked;
            if (std::binary_search(occupied.begin(), occupied.end(), c)) {
                continue;
            }
            // Only a sign change jumping over the whole envelope can escape.
            bool jump = false;
            for (std::size_t j = static_cast<std::size_t>(c) * 4; j < static_cast<std::size_t>(c + 1) * 4; ++j) {
                const double t = path.time(j);
                const double next = path.time(j + 1);
                jump = jump || (samples[j] * samples[j + 1] < 0.0 && std::abs(samples[j]) > std::pow(t, 0.22) &&
                                std::abs(samples[j + 1]) > std::pow(next, 0.22));
            }
            EXPECT_TRUE(jump) << "cell " << c;
        }
    }
    EXPECT_GT(checked, 0u);
}

TEST(Series, TermsAreNonnegativeAndSumsMonotone) {
    const auto path = synthesize_path(HurstIndex(0.43), 12, 2, 6);
    const auto series = partial_sum_series(path, 0.3);
    ASSERT_EQ(series.terms.size(), 12u);
    double previous = 0.0;
    for (int n = 1; n <= 12; ++n) {
        EXPECT_GE(series.Y(n), 0.0);
        EXPECT_GE(series.F(n), previous);
        previous = series.F(n);
    }
    EXPECT_NEAR(series.F(12), std::accumulate(series.terms.begin(), series.terms.end(), 0.0), 1e-12);
    EXPECT_THROW(partial_sum_series(path, 0.0, 0.0), std::invalid_argument);
}

TEST(Series, TermMeansAreScaleInvariant) {
    const HurstIndex h(0.43);
    const PathSynthesizer synth(h, 12, 2);
    stats::RunningMoments small;
    stats::RunningMoments large;
    for (std::uint64_t s = 0; s < 150; ++s) {
        const auto series = partial_sum_series(synth(s), 0.5);
        small.add(series.Y(7));
        large.add(series.Y(12));
    }
    const double expected = expected_localtime_increment(0.5, 0.5, 1.0, h);
    EXPECT_NEAR(small.mean(), expected, 5.0 * small.summary().stderr_mean);
    EXPECT_NEAR(large.mean(), expected, 5.0 * large.summary().stderr_mean);
}

TEST(Modulus, RefiningTheProbeNeverLowersTheStatistic) {
    const auto path = synthesize_path(HurstIndex(0.43), 10, 2, 31);
    const XiaoProbe base{16, 4, 9, 0.05};
    const double s0 = xiao_modulus_stat(path, 9, base);
    const double s1 = xiao_modulus_stat(path, 9, XiaoProbe{32, 4, 9, 0.05});
    const double s2 = xiao_modulus_stat(path, 9, XiaoProbe{32, 6, 9, 0.05});
    const double s3 = xiao_modulus_stat(path, 9, XiaoProbe{32, 6, 17, 0.05});
    EXPECT_GT(s0, 0.0);
    EXPECT_LE(s0, s1);
    EXPECT_LE(s1, s2);
    EXPECT_LE(s2, s3);
}

TEST(Modulus, FiniteOnALinearPathAndValidates) {
    const auto path = linear_path(6, 2);
    const double s = xiao_modulus_stat(path, 5);
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_GT(s, 0.0);
    EXPECT_THROW(xiao_modulus_stat(path, 7), std::invalid_argument);
    EXPECT_THROW(xiao_modulus_stat(path, 3, XiaoProbe{0, 4, 9, 0.05}), std::invalid_argument);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fbmdim/errors.hpp"
#include "fbmdim/macrodim.hpp"
#include "fbmdim/rng.hpp"

using namespace fbmdim;

namespace {

double cost_formula(std::int64_t length, int n, double rho, NuVariant variant) {
    const double x = static_cast<double>(length) / std::exp2(n);
    double c = rho == 0.0 ? 1.0 : std::pow(x, rho);
    if (variant == NuVariant::log_weighted) {
        c *= std::pow(-std::log2(x), 1.0 - rho);
    }
    return c;
}

// Infimum over all covers of the cell set by integer intervals inside the
// annulus, by a DP over the covered frontier: from frontier p the first
// uncovered cell c must be covered by some [s, e) with s <= c < e.
double cover_infimum(const AnnulusCellSet& set, double rho, NuVariant variant) {
    const std::int64_t lower = set.lower();
    const std::int64_t upper = set.upper();
    const auto& cells = set.cells();
    std::vector<double> best(static_cast<std::size_t>(upper - lower + 1), 0.0);
    for (std::int64_t p = upper; p >= lower; --p) {
        const auto it = std::lower_bound(cells.begin(), cells.end(), p);
        if (it == cells.end()) {
            best[static_cast<std::size_t>(p - lower)] = 0.0;
            continue;
        }
        const std::int64_t c = *it;
        double value = std::numeric_limits<double>::infinity();
        for (std::int64_t s = lower; s <= c; ++s) {
            for (std::int64_t e = c + 1; e <= upper; ++e) {
                value = std::min(value, cost_formula(e - s, set.n(), rho, variant) +
                                            best[static_cast<std::size_t>(e - lower)]);
            }
        }
        best[static_cast<std::size_t>(p - lower)] = value;
    }
    return best[0];
}

AnnulusCellSet random_set(CounterRng& rng, int n, double density) {
    const std::int64_t lower = std::int64_t{1} << (n - 1);
    std::vector<std::int64_t> cells;
    for (std::int64_t c = lower; c < 2 * lower; ++c) {
        if (rng.uniform() < density) {
            cells.push_back(c);
        }
    }
    return AnnulusCellSet(n, std::move(cells));
}

double partition_cost(const NuValue& nu) {
    double total = 0.0;
    for (const auto& iv : nu.partition) {
        total += cost_formula(iv.end - iv.begin, nu.n, nu.rho, nu.variant);
    }
    return total;
}

bool partition_covers(const NuValue& nu, const AnnulusCellSet& set) {
    for (std::int64_t c : set.cells()) {
        const bool covered = std::any_of(nu.partition.begin(), nu.partition.end(),
                                         [&](const CellInterval& iv) { return iv.begin <= c && c < iv.end; });
        if (!covered) {
            return false;
        }
    }
    for (const auto& iv : nu.partition) {
        if (iv.begin < set.lower() || iv.end > set.upper() || iv.end <= iv.begin) {
            return false;
        }
    }
    return true;
}

std::vector<SlopePoint> synthetic_curve(double level, double decay, double onset, double step) {
    std::vector<SlopePoint> curve;
    for (double rho : make_rho_grid(step)) {
        curve.push_back({rho, level - decay * std::max(0.0, rho - onset), 0.01, 10});
    }
    return curve;
}

} // namespace

TEST(CellSet, Validation) {
    EXPECT_NO_THROW(AnnulusCellSet(3, {4, 5, 7}));
    EXPECT_THROW(AnnulusCellSet(3, {3, 5}), std::invalid_argument);
    EXPECT_THROW(AnnulusCellSet(3, {4, 8}), std::invalid_argument);
    EXPECT_THROW(AnnulusCellSet(3, {5, 5}), std::invalid_argument);
    EXPECT_THROW(AnnulusCellSet(3, {6, 5}), std::invalid_argument);
    const AnnulusCellSet zero(0, {0});
    EXPECT_EQ(zero.lower(), 0);
    EXPECT_EQ(zero.upper(), 1);
    const AnnulusCellSet s(5, {});
    EXPECT_EQ(s.lower(), 16);
    EXPECT_EQ(s.upper(), 32);
    EXPECT_EQ(s.length(), 16);
}

TEST(Nu, GoldenExample) {
    const AnnulusCellSet set(3, {4, 5, 7});
    const auto fine = nu_exact(set, 1.0);
    EXPECT_NEAR(fine.value, 0.375, 1e-15);
    EXPECT_EQ(fine.partition, (std::vector<CellInterval>{{4, 6}, {7, 8}}));
    const auto coarse = nu_exact(set, 0.5);
    EXPECT_NEAR(coarse.value, 0.70710678118654752, 1e-12);
    EXPECT_EQ(coarse.partition, (std::vector<CellInterval>{{4, 8}}));
    EXPECT_NEAR(nu_exact(set, 0.0).value, 1.0, 1e-15);
}

TEST(Nu, EmptySetCostsNothing) {
    const AnnulusCellSet set(6, {});
    for (double rho : {0.0, 0.5, 1.0}) {
        EXPECT_EQ(nu_exact(set, rho).value, 0.0);
        EXPECT_TRUE(nu_exact(set, rho).partition.empty());
    }
}

TEST(Nu, SingleIntervalBoundHolds) {
    CounterRng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 12);
        const auto set = random_set(rng, n, rng.uniform());
        const double rho = rng.uniform();
        EXPECT_LE(nu_exact(set, rho).value, std::pow(2.0, -rho) + 1e-12);
    }
}

TEST(Nu, ExactQuadraticAndBruteForceAgree) {
    CounterRng rng(2024);
    double worst = 0.0;
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 10);
        auto set = random_set(rng, n, 0.05 + 0.9 * rng.uniform());
        if (set.size() > kMaxBruteforceCells) {
            std::vector<std::int64_t> cells(set.cells().begin(), set.cells().begin() + kMaxBruteforceCells);
            set = AnnulusCellSet(n, std::move(cells));
        }
        const double rho = trial % 10 == 0 ? (trial % 20 == 0 ? 0.0 : 1.0) : rng.uniform();
        for (NuVariant variant : {NuVariant::plain, NuVariant::log_weighted}) {
            const auto exact = nu_exact(set, rho, variant);
            const auto quad = nu_quadratic(set, rho, variant);
            const auto brute = nu_bruteforce(set, rho, variant);
            worst = std::max({worst, std::abs(exact.value - brute.value), std::abs(quad.value - brute.value)});
            EXPECT_EQ(exact.partition, quad.partition);
            EXPECT_TRUE(partition_covers(exact, set));
            EXPECT_NEAR(partition_cost(exact), exact.value, 1e-12);
            ++checked;
        }
    }
    EXPECT_EQ(checked, 2000);
    EXPECT_LE(worst, 1e-12);
}

TEST(Nu, MatchesCoverInfimumOracle) {
    CounterRng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 6);
        const auto set = random_set(rng, n, 0.05 + 0.9 * rng.uniform());
        const double rho = rng.uniform();
        for (NuVariant variant : {NuVariant::plain, NuVariant::log_weighted}) {
            const double oracle = cover_infimum(set, rho, variant);
            EXPECT_NEAR(nu_exact(set, rho, variant).value, oracle, 1e-12 * (1.0 + oracle))
                << "n=" << n << " rho=" << rho << " variant=" << to_string(variant);
        }
    }
}

TEST(Nu, LargeSetsUseTheFastPathConsistently) {
    CounterRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto set = random_set(rng, 12, 0.02 + 0.3 * rng.uniform());
        for (double rho : {0.1, 0.3, 0.57, 0.9}) {
            for (NuVariant variant : {NuVariant::plain, NuVariant::log_weighted}) {
                const auto exact = nu_exact(set, rho, variant);
                const auto quad = nu_quadratic(set, rho, variant);
                EXPECT_NEAR(exact.value, quad.value, 1e-12 * (1.0 + quad.value));
                EXPECT_EQ(exact.partition.size(), quad.partition.size());
            }
        }
    }
}

TEST(Nu, TiesPreferFewerIntervals) {
    // At rho = 1 merging adjacent cells costs the same as covering them apart.
    const AnnulusCellSet set(4, {8, 9, 10});
    const auto nu = nu_exact(set, 1.0);
    EXPECT_NEAR(nu.value, 3.0 / 16.0, 1e-15);
    EXPECT_EQ(nu.partition, (std::vector<CellInterval>{{8, 11}}));
}

TEST(Nu, CostFormulasAndErrors) {
    EXPECT_DOUBLE_EQ(interval_cost(4, 3, 0.5, NuVariant::plain), std::sqrt(0.5));
    EXPECT_DOUBLE_EQ(interval_cost(2, 3, 0.5, NuVariant::log_weighted), 0.5 * std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(group_cost(1, 10, 0.0, NuVariant::plain), 1.0);
    // Small rho: a longer interval is cheaper under the log weight.
    EXPECT_LT(group_cost(1, 10, 0.05, NuVariant::log_weighted), interval_cost(1, 10, 0.05, NuVariant::log_weighted));
    EXPECT_THROW(nu_exact(AnnulusCellSet(2, {2}), 1.5), std::invalid_argument);
    std::vector<std::int64_t> many(16);
    std::iota(many.begin(), many.end(), 16);
    EXPECT_THROW(nu_bruteforce(AnnulusCellSet(5, many), 0.5), std::invalid_argument);
}

TEST(Densities, PowerLawMeasureGivesItsExponent) {
    std::vector<double> measure;
    for (int n = 1; n <= 20; ++n) {
        measure.push_back(std::exp2(0.7 * n));
    }
    const auto est = den_log_estimate(measure, FitRange{10, 20});
    EXPECT_NEAR(est.point, 0.7, 1e-3);
    EXPECT_EQ(est.estimand, Estimand::den_log);
    const auto pix = den_pix_estimate(measure, FitRange{10, 20});
    EXPECT_NEAR(pix.point, 0.7, 1e-3);
    EXPECT_EQ(pix.estimand, Estimand::den_pix);
    EXPECT_GT(pix.ratio_max, 0.7);
}

TEST(Densities, FullRayHasDensityOne) {
    const auto ray = full_ray_set(16);
    const auto est = den_pix_estimate(cell_counts(ray), FitRange{6, 16});
    EXPECT_NEAR(est.point, 1.0, 1e-3);
}

TEST(Densities, Errors) {
    const std::vector<double> zero(20, 0.0);
    EXPECT_THROW(den_log_estimate(zero, FitRange{10, 20}), EstimationError);
    std::vector<double> sparse(20, 0.0);
    sparse[17] = 1.0;
    EXPECT_THROW(den_pix_estimate(sparse, FitRange{10, 19}), EstimationError);
    EXPECT_THROW(den_pix_estimate(sparse, FitRange{10, 21}), std::invalid_argument);
    EXPECT_THROW(den_pix_estimate(sparse, FitRange{0, 5}), std::invalid_argument);
}

TEST(RhoGrid, CoversTheUnitInterval) {
    const auto grid = make_rho_grid(0.05);
    ASSERT_EQ(grid.size(), 21u);
    EXPECT_EQ(grid.front(), 0.0);
    EXPECT_EQ(grid.back(), 1.0);
    EXPECT_NEAR(grid[7], 0.35, 1e-12);
    EXPECT_THROW(make_rho_grid(0.0), std::invalid_argument);
}

TEST(Hinge, RecoversSyntheticOnset) {
    for (double onset : {0.3, 0.57, 0.75}) {
        const auto curve = synthetic_curve(0.2, 1.5, onset, 0.01);
        const auto fit = fit_hinge(curve);
        EXPECT_NEAR(fit.onset, onset, 2e-3) << onset;
        EXPECT_NEAR(fit.decay, 1.5, 1e-6);
        EXPECT_NEAR(fit.level, 0.2, 1e-6);
        EXPECT_FALSE(fit.boundary);
        const auto untrimmed = fit_hinge(curve, 0.0);
        EXPECT_NEAR(untrimmed.onset, onset, 2e-3);
    }
}

TEST(Hinge, FlatCurveSitsAtTheBoundary) {
    const auto fit = fit_hinge(synthetic_curve(0.0, 0.0, 1.0, 0.05));
    EXPECT_DOUBLE_EQ(fit.onset, 1.0);
    EXPECT_TRUE(fit.boundary);
}

TEST(DimH, AlphaGridRecoversAlpha) {
    const auto grid = make_rho_grid(0.05);
    for (double alpha : {0.3, 0.6}) {
        const auto sets = alpha_grid_set(alpha, 20);
        for (int n = 1; n <= 20; ++n) {
            const auto expected = std::min<std::int64_t>(
                std::int64_t{1} << (n - 1), std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::exp2(n * alpha) - 1e-9))));
            EXPECT_EQ(static_cast<std::int64_t>(sets[static_cast<std::size_t>(n - 1)].size()), expected);
        }
        const auto est = dimh_estimate(sets, grid, FitRange{10, 20});
        EXPECT_NEAR(est.point, alpha, 0.05) << alpha;
        EXPECT_EQ(est.estimand, Estimand::dim_h);
        EXPECT_EQ(est.slope_curve.size(), grid.size());
        const auto pix = den_pix_estimate(cell_counts(sets), FitRange{10, 20});
        EXPECT_NEAR(pix.point, alpha, 0.02);
    }
}

TEST(DimH, FullRayHasDimensionOne) {
    const auto grid = make_rho_grid(0.05);
    const auto est = dimh_estimate(full_ray_set(16), grid, FitRange{6, 16});
    EXPECT_NEAR(est.point, 1.0, 1e-9);
    EXPECT_TRUE(est.boundary);
}

TEST(DimH, Errors) {
    const auto grid = make_rho_grid(0.05);
    const auto ray = full_ray_set(10);
    EXPECT_THROW(dimh_estimate(ray, grid, FitRange{8, 10}), std::invalid_argument);
    EXPECT_THROW(dimh_estimate(ray, grid, FitRange{5, 12}), std::invalid_argument);
    const std::vector<double> coarse{0.0, 0.5, 1.0};
    EXPECT_THROW(dimh_estimate(ray, coarse, FitRange{4, 10}), std::invalid_argument);
    std::vector<AnnulusCellSet> sparse;
    for (int n = 1; n <= 10; ++n) {
        sparse.emplace_back(n, n == 9 ? std::vector<std::int64_t>{256} : std::vector<std::int64_t>{});
    }
    EXPECT_THROW(dimh_estimate(sparse, grid, FitRange{4, 10}), EstimationError);
}

TEST(Accumulator, MergeMatchesSequentialAdds) {
    const auto grid = make_rho_grid(0.05);
    CounterRng rng(8);
    std::vector<std::vector<AnnulusCellSet>> replicas;
    for (int r = 0; r < 6; ++r) {
        std::vector<AnnulusCellSet> sets;
        for (int n = 1; n <= 10; ++n) {
            sets.push_back(random_set(rng, n, 0.3 * rng.uniform()));
        }
        replicas.push_back(std::move(sets));
    }
    NuAccumulator all(grid, 10);
    NuAccumulator a(grid, 10);
    NuAccumulator b(grid, 10);
    NuAccumulator c(grid, 10);
    for (std::size_t r = 0; r < replicas.size(); ++r) {
        all.add(replicas[r]);
        (r < 2 ? a : (r < 4 ? b : c)).add(replicas[r]);
    }
    NuAccumulator left = a;
    left.merge(b);
    left.merge(c);
    NuAccumulator right = b;
    right.merge(c);
    right.merge(a);
    EXPECT_EQ(left.replicas(), 6u);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (int n = 1; n <= 10; ++n) {
            EXPECT_NEAR(left.mean_nu(k, n), all.mean_nu(k, n), 1e-12);
            EXPECT_NEAR(right.mean_nu(k, n), all.mean_nu(k, n), 1e-12);
            double direct = 0.0;
            for (const auto& sets : replicas) {
                direct += nu_exact(sets[static_cast<std::size_t>(n - 1)], grid[k]).value;
            }
            EXPECT_NEAR(all.mean_nu(k, n), direct / 6.0, 1e-12);
        }
    }
    EXPECT_THROW(a.merge(NuAccumulator(grid, 9)), std::invalid_argument);
    EXPECT_THROW(a.add(std::span<const AnnulusCellSet>(replicas[0].data(), 9)), std::invalid_argument);
}

TEST(Accumulator, AlphaGridPooledEstimate) {
    NuAccumulator acc(make_rho_grid(0.05), 20);
    acc.add(alpha_grid_set(0.6, 20));
    EXPECT_NEAR(acc.estimate(FitRange{10, 20}).point, 0.6, 0.05);
    NuAccumulator empty(make_rho_grid(0.05), 20);
    EXPECT_THROW(empty.estimate(FitRange{10, 20}), EstimationError);
}

TEST(Inequalities, ToleranceAndOrdering) {
    const auto ok = dimension_inequality_check(0.78, 0.80, 0.57);
    EXPECT_TRUE(ok.passed());
    const auto slack = dimension_inequality_check(0.84, 0.80, 0.84);
    EXPECT_TRUE(slack.passed());
    const auto bad = dimension_inequality_check(0.70, 0.80, 0.90);
    EXPECT_FALSE(bad.dimh_le_denpix);
    EXPECT_TRUE(bad.denlog_le_denpix);
    EXPECT_FALSE(bad.passed());
    EXPECT_NE(bad.describe().find("dim_h"), std::string::npos);
    DimensionEstimate a;
    a.estimand = Estimand::den_pix;
    EXPECT_THROW(dimension_inequality_check(a, a, a), std::invalid_argument);
}

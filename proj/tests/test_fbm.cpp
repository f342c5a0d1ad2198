#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "fbmdim/errors.hpp"
#include "fbmdim/fbm.hpp"
#include "fbmdim/stats.hpp"

using namespace fbmdim;

namespace {

// Independent oracle for the double integral: nested tanh-sinh over the
// triangle 0 <= u <= v <= 1, doubled by symmetry. The determinant is written
// with q = u/v as v^4H (F1 F2) / 4,
//   F1 = (1-q)^2H - (1-q^H)^2,  F2 = (1+q^H)^2 - (1-q)^2H,
// using d = v - u from the quadrature complement near the diagonal.
double oracle_I(double h) {
    boost::math::quadrature::tanh_sinh<double> inner_rule(12);
    boost::math::quadrature::tanh_sinh<double> outer_rule(12);
    auto outer = [&](double v) {
        if (v < 1e-100) {
            return 0.0; // contributes O(v^(2-2H))
        }
        auto inner = [&](double u, double uc) {
            // uc = 0 - u below the midpoint, v - u above it.
            const double d = uc > 0.0 ? uc : v - u;
            const double q = uc > 0.0 ? (v - d) / v : u / v;
            double f1;
            if (q < 0.5) {
                f1 = std::expm1(2.0 * h * std::log1p(-q)) + 2.0 * std::pow(q, h) - std::pow(q, 2.0 * h);
            } else {
                const double one_minus_q = d / v;
                const double one_minus_qh = -std::expm1(h * std::log1p(-one_minus_q));
                f1 = std::pow(one_minus_q, 2.0 * h) - one_minus_qh * one_minus_qh;
            }
            const double qh = std::pow(q, h);
            const double f2 = q < 0.5 ? qh * (2.0 + qh) - std::expm1(2.0 * h * std::log1p(-q))
                                      : (1.0 + qh) * (1.0 + qh) - std::pow(d / v, 2.0 * h);
            if (!(f1 > 0.0)) {
                return 0.0;
            }
            return 2.0 / (std::sqrt(f1) * std::sqrt(f2));
        };
        return inner_rule.integrate(inner, 0.0, v, 1e-12) / std::pow(v, 2.0 * h);
    };
    return 2.0 * outer_rule.integrate(outer, 0.0, 1.0, 1e-11);
}

std::vector<double> empirical_autocov(std::span<const std::vector<double>> paths, std::size_t max_lag,
                                      std::vector<double>* stderrs) {
    std::vector<double> out(max_lag + 1, 0.0);
    stderrs->assign(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        std::vector<double> per_path;
        for (const auto& x : paths) {
            double s = 0.0;
            for (std::size_t i = 0; i + k < x.size(); ++i) {
                s += x[i] * x[i + k];
            }
            per_path.push_back(s / static_cast<double>(x.size() - k));
        }
        const auto summary = stats::summarize(per_path);
        out[k] = summary.mean;
        (*stderrs)[k] = summary.stderr_mean;
    }
    return out;
}

} // namespace

TEST(Covariance, MatchesDefinition) {
    const HurstIndex h(0.5);
    EXPECT_DOUBLE_EQ(covariance_R(1.0, 2.0, h), 1.0);
    EXPECT_DOUBLE_EQ(covariance_R(3.0, 3.0, h), 3.0);
    const HurstIndex g(0.25);
    EXPECT_NEAR(covariance_R(1.0, 4.0, g), 0.5 * (3.0 - std::sqrt(3.0)), 1e-15);
    EXPECT_DOUBLE_EQ(covariance_R(0.0, 5.0, g), 0.0);
}

TEST(Covariance, SymmetricAndRejectsNegativeTimes) {
    const HurstIndex h(0.43);
    for (double u : {0.1, 0.7, 2.5}) {
        for (double v : {0.3, 1.0, 9.0}) {
            EXPECT_DOUBLE_EQ(covariance_R(u, v, h), covariance_R(v, u, h));
        }
    }
    EXPECT_THROW(covariance_R(-1.0, 1.0, h), std::domain_error);
    EXPECT_THROW(covariance_R(1.0, -0.5, h), std::domain_error);
}

TEST(Covariance, FgnAutocovariance) {
    const HurstIndex bm(0.5);
    EXPECT_DOUBLE_EQ(fgn_autocov(0, bm), 1.0);
    EXPECT_NEAR(fgn_autocov(1, bm), 0.0, 1e-15);
    EXPECT_NEAR(fgn_autocov(7, bm), 0.0, 1e-14);
    const HurstIndex h(0.75);
    EXPECT_NEAR(fgn_autocov(1, h), 0.5 * (std::pow(2.0, 1.5) - 2.0), 1e-15);
    // Increments of a path with R as covariance.
    for (std::uint64_t k = 1; k < 6; ++k) {
        const double kd = static_cast<double>(k);
        const double direct = covariance_R(kd + 1.0, 1.0, h) - covariance_R(kd, 1.0, h) -
                              covariance_R(kd + 1.0, 0.0, h) + covariance_R(kd, 0.0, h);
        EXPECT_NEAR(fgn_autocov(k, h), direct, 1e-12);
    }
}

TEST(Hurst, RejectsOutOfRange) {
    EXPECT_THROW(HurstIndex(0.0), std::invalid_argument);
    EXPECT_THROW(HurstIndex(1.0), std::invalid_argument);
    EXPECT_THROW(HurstIndex(-0.3), std::invalid_argument);
    EXPECT_THROW(HurstIndex(std::nan("")), std::invalid_argument);
    EXPECT_NO_THROW(HurstIndex(0.43));
}

TEST(Generator, DeterministicPerSeed) {
    const HurstIndex h(0.43);
    const auto a = generate_fgn(h, 1000, 5);
    const auto b = generate_fgn(h, 1000, 5);
    const auto c = generate_fgn(h, 1000, 6);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_EQ(generate_fgn(h, 64, 3, GeneratorId::cholesky), generate_fgn(h, 64, 3, GeneratorId::cholesky));
}

TEST(Generator, LengthOneHasUnitVariance) {
    const HurstIndex h(0.3);
    std::vector<double> first;
    for (std::uint64_t s = 0; s < 4000; ++s) {
        first.push_back(generate_fgn(h, 1, s)[0]);
    }
    EXPECT_GT(stats::ks_test_standard_normal(first).p_value, 1e-3);
}

TEST(Generator, EmbeddingSpectrumIsNonnegative) {
    for (double hv : {0.1, 0.43, 0.5, 0.8, 0.95}) {
        const CirculantFgn gen(HurstIndex(hv), 4096);
        EXPECT_GE(gen.min_eigenvalue(), -kEigenClampTolerance) << "H=" << hv;
        EXPECT_GE(gen.embedding_size(), 2 * (gen.length() - 1));
    }
}

TEST(Generator, CirculantAndCholeskyMatchTheAutocovariance) {
    const HurstIndex h(0.43);
    const std::size_t length = 256;
    for (GeneratorId id : {GeneratorId::circulant_embedding, GeneratorId::cholesky}) {
        std::vector<std::vector<double>> paths;
        for (std::uint64_t s = 0; s < 1500; ++s) {
            paths.push_back(generate_fgn(h, length, 1000 + s, id));
        }
        std::vector<double> se;
        const auto acf = empirical_autocov(paths, 8, &se);
        for (std::size_t k = 0; k <= 8; ++k) {
            EXPECT_NEAR(acf[k], fgn_autocov(k, h), 5.0 * se[k]) << to_string(id) << " lag " << k;
        }
    }
}

TEST(Generator, RejectsOversizedRequests) {
    const HurstIndex h(0.43);
    EXPECT_THROW(CholeskyFgn(h, kMaxCholeskyLength + 1), ResourceError);
    EXPECT_THROW(PathSynthesizer(h, 24, 3), ResourceError);
    EXPECT_THROW(PathSynthesizer(h, 14, 0, GeneratorId::cholesky), ResourceError);
    EXPECT_THROW(generate_fgn(h, 8, 1, GeneratorId::external), std::invalid_argument);
    EXPECT_THROW(CirculantFgn(h, 0), std::invalid_argument);
}

TEST(Path, ValidatesShapeAndOrigin) {
    const HurstIndex h(0.5);
    EXPECT_NO_THROW(FbmPath(h, 2, 1, std::vector<double>(9, 0.0)));
    EXPECT_THROW(FbmPath(h, 2, 1, std::vector<double>(8, 0.0)), std::invalid_argument);
    std::vector<double> shifted(5, 0.0);
    shifted[0] = 1.0;
    EXPECT_THROW(FbmPath(h, 2, 0, shifted), std::invalid_argument);
    EXPECT_THROW(FbmPath(h, 0, 0, std::vector<double>(2, 0.0)), std::invalid_argument);
}

TEST(Path, GridAndScaling) {
    const HurstIndex h(0.43);
    const auto path = synthesize_path(h, 6, 2, 11);
    EXPECT_EQ(path.size(), (std::size_t{1} << 8) + 1);
    EXPECT_EQ(path[0], 0.0);
    EXPECT_DOUBLE_EQ(path.delta(), 0.25);
    EXPECT_DOUBLE_EQ(path.horizon(), 64.0);
    EXPECT_DOUBLE_EQ(path.time(8), 2.0);
    EXPECT_EQ(path.samples_per_unit(), 4u);
    EXPECT_EQ(path.seed(), 11u);
    EXPECT_EQ(path.generator(), GeneratorId::circulant_embedding);
}

TEST(Path, EndpointVarianceMatchesSelfSimilarity) {
    const HurstIndex h(0.43);
    const int n = 14;
    const PathSynthesizer synth(h, n, 1);
    std::vector<double> endpoint;
    std::vector<double> midpoint;
    for (std::uint64_t s = 0; s < 400; ++s) {
        const auto path = synth(500 + s);
        endpoint.push_back(path[path.size() - 1] / std::pow(path.horizon(), h.value()));
        midpoint.push_back(path[path.size() / 2] / std::pow(0.5 * path.horizon(), h.value()));
    }
    EXPECT_GT(stats::ks_test_standard_normal(endpoint).p_value, 1e-3);
    EXPECT_GT(stats::ks_test_standard_normal(midpoint).p_value, 1e-3);
}

TEST(Path, BrownianIncrementsAreIndependentNormals) {
    const HurstIndex h(0.5);
    const auto path = synthesize_path(h, 12, 2, 77);
    std::vector<double> z;
    const double scale = 1.0 / std::sqrt(path.delta());
    for (std::size_t j = 1; j < path.size(); ++j) {
        z.push_back((path[j] - path[j - 1]) * scale);
    }
    EXPECT_GT(stats::ks_test_standard_normal(z).p_value, 1e-3);
    std::vector<double> x(z.begin(), z.end() - 1);
    std::vector<double> y(z.begin() + 1, z.end());
    const auto fit = stats::linear_fit(x, y);
    EXPECT_NEAR(fit.slope, 0.0, 5.0 * fit.slope_stderr);
}

TEST(IntegralI, BrownianValueIsTwoPi) {
    EXPECT_NEAR(compute_I(HurstIndex(0.5), 1e-9), 2.0 * std::numbers::pi, 1e-7);
    EXPECT_NEAR(oracle_I(0.5), 2.0 * std::numbers::pi, 1e-7);
}

TEST(IntegralI, MatchesNestedQuadratureOracle) {
    for (double hv : {0.25, 0.43, 0.5, 0.75}) {
        const double value = compute_I(HurstIndex(hv), 1e-9);
        ASSERT_TRUE(std::isfinite(value));
        EXPECT_NEAR(value, oracle_I(hv), 1e-6) << "H=" << hv;
    }
}

TEST(IntegralI, ToleranceRefinementIsConsistent) {
    for (double hv : {0.1, 0.43, 0.9}) {
        const double coarse = compute_I(HurstIndex(hv), 1e-5);
        const double fine = compute_I(HurstIndex(hv), 1e-10);
        EXPECT_TRUE(std::isfinite(fine));
        EXPECT_NEAR(coarse, fine, 1e-5) << "H=" << hv;
    }
    EXPECT_THROW(compute_I(HurstIndex(0.5), 0.0), std::invalid_argument);
}

TEST(TimeInversion, CovarianceIsInvariant) {
    std::vector<double> grid;
    for (int i = 0; i < 16; ++i) {
        grid.push_back(std::pow(2.0, -4.0 + 0.6 * i));
    }
    for (double hv : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        EXPECT_LE(time_inversion_covariance_residual(HurstIndex(hv), grid), 1e-10) << "H=" << hv;
    }
    const std::vector<double> bad{1.0, 0.0};
    EXPECT_THROW(time_inversion_covariance_residual(HurstIndex(0.5), bad), std::domain_error);
}

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fbmdim::stats {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs at least two points.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct Summary {
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation (n - 1)
    double stderr_mean = 0.0;
    std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

/// Welford accumulator; merge() is associative and commutative.
class RunningMoments {
  public:
    void add(double x) noexcept;
    void merge(const RunningMoments& other) noexcept;
    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept; // sample variance
    Summary summary() const noexcept;

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

double normal_cdf(double x) noexcept;

/// Kolmogorov-Smirnov test of `sample` against N(0, 1). Returns the p-value
/// from the asymptotic Kolmogorov distribution (with the Stephens correction).
struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};
KsResult ks_test_standard_normal(std::vector<double> sample);

double quantile(std::vector<double> values, double p);

} // namespace fbmdim::stats

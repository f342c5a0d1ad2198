#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fbmdim/fbm.hpp"
#include "fbmdim/macrodim.hpp"

namespace fbmdim {

/// Occupation-density estimates L[x][t] on a level x checkpoint grid.
class LocalTimeGrid {
  public:
    LocalTimeGrid(std::vector<double> levels, std::vector<double> checkpoints, double bandwidth,
                  std::vector<double> values);

    const std::vector<double>& levels() const noexcept { return levels_; }
    const std::vector<double>& checkpoints() const noexcept { return checkpoints_; }
    double bandwidth() const noexcept { return bandwidth_; }
    /// L at levels()[i], checkpoints()[k].
    double at(std::size_t i, std::size_t k) const { return values_.at(i * checkpoints_.size() + k); }
    /// Row-major, one row per level.
    const std::vector<double>& values() const noexcept { return values_; }

  private:
    std::vector<double> levels_;
    std::vector<double> checkpoints_;
    double bandwidth_;
    std::vector<double> values_;
};

/// L[x][t] = Delta * #{j : j Delta <= t, |B_j - x| <= bandwidth} / (2 bandwidth).
/// Levels and checkpoints must be non-empty and sorted; checkpoints lie in [0, 2^N].
LocalTimeGrid occupation_localtime(const FbmPath& path, std::vector<double> levels, std::vector<double> checkpoints,
                                   double bandwidth);

/// E(L^x_t - L^x_s) = (2 pi)^(-1/2) int_s^t exp(-x^2 / (2 u^(2H))) u^(-H) du, 0 < s < t.
double expected_localtime_increment(double x, double s, double t, HurstIndex h, double tolerance = 1e-12);

/// Occupied unit cells of the level set {t : B_t = x}, per annulus n = 0 .. N.
struct LevelSetRecord {
    double x = 0.0;
    double bandwidth = 0.0;
    int horizon_exponent = 0;
    int resolution_exponent = 0;
    std::vector<AnnulusCellSet> annuli; // annuli[n], n = 0 .. N

    const AnnulusCellSet& annulus(int n) const { return annuli.at(static_cast<std::size_t>(n)); }
};

/// Cells floor(j / 2^r) of every sample with |B_j - x| <= bandwidth, and of
/// the left sample of every strict sign change of B - x. Sorted, unique.
std::vector<std::int64_t> level_crossing_cells(std::span<const double> samples, int resolution_exponent, double x,
                                               double bandwidth);

/// Level-set cells of the path restricted to [0, 2^N), binned per annulus.
LevelSetRecord level_set_extract(const FbmPath& path, double x, double bandwidth = 0.0);

struct PartialSumSeries {
    double x = 0.0;
    HurstIndex h{0.5};
    double relative_bandwidth = 0.05;
    std::vector<double> terms;        // Y[n - 1], n = 1 .. N
    std::vector<double> partial_sums; // F[N - 1] = Y[1] + ... + Y[N]

    double Y(int n) const { return terms.at(static_cast<std::size_t>(n - 1)); }
    double F(int n) const { return partial_sums.at(static_cast<std::size_t>(n - 1)); }
};

inline constexpr double kDefaultRelativeBandwidth = 0.05;

/// Y[n] = (L^{x 2^(nH)}_{2^n} - L^{x 2^(nH)}_{2^(n-1)}) / 2^(n(1-H)) with level
/// bandwidth relative_bandwidth * 2^(nH).
PartialSumSeries partial_sum_series(const FbmPath& path, double x,
                                    double relative_bandwidth = kDefaultRelativeBandwidth);

/// Search grid of the modulus statistic.
struct XiaoProbe {
    std::size_t time_points = 64;  // t = i 2^n / time_points
    std::size_t lag_count = 8;     // h = 2^(n-1-k), skipped below the grid step
    std::size_t level_count = 33;  // uniform over the range visited on [0, 2^n]
    double relative_bandwidth = kDefaultRelativeBandwidth;
};

/// max over the probe grid of (L^x_{t+h} - L^x_t) / (h^(1-H) (n - log2 h)^H).
/// Doubling time_points, raising lag_count or refining level_count to
/// 2 (level_count - 1) + 1 only adds probe points.
double xiao_modulus_stat(const FbmPath& path, int n, const XiaoProbe& probe = {});

} // namespace fbmdim

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fbmdim/stats.hpp"

namespace fbmdim {

struct SojournRecord;
struct LevelSetRecord;

/// Occupied unit cells [c, c+1) of one dyadic annulus S_n = [2^(n-1), 2^n).
/// Annulus 0 stands for S_0 = [0, 1) and holds at most the cell 0.
class AnnulusCellSet {
  public:
    AnnulusCellSet() = default;
    /// Validates sortedness, uniqueness and range.
    AnnulusCellSet(int n, std::vector<std::int64_t> cells);

    int n() const noexcept { return n_; }
    const std::vector<std::int64_t>& cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return cells_.size(); }
    bool empty() const noexcept { return cells_.empty(); }
    std::int64_t lower() const noexcept;  // 2^(n-1), or 0 for n = 0
    std::int64_t upper() const noexcept;  // 2^n (exclusive)
    std::int64_t length() const noexcept { return upper() - lower(); }

  private:
    int n_ = 1;
    std::vector<std::int64_t> cells_;
};

enum class NuVariant { plain, log_weighted };

const char* to_string(NuVariant v) noexcept;

/// Half-open interval [begin, end) with integer endpoints.
struct CellInterval {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    friend bool operator==(const CellInterval&, const CellInterval&) = default;
};

/// Optimal covering cost of one annulus together with a cover realizing it.
struct NuValue {
    double rho = 0.0;
    int n = 0;
    double value = 0.0;
    std::vector<CellInterval> partition;
    NuVariant variant = NuVariant::plain;
};

/// Cost of one covering interval of `length` unit cells in annulus n:
/// (L/2^n)^rho, times |log2(L/2^n)|^(1-rho) for the log-weighted variant.
double interval_cost(std::int64_t length, int n, double rho, NuVariant variant);

/// Cost of covering a contiguous group whose convex hull spans `span` cells.
/// The cover may use any integer interval of length in [span, 2^(n-1)];
/// the interval cost is unimodal in the length, so the optimum is at one
/// of the two ends. For the plain variant this equals interval_cost(span).
double group_cost(std::int64_t span, int n, double rho, NuVariant variant);

/// Exact infimum over integer-boundary interval covers of the cell set.
/// Ties break toward fewer intervals, then toward groups that start further left.
NuValue nu_exact(const AnnulusCellSet& cells, double rho, NuVariant variant = NuVariant::plain);

/// Plain O(m^2) dynamic program over contiguous groups; same tie rules.
NuValue nu_quadratic(const AnnulusCellSet& cells, double rho, NuVariant variant = NuVariant::plain);

inline constexpr std::size_t kMaxBruteforceCells = 15;

/// Exhaustive enumeration of all 2^(m-1) contiguous-group partitions.
NuValue nu_bruteforce(const AnnulusCellSet& cells, double rho, NuVariant variant = NuVariant::plain);

// ---------------------------------------------------------------------------
// Estimators

enum class Estimand { den_log, den_pix, dim_h };

const char* to_string(Estimand e) noexcept;

struct FitRange {
    int n_min = 10;
    int n_max = 20;
    int count() const noexcept { return n_max - n_min + 1; }
};

struct SlopePoint {
    double rho = 0.0;
    double slope = 0.0;
    double slope_stderr = 0.0;
    int annuli_used = 0;
};

struct DimensionEstimate {
    Estimand estimand = Estimand::den_log;
    double point = 0.0;
    std::vector<SlopePoint> slope_curve; // dim_h only
    FitRange fit_range;
    double stderr_point = 0.0;
    double replica_spread = 0.0;
    /// max over the fit range of log2(cumulative)/n (densities), a limsup proxy.
    double ratio_max = 0.0;
    /// Decay onset of the dim_h slope curve found at an end of the rho grid.
    bool boundary = false;
    int annuli_excluded = 0;
};

/// Regression slope of log2(sum_{m<=n} measure[m-1]) against n over fit_range.
/// `per_annulus[n-1]` is the measure of E within S_n.
DimensionEstimate den_log_estimate(std::span<const double> per_annulus, FitRange range);
DimensionEstimate den_log_estimate(const SojournRecord& record, FitRange range);

/// As den_log_estimate with cumulative occupied-cell counts.
DimensionEstimate den_pix_estimate(std::span<const double> cells_per_annulus, FitRange range);
DimensionEstimate den_pix_estimate(const SojournRecord& record, FitRange range);
DimensionEstimate den_pix_estimate(const LevelSetRecord& record, FitRange range);

/// rho = 0, step, 2 step, ..., 1.
std::vector<double> make_rho_grid(double step);

/// Macroscopic Hausdorff dimension estimate.
///
/// For every rho the slope s(rho) of log2 nu^n_rho against n over the fit
/// range is fitted (annuli with nu = 0 skipped). nu^n_rho never exceeds
/// 2^-rho, so s is flat (the series diverges) up to the critical exponent
/// and decreasing beyond it. The estimate is the onset of the descending
/// branch, located by a least-squares hinge fit s(rho) ~ a - c max(0, rho - d)
/// (see fit_hinge).
DimensionEstimate dimh_estimate(std::span<const AnnulusCellSet> annuli, std::span<const double> rho_grid,
                                FitRange range, NuVariant variant = NuVariant::plain);
DimensionEstimate dimh_estimate(const SojournRecord& record, std::span<const double> rho_grid, FitRange range,
                                NuVariant variant = NuVariant::plain);
DimensionEstimate dimh_estimate(const LevelSetRecord& record, std::span<const double> rho_grid, FitRange range,
                                NuVariant variant = NuVariant::plain);

/// Least-squares fit of s(rho) ~ a - c max(0, rho - d) with c >= 0, d on a
/// 0.001 grid (ties go to the larger d). With trim > 0 the fit is repeated
/// on the points farther than `trim` from the current d until d settles.
struct HingeFit {
    double onset = 1.0;  // d
    double decay = 0.0;  // c
    double level = 0.0;  // a
    double sse = 0.0;
    bool boundary = false;
};
inline constexpr double kHingeTrim = 0.1;
HingeFit fit_hinge(std::span<const SlopePoint> curve, double trim = kHingeTrim);

/// Replica-mean nu^n_rho on a fixed rho grid, for pooled dim_h estimates.
/// merge() is associative and commutative.
class NuAccumulator {
  public:
    NuAccumulator(std::vector<double> rho_grid, int horizon_exponent, NuVariant variant = NuVariant::plain);

    /// Adds one replica; `annuli` must hold annuli 1 .. N in order.
    void add(std::span<const AnnulusCellSet> annuli);
    void merge(const NuAccumulator& other);

    const std::vector<double>& rho_grid() const noexcept { return rho_grid_; }
    int horizon_exponent() const noexcept { return horizon_exponent_; }
    std::size_t replicas() const noexcept { return replicas_; }
    double mean_nu(std::size_t rho_index, int n) const;

    /// Hinge estimate on the slopes of log2 of the replica-mean nu.
    DimensionEstimate estimate(FitRange range) const;

  private:
    std::vector<double> rho_grid_;
    int horizon_exponent_;
    NuVariant variant_;
    std::size_t replicas_ = 0;
    std::vector<double> sums_; // [rho_index * N + (n - 1)]
};

struct InequalityReport {
    double den_log = 0.0;
    double den_pix = 0.0;
    double dim_h = 0.0;
    double tolerance = 0.05;
    bool dimh_le_denpix = true;
    bool denlog_le_denpix = true;
    bool passed() const noexcept { return dimh_le_denpix && denlog_le_denpix; }
    std::string describe() const;
};

inline constexpr double kInequalityTolerance = 0.05;

/// Dim_H <= Den_pix and Den_log <= Den_pix, up to `tolerance`.
InequalityReport dimension_inequality_check(double den_log, double den_pix, double dim_h,
                                            double tolerance = kInequalityTolerance);
InequalityReport dimension_inequality_check(const DimensionEstimate& den_log, const DimensionEstimate& den_pix,
                                            const DimensionEstimate& dim_h, double tolerance = kInequalityTolerance);

// ---------------------------------------------------------------------------
// Reference sets

std::vector<AnnulusCellSet> cell_sets(const SojournRecord& record);
/// Annuli 1..N of a level set record (S_0 is bounded and never matters).
std::vector<AnnulusCellSet> cell_sets(const LevelSetRecord& record);

/// ceil(2^(n alpha)) evenly spaced cells in every annulus n = 1..N.
std::vector<AnnulusCellSet> alpha_grid_set(double alpha, int horizon_exponent);

/// Every cell of every annulus n = 1..N.
std::vector<AnnulusCellSet> full_ray_set(int horizon_exponent);

std::vector<double> cell_counts(std::span<const AnnulusCellSet> annuli);

} // namespace fbmdim

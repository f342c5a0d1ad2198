#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fbmdim/fbm.hpp"
#include "fbmdim/stats.hpp"

namespace fbmdim {

/// Envelope exponent gamma of the sojourn set {t : |B_t| <= t^gamma}, 0 <= gamma < H.
class GammaExponent {
  public:
    GammaExponent(double gamma, HurstIndex h);

    double value() const noexcept { return gamma_; }
    HurstIndex hurst() const noexcept { return h_; }

  private:
    double gamma_;
    HurstIndex h_;
};

/// Sojourn data for the dyadic annulus [2^(n-1), 2^n).
struct AnnulusSojourn {
    int n = 0;
    std::vector<std::int64_t> occupied_cells; // sorted, unique, in [2^(n-1), 2^n)
    std::uint64_t hit_count = 0;              // grid samples with |B_t| <= t^gamma
    double leb_approx = 0.0;                  // hit_count * Delta
};

struct SojournRecord {
    GammaExponent gamma;
    int horizon_exponent = 0;
    int resolution_exponent = 0;
    std::vector<AnnulusSojourn> annuli; // annuli[n - 1], n = 1 .. N

    const AnnulusSojourn& annulus(int n) const { return annuli.at(static_cast<std::size_t>(n - 1)); }
    std::vector<double> leb_per_annulus() const;
    std::vector<double> cells_per_annulus() const;
};

/// Grid times t = j * Delta in [1, 2^N) with |B_t| <= t^gamma, binned per annulus.
SojournRecord extract_sojourn(const FbmPath& path, GammaExponent gamma);

/// Riemann approximation of Leb{0 <= s <= t : |B_s| <= s^gamma}.
double sojourn_measure_S(const FbmPath& path, GammaExponent gamma, double t);

/// S_gamma(2^n) for n = 0 .. N from a single pass over the path.
std::vector<double> sojourn_profile(const FbmPath& path, GammaExponent gamma);

/// Per-annulus replica tallies of hit counts and occupied-cell counts.
/// merge() is associative and commutative.
class SojournTally {
  public:
    explicit SojournTally(int horizon_exponent);
    void add(const SojournRecord& record);
    void merge(const SojournTally& other);
    int horizon_exponent() const noexcept { return horizon_exponent_; }
    const stats::RunningMoments& hits(int n) const { return hits_.at(static_cast<std::size_t>(n - 1)); }
    const stats::RunningMoments& cells(int n) const { return cells_.at(static_cast<std::size_t>(n - 1)); }

  private:
    int horizon_exponent_;
    std::vector<stats::RunningMoments> hits_;
    std::vector<stats::RunningMoments> cells_;
};

enum class WindowSide { before, after };

const char* to_string(WindowSide side) noexcept;

/// Exact joint sampler of an FBM on a finely gridded window around t = 1:
/// [1 - eps, 1] (before) or [1, 1 + eps] (after), 2^fine_resolution steps.
///
/// The window increments are drawn as fGn; the value at the window start is
/// then drawn from its Gaussian conditional law given those increments
/// (regression weights from one Toeplitz solve, shared by all replicas).
class WindowSampler {
  public:
    WindowSampler(HurstIndex h, double epsilon, WindowSide side, int fine_resolution);

    double window_start() const noexcept { return start_; }
    double epsilon() const noexcept { return epsilon_; }
    std::size_t steps() const noexcept { return steps_; }
    /// Conditional standard deviation of B at the window start.
    double residual_sd() const noexcept { return residual_sd_; }

    /// B on the 2^fine_resolution + 1 window grid points.
    std::vector<double> sample(CounterRng& rng) const;
    /// min over the window grid of |B_s|.
    double min_abs(CounterRng& rng) const;

  private:
    HurstIndex h_;
    double epsilon_;
    WindowSide side_;
    double start_;
    std::size_t steps_;
    double step_scale_; // (eps / steps)^H
    std::vector<double> weights_;
    double residual_sd_;
    std::unique_ptr<CirculantFgn> fgn_;
};

struct HitProbability {
    double epsilon = 0.0;
    WindowSide side = WindowSide::before;
    double gamma = 0.0;
    double threshold = 0.0; // eps^(H-gamma), doubled on the after side
    double estimate = 0.0;
    double stderr_estimate = 0.0;
    std::size_t hits = 0;
    std::size_t replicas = 0;
};

inline constexpr std::size_t kMinHitReplicas = 100;

/// Monte Carlo estimate of P(exists s in window : |B_s| <= threshold).
/// Replica i draws from CounterRng(seed + i).
HitProbability boundary_hit_probability(GammaExponent gamma, double epsilon, WindowSide side, std::size_t replicas,
                                        int fine_resolution, std::uint64_t seed);

/// Same replicas evaluated against several gamma values at once.
std::vector<HitProbability> boundary_hit_probabilities(HurstIndex h, std::span<const double> gammas, double epsilon,
                                                       WindowSide side, std::size_t replicas, int fine_resolution,
                                                       std::uint64_t seed);

} // namespace fbmdim

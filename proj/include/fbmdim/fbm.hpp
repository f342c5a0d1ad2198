#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fbmdim/hurst.hpp"
#include "fbmdim/rng.hpp"

namespace fbmdim {

/// Covariance E[B_u B_v] = (u^2H + v^2H - |v-u|^2H) / 2 of fractional Brownian motion.
double covariance_R(double u, double v, HurstIndex h);

/// Autocovariance at lag k of unit-spaced fractional Gaussian noise.
double fgn_autocov(std::uint64_t k, HurstIndex h);

enum class GeneratorId : std::uint8_t {
    circulant_embedding = 0,
    cholesky = 1,
    external = 2, // samples supplied by the caller (synthetic paths, fixtures)
};

const char* to_string(GeneratorId id) noexcept;

/// Sampled fractional Brownian motion on the grid j * 2^-r, j = 0 .. 2^(N+r).
/// Immutable after construction.
class FbmPath {
  public:
    FbmPath(HurstIndex h, int horizon_exponent, int resolution_exponent, std::vector<double> samples,
            std::uint64_t seed = 0, GeneratorId generator = GeneratorId::external);

    HurstIndex hurst() const noexcept { return h_; }
    int horizon_exponent() const noexcept { return horizon_exponent_; }
    int resolution_exponent() const noexcept { return resolution_exponent_; }
    std::uint64_t seed() const noexcept { return seed_; }
    GeneratorId generator() const noexcept { return generator_; }

    std::span<const double> samples() const noexcept { return samples_; }
    double operator[](std::size_t j) const noexcept { return samples_[j]; }
    std::size_t size() const noexcept { return samples_.size(); }

    /// Grid spacing 2^-r.
    double delta() const noexcept;
    double time(std::size_t j) const noexcept { return static_cast<double>(j) * delta(); }
    /// 2^N.
    double horizon() const noexcept;
    /// Samples per unit time, 2^r.
    std::size_t samples_per_unit() const noexcept { return std::size_t{1} << resolution_exponent_; }

  private:
    HurstIndex h_;
    int horizon_exponent_;
    int resolution_exponent_;
    std::uint64_t seed_;
    GeneratorId generator_;
    std::vector<double> samples_;
};

/// Largest sample count (2^(N+r) + 1) a single path may hold.
inline constexpr std::size_t kMaxPathSamples = std::size_t{1} << 26;

/// Largest fGn length accepted by the covariance-factorization generator.
inline constexpr std::size_t kMaxCholeskyLength = std::size_t{1} << 13;

/// Eigenvalues of the circulant embedding in [-kEigenClampTolerance, 0) are
/// clamped to zero; anything more negative aborts the synthesis.
inline constexpr double kEigenClampTolerance = 1e-9;

/// Exact fGn sampler by circulant embedding of the autocovariance.
///
/// The embedding spectrum is computed once per (H, length); sampling is
/// reentrant and may be called concurrently.
class CirculantFgn {
  public:
    CirculantFgn(HurstIndex h, std::size_t length);
    ~CirculantFgn();
    CirculantFgn(const CirculantFgn&) = delete;
    CirculantFgn& operator=(const CirculantFgn&) = delete;

    std::size_t length() const noexcept { return length_; }
    std::size_t embedding_size() const noexcept { return size_; }
    HurstIndex hurst() const noexcept { return h_; }
    /// Smallest eigenvalue before clamping.
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

    void sample(CounterRng& rng, std::span<double> out) const;
    std::vector<double> sample(std::uint64_t seed) const;

  private:
    struct Plan;
    HurstIndex h_;
    std::size_t length_;
    std::size_t size_;
    double min_eigenvalue_ = 0.0;
    std::vector<double> scale_; // sqrt(lambda_k / size)
    std::unique_ptr<Plan> plan_;
};

/// Direct sampler X = L Z with L the Cholesky factor of the Toeplitz
/// covariance; limited to kMaxCholeskyLength.
class CholeskyFgn {
  public:
    CholeskyFgn(HurstIndex h, std::size_t length);
    ~CholeskyFgn();
    CholeskyFgn(CholeskyFgn&&) noexcept;
    CholeskyFgn& operator=(CholeskyFgn&&) noexcept;

    std::size_t length() const noexcept { return length_; }
    void sample(CounterRng& rng, std::span<double> out) const;
    std::vector<double> sample(std::uint64_t seed) const;

  private:
    struct Factor;
    std::size_t length_;
    std::unique_ptr<Factor> factor_;
};

std::vector<double> generate_fgn(HurstIndex h, std::size_t length, std::uint64_t seed,
                                 GeneratorId generator = GeneratorId::circulant_embedding);

/// Reusable path factory for a fixed (H, N, r); the fGn spectrum is shared.
class PathSynthesizer {
  public:
    PathSynthesizer(HurstIndex h, int horizon_exponent, int resolution_exponent,
                    GeneratorId generator = GeneratorId::circulant_embedding);
    ~PathSynthesizer();

    FbmPath operator()(std::uint64_t seed) const;

    HurstIndex hurst() const noexcept { return h_; }
    int horizon_exponent() const noexcept { return horizon_exponent_; }
    int resolution_exponent() const noexcept { return resolution_exponent_; }

  private:
    HurstIndex h_;
    int horizon_exponent_;
    int resolution_exponent_;
    GeneratorId generator_;
    std::unique_ptr<CirculantFgn> circulant_;
    std::unique_ptr<CholeskyFgn> cholesky_;
};

FbmPath synthesize_path(HurstIndex h, int horizon_exponent, int resolution_exponent, std::uint64_t seed,
                        GeneratorId generator = GeneratorId::circulant_embedding);

/// Double integral over [0,1]^2 of 1 / sqrt(R(u,u) R(v,v) - R(u,v)^2),
/// to absolute accuracy `tolerance`.
double compute_I(HurstIndex h, double tolerance);

/// max over pairs of the grid of |u^2H v^2H R(1/u, 1/v) - R(u, v)|.
double time_inversion_covariance_residual(HurstIndex h, std::span<const double> grid);

} // namespace fbmdim

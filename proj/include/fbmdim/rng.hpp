#pragma once

#include <cstdint>
#include <limits>

namespace fbmdim {

/// Counter-based 64-bit generator.
///
/// Output k of a stream is a keyed bijective hash of k, so a stream can be
/// split into independent children by deriving new keys; no state is shared
/// between streams. Satisfies UniformRandomBitGenerator.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Child stream number `stream`; children of distinct indices are independent.
    CounterRng split(std::uint64_t stream) const noexcept;

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Standard normal draw (Box-Muller; the second variate is cached).
    double normal() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

  private:
    std::uint64_t seed_;
    std::uint64_t k0_;
    std::uint64_t k1_;
    std::uint64_t counter_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// Bijective 64-bit finalizer (splitmix64 / Stafford variant 13).
std::uint64_t mix64(std::uint64_t x) noexcept;

} // namespace fbmdim

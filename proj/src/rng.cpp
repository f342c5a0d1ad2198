#include "fbmdim/rng.hpp"

#include <cmath>
#include <numbers>

namespace fbmdim {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

CounterRng::CounterRng(std::uint64_t seed) noexcept
    : seed_(seed), k0_(mix64(seed ^ 0x9e3779b97f4a7c15ULL)), k1_(mix64(seed + 0x632be59bd9b4e019ULL)) {}

CounterRng::result_type CounterRng::operator()() noexcept {
    const std::uint64_t c = counter_++;
    return mix64(mix64(c + k0_) ^ k1_);
}

CounterRng CounterRng::split(std::uint64_t stream) const noexcept {
    return CounterRng(mix64(k1_ ^ mix64(stream + 0xd1b54a32d192ed03ULL)));
}

double CounterRng::uniform() noexcept {
    // 53 high bits mapped to (0,1): (k + 0.5) * 2^-53
    const std::uint64_t bits = (*this)() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

} // namespace fbmdim

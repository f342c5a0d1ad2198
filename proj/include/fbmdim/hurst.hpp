#pragma once

#include <stdexcept>
#include <string>

namespace fbmdim {

/// Hurst index H of a fractional Brownian motion, strictly inside (0, 1).
class HurstIndex {
  public:
    explicit HurstIndex(double h) : h_(h) {
        if (!(h > 0.0 && h < 1.0)) {
            throw std::invalid_argument("Hurst index must lie in (0,1), got " + std::to_string(h));
        }
    }

    double value() const noexcept { return h_; }
    double two_h() const noexcept { return 2.0 * h_; }

    friend bool operator==(HurstIndex a, HurstIndex b) noexcept { return a.h_ == b.h_; }

  private:
    double h_;
};

} // namespace fbmdim

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lse {

/// Seeded standard-normal stream: mt19937_64 uniforms mapped through the
/// Box-Muller transform. Both values of each Box-Muller pair are consumed,
/// so a fixed seed yields the same sequence on every platform (mt19937_64
/// output is fully specified by the standard).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so the log is finite, u2 in [0,1).
    const double u1 =
        1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lse

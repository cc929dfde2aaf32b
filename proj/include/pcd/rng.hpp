#pragma once

// Seeded random source for the planner. Stream id: "mt19937_64/unit-v1".
// One root stream per planner instance; draws are consumed strictly in
// cell-id order during sampling so runs replay identically everywhere.
// Doubles are built from the top 53 bits of the raw output instead of
// std::uniform_real_distribution, which is not portable bit-for-bit.

#include <cstdint>
#include <random>

namespace pcd {

class Rng {
  public:
    static constexpr const char* kStreamId = "mt19937_64/unit-v1";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform in [0, 1)
    double uniform_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform_in(double lo, double hi) {
        return lo + uniform_unit() * (hi - lo);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace pcd

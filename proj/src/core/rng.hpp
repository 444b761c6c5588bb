#pragma once

#include <cstdint>

namespace litetok {

// Splittable 64-bit generator (splitmix64). State transition:
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
//   z = (z ^ z>>27) * 0x94D049BB133111EB; output z ^ z>>31
// split(i) derives an independent child without advancing the parent:
//   child_state = finalize(finalize(state + (i+1) * 0x9E3779B97F4A7C15))
// Doubles use the top 53 bits; gaussians come from Box-Muller pairs.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64();
    double next_double();  // [0, 1)
    double uniform(double lo, double hi);
    int64_t uniform_int(int64_t lo, int64_t hi);  // inclusive bounds
    float gaussian();
    Rng split(uint64_t stream) const;

  private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace litetok

#include "core/rng.hpp"

#include <cmath>

#include "core/tensor.hpp"

namespace litetok {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

uint64_t finalize(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace

uint64_t Rng::next_u64() {
    state_ += kGolden;
    return finalize(state_);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
    if (hi < lo) throw ContractError("uniform_int: empty range");
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
}

float Rng::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return static_cast<float>(spare_);
    }
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return static_cast<float>(r * std::cos(a));
}

Rng Rng::split(uint64_t stream) const {
    return Rng(finalize(finalize(state_ + (stream + 1) * kGolden)));
}

}  // namespace litetok

#pragma once

#include <cstdint>

namespace ubi {

// Counter-free splitmix64 stream. Every entity (driver, instance, restart)
// gets its own stream derived from (seed, entity, purpose), so parallel
// execution order cannot change any drawn value.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t entity, std::uint64_t purpose)
        : state_(mix(mix(mix(0x9e3779b97f4a7c15ull ^ seed) + entity) + purpose)) {}

    explicit RngStream(std::uint64_t seed) : RngStream(seed, 0, 0) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform in [-1, 1].
    double symmetric() { return 2.0 * next_double() - 1.0; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

// Stream purposes; keep stable, they are part of the reproducibility contract.
namespace rng_purpose {
inline constexpr std::uint64_t kGenerate = 1;
inline constexpr std::uint64_t kWarmupDiscount = 2;
inline constexpr std::uint64_t kObservationNoise = 3;
inline constexpr std::uint64_t kFitStart = 4;
inline constexpr std::uint64_t kGapInstance = 5;
}  // namespace rng_purpose

}  // namespace ubi

#pragma once

#include <cstdint>
#include <string_view>

namespace murk {

// All procedural content is drawn from counter-based SplitMix64 streams so
// that generation is bit-exact across platforms and languages, and never
// depends on iteration or thread scheduling order.
//
// The generator is fully defined by:
//   mix64(z) = let z1 = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//              let z2 = (z1 ^ (z1 >> 27)) * 0x94D049BB133111EB
//              in  z2 ^ (z2 >> 31)
//   key(seed, tag, index) = mix64(mix64(seed + GOLDEN*tag) + GOLDEN*index)
//   draw n (1-based)      = mix64(key + GOLDEN*n)
// with GOLDEN = 0x9E3779B97F4A7C15 and all arithmetic modulo 2^64.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream tags: one per independent consumer of randomness.
enum class RngStream : std::uint64_t {
    kRocks = 1,
    kParticles = 2,
    kNoise = 3,
    kDatasetSplit = 4,
};

class CounterRng {
public:
    CounterRng(std::uint64_t seed, RngStream tag, std::uint64_t index)
        : key_(mix64(mix64(seed + kGolden * static_cast<std::uint64_t>(tag)) +
                     kGolden * index)) {}

    std::uint64_t next_u64() { return mix64(key_ + kGolden * ++count_); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_u01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_u01(); }

private:
    std::uint64_t key_;
    std::uint64_t count_ = 0;
};

// FNV-1a, used for config fingerprints in run manifests.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : data) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace murk

#pragma once

#include <cstdint>

namespace rankq {

// SplitMix64 finaliser; used to derive independent engine seeds from a
// master seed so that streams do not depend on scheduling.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
template <class Engine>
double unit_uniform(Engine& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// SplitMix64 as a UniformRandomBitGenerator. Cheap to construct, which suits
// the per-pair streams of the simulator.
class SplitMixEngine {
public:
    using result_type = std::uint64_t;

    explicit SplitMixEngine(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

}  // namespace rankq

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace aptsynth {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent, order-free stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stream tags keep derived streams of different subsystems apart.
enum class StreamTag : std::uint64_t {
    environment = 1,
    noise_segment = 2,
    noise_reroll = 3,
    campaign = 4,
    campaign_plan = 5,
    scenario = 6,
    test = 99,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0,
                                    std::uint64_t sub = 0) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ static_cast<std::uint64_t>(tag));
    h = mix64(h ^ index);
    return mix64(h ^ (sub * 0x2545f4914f6cdd1dull));
}

inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0, std::uint64_t sub = 0) {
    return Rng{derive_seed(seed, tag, index, sub)};
}

template <class Int>
Int uniform_int(Rng& rng, Int lo, Int hi) {
    return std::uniform_int_distribution<Int>{lo, hi}(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>{lo, hi}(rng);
}

// log-uniform on [lo, hi], lo > 0
inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(uniform_real(rng, std::log(lo), std::log(hi)));
}

// Index drawn proportionally to non-negative weights; at least one must be positive.
inline std::size_t weighted_index(Rng& rng, std::span<const double> weights) {
    return std::discrete_distribution<std::size_t>{weights.begin(), weights.end()}(rng);
}

}  // namespace aptsynth

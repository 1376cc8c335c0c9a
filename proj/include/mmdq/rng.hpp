#pragma once

#include <cstdint>
#include <limits>

namespace mmdq {

/// Counter-based 64-bit generator: output n is a pure function of (key, n),
/// i.e. SplitMix64 evaluated at state key + n * golden_gamma. Streams derived
/// from the same seed with different ids are independent.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + (counter_++) * kGamma); }

    /// A child stream, e.g. one per particle.
    CounterRng split(std::uint64_t stream) const { return CounterRng(mix(key_ ^ mix(stream + kGamma)), 0); }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    std::uint64_t key_;
    std::uint64_t counter_;
};

enum class Stream : std::uint64_t { Sampling = 1, Initialization = 2, Noise = 3, Cache = 4 };

inline CounterRng make_stream(std::uint64_t seed, Stream stream) {
    return CounterRng(CounterRng::mix(seed)).split(static_cast<std::uint64_t>(stream));
}

}  // namespace mmdq

#pragma once

#include <cstdint>

namespace invgap {

/// SplitMix64 finalizer. Used as the mixing function of the counter-based
/// generator below and for sub-seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based pseudo-random generator.
///
/// Output i for a given (seed, stream) pair is
///
///   mix64(key + i * 0x9e3779b97f4a7c15),  key = mix64(seed) ^ mix64(stream + 1)
///
/// so the stream is a pure function of (seed, stream, i). This makes every
/// stochastic result in the library bit-reproducible across platforms and
/// independent of how work is split across threads.
///
/// Uniform doubles lie strictly inside (0, 1). Gaussian draws use the
/// Box-Muller transform and consume exactly two uniforms each.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(seed) ^ mix64(stream + 1)) {}

    std::uint64_t next_u64() {
        return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform in the open interval (0, 1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    double next_gaussian();

    /// Deterministic sub-seed for chunk/worker `index` of a run seeded with
    /// `seed`. Results of chunked computations depend only on (seed, index).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        return mix64(mix64(seed) + index);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace invgap

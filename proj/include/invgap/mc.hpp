#pragma once

#include <cstdint>
#include <functional>

#include "invgap/gaussian.hpp"

namespace invgap {

/// Seeded Monte-Carlo estimate. Bit-reproducible from (seed, n): samples are
/// generated in fixed-size chunks with per-chunk sub-seeds, and partial sums
/// are combined by pairwise summation in fixed chunk order, so the result is
/// independent of the number of worker threads.
struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
};

using McSampler = std::function<Vector(CounterRng&)>;
using McFunction = std::function<double(const Vector&)>;

/// Default sample counts for oracle checks.
inline constexpr std::int64_t kIdentityCheckSamples = 100000;
inline constexpr std::int64_t kMomentCheckSamples = 1000000;

McEstimate mc_expectation(const McSampler& sampler, const McFunction& f, std::int64_t n,
                          std::uint64_t seed, int threads = 1);

/// Unbiased estimate of KL(q || p) from samples of q and the two log
/// densities. Throws (naming the offending sample) when a non-finite log
/// density is encountered.
McEstimate mc_kl(const McSampler& q_sampler, const McFunction& q_log_density,
                 const McFunction& p_log_density, std::int64_t n, std::uint64_t seed,
                 int threads = 1);

}  // namespace invgap

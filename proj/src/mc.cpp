#include "invgap/mc.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace invgap {

namespace {

constexpr std::int64_t kChunkSize = 4096;

double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

struct ChunkSums {
    std::vector<double> sum;
    std::vector<double> sum_sq;
};

ChunkSums run_chunks(const McSampler& sampler, const McFunction& f, std::int64_t n,
                     std::uint64_t seed, int threads) {
    const std::int64_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
    ChunkSums sums;
    sums.sum.assign(static_cast<std::size_t>(n_chunks), 0.0);
    sums.sum_sq.assign(static_cast<std::size_t>(n_chunks), 0.0);

    auto run_chunk = [&](std::int64_t c) {
        CounterRng rng(CounterRng::derive(seed, static_cast<std::uint64_t>(c)));
        const std::int64_t begin = c * kChunkSize;
        const std::int64_t end = std::min(n, begin + kChunkSize);
        double s = 0.0, s2 = 0.0;
        for (std::int64_t i = begin; i < end; ++i) {
            const Vector w = sampler(rng);
            const double v = f(w);
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "non-finite value at sample " << i << ": [" << w.transpose() << "]";
                throw std::runtime_error(msg.str());
            }
            s += v;
            s2 += v * v;
        }
        sums.sum[static_cast<std::size_t>(c)] = s;
        sums.sum_sq[static_cast<std::size_t>(c)] = s2;
    };

    if (threads <= 1 || n_chunks == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
        return sums;
    }

    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const int workers = std::min<std::int64_t>(threads, n_chunks);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t c = next.fetch_add(1);
                if (c >= n_chunks) return;
                try {
                    run_chunk(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return sums;
}

}  // namespace

McEstimate mc_expectation(const McSampler& sampler, const McFunction& f, std::int64_t n,
                          std::uint64_t seed, int threads) {
    if (n < 2) {
        throw std::invalid_argument("mc_expectation requires n >= 2");
    }
    const ChunkSums sums = run_chunks(sampler, f, n, seed, threads);
    const double total = pairwise_sum(sums.sum, 0, sums.sum.size());
    const double total_sq = pairwise_sum(sums.sum_sq, 0, sums.sum_sq.size());
    const double mean = total / static_cast<double>(n);
    const double var_num = total_sq - static_cast<double>(n) * mean * mean;
    const double sample_var = std::max(0.0, var_num / static_cast<double>(n - 1));
    McEstimate est;
    est.value = mean;
    est.std_error = std::sqrt(sample_var / static_cast<double>(n));
    est.n = n;
    est.seed = seed;
    return est;
}

McEstimate mc_kl(const McSampler& q_sampler, const McFunction& q_log_density,
                 const McFunction& p_log_density, std::int64_t n, std::uint64_t seed,
                 int threads) {
    return mc_expectation(
        q_sampler,
        [&](const Vector& w) { return q_log_density(w) - p_log_density(w); }, n, seed,
        threads);
}

}  // namespace invgap

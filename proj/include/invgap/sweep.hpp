#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "invgap/linear_model.hpp"

namespace invgap {

/// Noise variance used by the figure configurations, 1/(2 pi e).
inline constexpr double kInverseTwoPiE = 0.058549831524319168;

/// Experiment configuration shared by the gap and ELBO sweeps. Defaults
/// mirror the figure settings: N = 10 identical observations y = 1, x = 1,
/// sigma2_y = 1/(2 pi e), prior variance K * sigma2_0 with sigma2_0 = 1.
struct SweepConfig {
    std::vector<Index> k_values = default_k_values();
    Index n_obs = 10;
    double y_value = 1.0;
    double sigma2_y = kInverseTwoPiE;
    double sigma2_0 = 1.0;
    std::uint64_t seed = 0;

    /// 1..100 step 1, then geometric doubling 200..10^4.
    static std::vector<Index> default_k_values();
    /// k_min..k_max with the given step (step 0 keeps the default schedule).
    static std::vector<Index> range_k_values(Index k_min, Index k_max, Index k_step);

    TranslationLinearModel model_for(Index k) const;
    void validate() const;
};

/// CSV with columns k, gap_theta_mix_star, gap_theta_0_star,
/// data_related_bound; one row per K. Full double precision, LF endings,
/// byte-identical across runs of the same config.
std::string gap_sweep_csv(const SweepConfig& config);

/// CSV with columns k then ell/kl/elbo/predvar for the four combinations
/// {q0, qmix} x {theta_0_star, theta_mix_star}.
std::string elbo_sweep_csv(const SweepConfig& config);

void write_file(const std::string& path, const std::string& contents);

}  // namespace invgap

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "invgap/bnn.hpp"
#include "invgap/mlp.hpp"

namespace invgap {

/// Configuration of the network invariance check: architecture, seed, a
/// dataset (explicit, synthetic, or empty) and an optional layer-wise fit.
struct BnnCheckConfig {
    std::vector<Index> widths;  // n_0 .. n_L
    Activation activation = Activation::tanh;
    std::uint64_t seed = 0;
    double sigma2_y = 0.1;
    // Dataset: explicit inputs/targets win over synthetic generation.
    std::vector<Vector> inputs;
    Vector targets;
    Index synthetic_n = -1;  // >= 0 generates that many synthetic points
    bool run_fit = false;
    LayerwiseFitConfig fit;
    std::int64_t invariance_trials = 100;
    std::int64_t permutation_cap = 1000000;
};

BnnCheckConfig bnn_check_config_from_json(const nlohmann::json& j);

/// Runs translation/permutation invariance residual checks, the permutation
/// gap estimate when the permutation set is enumerable, and optionally the
/// layer-wise fit. Returns a machine-readable report.
nlohmann::json run_bnn_check(const BnnCheckConfig& config);

}  // namespace invgap

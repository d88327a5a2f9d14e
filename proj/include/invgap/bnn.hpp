#pragma once

#include <cstdint>
#include <vector>

#include "invgap/mixture.hpp"
#include "invgap/mlp.hpp"

namespace invgap {

struct McVariance {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
};

/// Monte-Carlo estimate of Var_{w ~ prior}[f(x; w)], the network output
/// variance under the prior. Feeds the data-related KL bound.
McVariance prior_output_variance(const MlpSpec& spec, const MomentGaussian& prior,
                                 const Vector& x, std::int64_t n_samples,
                                 std::uint64_t seed);

/// Per-node invariance-abiding posterior: one Gaussian component per
/// distinct activation sample z,
///   N(mu + (z^T(m - mu))/(z^T(V + Sigma)z) Sigma z,
///     Sigma - (1/(z^T(V + Sigma)z)) (Sigma z)(Sigma z)^T),
/// weighted by multiplicity (duplicate z deduplicated by exact match).
GaussianMixture layerwise_qmix(const Vector& prior_mean, const Vector& prior_var,
                               const Vector& m, const Vector& v,
                               const std::vector<Vector>& z_samples);

/// Ancestral samples of a node value: draw z from the incoming samples, draw
/// w from the node's qmix, emit h(w^T z).
std::vector<double> latent_activation_samples(const GaussianMixture& node_qmix,
                                              const std::vector<Vector>& incoming,
                                              Activation h, int count, std::uint64_t seed);

struct LayerwiseFitConfig {
    int activation_samples = 64;   // P samples per layer
    int max_sweeps = 50;
    int coordinate_passes = 3;     // passes over (m, v) per node per sweep
    int line_search_iters = 48;    // golden-section iterations per coordinate
    double param_tol = 1e-3;       // relative parameter change for convergence
    std::int64_t ell_mc_samples = 256;
    std::int64_t kl_mc_samples = 512;
    std::uint64_t seed = 0;
};

struct LayerwiseFitResult {
    // Likelihood-approximation parameters per node, indexed [layer-1][node].
    std::vector<std::vector<Vector>> m;
    std::vector<std::vector<Vector>> v;
    std::vector<double> trace;            // surrogate objective per sweep
    std::vector<double> trace_std_error;
    bool converged = false;
    int sweeps = 0;

    /// qmix of one node, built from the fitted parameters and the activation
    /// samples recorded for its input layer.
    GaussianMixture node_qmix(const MlpSpec& spec, const MomentGaussian& prior, Index l,
                              Index j) const;
    std::vector<std::vector<Vector>> activation_samples;  // per layer 0..L-1
};

/// Layer-by-layer iterative fit of the invariance-abiding approximation:
/// optimize the likelihood parameters of each layer's nodes under the
/// per-node qmix mixture with downstream layers at their current means,
/// sample activations forward, and sweep until the parameters settle or the
/// sweep cap is reached (non-convergence is reported, not thrown).
LayerwiseFitResult layerwise_fit(const MlpSpec& spec, const MomentGaussian& prior,
                                 const std::vector<Vector>& inputs, const Vector& targets,
                                 double sigma2_y, const LayerwiseFitConfig& config);

}  // namespace invgap

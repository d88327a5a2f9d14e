#pragma once

#include <vector>

#include "invgap/gaussian.hpp"

namespace invgap {

/// Finite Gaussian mixture. Weights are normalized at construction; the log
/// density is evaluated with log-sum-exp over all components.
class GaussianMixture {
public:
    GaussianMixture(std::vector<MomentGaussian> components, std::vector<double> weights);

    Index dim() const { return components_.front().dim(); }
    std::size_t size() const { return components_.size(); }
    const MomentGaussian& component(std::size_t i) const { return components_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }

    double log_density(const Vector& w) const;

    Vector sample_one(CounterRng& rng) const;
    Matrix sample(std::uint64_t seed, Index count) const;

private:
    std::vector<MomentGaussian> components_;
    std::vector<double> weights_;
    std::vector<double> log_weights_;
    std::vector<double> cumulative_;
};

}  // namespace invgap

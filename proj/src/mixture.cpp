#include "invgap/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace invgap {

GaussianMixture::GaussianMixture(std::vector<MomentGaussian> components,
                                 std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
    if (components_.empty() || components_.size() != weights_.size()) {
        throw std::invalid_argument("mixture: components/weights mismatch");
    }
    const Index k = components_.front().dim();
    double total = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        if (components_[i].dim() != k) {
            throw std::invalid_argument("mixture: component dimension mismatch");
        }
        if (!(weights_[i] > 0.0)) {
            throw std::invalid_argument("mixture: weights must be positive");
        }
        total += weights_[i];
    }
    cumulative_.resize(weights_.size());
    double running = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        weights_[i] /= total;
        running += weights_[i];
        cumulative_[i] = running;
        log_weights_.push_back(std::log(weights_[i]));
    }
    cumulative_.back() = 1.0;
}

double GaussianMixture::log_density(const Vector& w) const {
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) {
        terms[i] = log_weights_[i] + components_[i].log_density(w);
        max_term = std::max(max_term, terms[i]);
    }
    if (!std::isfinite(max_term)) {
        return max_term;
    }
    double acc = 0.0;
    for (double t : terms) {
        acc += std::exp(t - max_term);
    }
    return max_term + std::log(acc);
}

Vector GaussianMixture::sample_one(CounterRng& rng) const {
    const double u = rng.next_uniform();
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t idx =
        std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                              components_.size() - 1);
    return components_[idx].sample_one(rng);
}

Matrix GaussianMixture::sample(std::uint64_t seed, Index count) const {
    CounterRng rng(seed);
    Matrix out(dim(), count);
    for (Index c = 0; c < count; ++c) {
        out.col(c) = sample_one(rng);
    }
    return out;
}

}  // namespace invgap

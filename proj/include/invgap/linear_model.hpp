#pragma once

#include <cstdint>

#include "invgap/gaussian.hpp"

namespace invgap {

/// Over-parametrised Bayesian linear regression with a single shared input
/// direction: y = (1/K) x^T w + noise. The likelihood is invariant under
/// w -> w + B delta for any delta in the null space of x^T.
struct TranslationLinearModel {
    Index k = 1;
    Vector x;           // length k, defaults to all-ones
    Vector y;           // N observations
    double sigma2_y = 1.0;
    Vector prior_mean;  // defaults to zero
    Vector prior_var;   // defaults to k * sigma2_0 * ones

    /// Model with the default prior family: prior variance k * sigma2_0 per
    /// dimension (constant predictive variance in k) and n_obs identical
    /// observations of y_value.
    static TranslationLinearModel with_defaults(Index k, Index n_obs, double y_value,
                                                double sigma2_y, double sigma2_0);

    Index n_obs() const { return y.size(); }
    double sum_y() const { return y.sum(); }
    bool has_unit_x() const;
    void validate() const;
};

/// Variational likelihood approximation g0(w) = N(w; m, Diag(lambda)).
struct LikelihoodParams {
    Vector m;
    Vector lambda;
};

enum class PosteriorKind { mean_field, invariance_abiding };

struct ElboReport {
    double ell = 0.0;
    double kl = 0.0;
    double elbo = 0.0;  // always ell - kl
    double predictive_variance = 0.0;
    PosteriorKind which = PosteriorKind::mean_field;
};

/// Basis of the translation-invariant subspace, B = [I; -x_K^{-1} x_{K-1}^T]
/// with x^T B = 0. K x (K-1); empty for K = 1. Throws when x_K = 0.
Matrix b_matrix(const Vector& x);

/// Exact posterior N(m_p*, V_p*) with
/// V_p* = (N/(K^2 sigma2_y) x x^T + Sigma^{-1})^{-1} computed by the
/// Woodbury identity, m_p* = V_p* (Sigma^{-1} mu + (sum_y/(K sigma2_y)) x).
MomentGaussian true_posterior(const TranslationLinearModel& model);

/// Likelihood approximation marginalized over all translations: a degenerate
/// Gaussian with rank-one precision (1/(x^T Diag(lambda) x)) x x^T and
/// location m, kept in structured form.
NaturalGaussian mixture_likelihood(const TranslationLinearModel& model,
                                   const LikelihoodParams& theta);

struct Q0Result {
    MomentGaussian q0;  // diagonal
    double log_z0;
};

/// Mean-field posterior: elementwise product of prior and g0.
Q0Result q0_posterior(const TranslationLinearModel& model, const LikelihoodParams& theta);

struct QmixResult {
    MomentGaussian qmix;  // diagonal-minus-rank-one covariance, full matrix
    double log_zmix;
};

/// Invariance-abiding posterior:
/// N(mu + (x^T(m-mu))/(x^T(V+Sigma)x) Sigma x,
///   Sigma - (1/(x^T(V+Sigma)x)) (Sigma x)(Sigma x)^T).
QmixResult qmix_posterior(const TranslationLinearModel& model, const LikelihoodParams& theta);

/// Parameters maximizing the invariance-abiding ELBO. For x = 1 this is the
/// closed form m* = mean(y) * 1, lambda* = (K sigma2_y / N) * 1; for general
/// x the x-proportional representative of the optimal family is returned.
LikelihoodParams theta_mix_star(const TranslationLinearModel& model);

/// Parameters maximizing the mean-field ELBO: q0 at these matches the mean
/// and the precision diagonal of the true posterior (the KL-optimal diagonal
/// approximation). For x = 1 the variance is lambda = (K^2 sigma2_y / N) * 1,
/// a factor K above theta_mix_star.
LikelihoodParams theta_0_star(const TranslationLinearModel& model);

/// KL(q0 || qmix) for arbitrary theta, evaluated in O(K) through the
/// diagonal-minus-rank-one structure. Never forms a dense K x K matrix.
double invariance_gap(const TranslationLinearModel& model, const LikelihoodParams& theta);

/// Closed form of the gap when all components of lambda, m, prior variance
/// and prior mean are equal:
///   (K-1)/2 [ ln((sigma^2 + lambda)/lambda) + lambda/(sigma^2 + lambda) - 1 ].
/// Throws when components are unequal; use invariance_gap instead.
double invariance_gap_closed_form(const TranslationLinearModel& model,
                                  const LikelihoodParams& theta);

/// ELL, KL to prior, ELBO and predictive variance for q0 or qmix at theta.
/// All terms are exact closed forms evaluated in O(K).
ElboReport elbo_terms(const TranslationLinearModel& model, const LikelihoodParams& theta,
                      PosteriorKind which);

/// ln p(D) via N sequential conjugate updates (marginal of each observation
/// under the running posterior).
double log_evidence(const TranslationLinearModel& model);

}  // namespace invgap

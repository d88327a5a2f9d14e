#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "invgap/rng.hpp"

namespace invgap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Relative symmetry tolerance accepted for covariance/precision inputs.
inline constexpr double kSymmetryTol = 1e-12;
/// Eigenvalues larger than -kPsdTol * max eigenvalue count as nonnegative.
inline constexpr double kPsdTol = 1e-10;
/// Precision matrices with condition number above this are treated as
/// singular when converting to moment form.
inline constexpr double kMaxPrecisionCondition = 1e12;

/// Multivariate Gaussian in moment form (mean, covariance), with a diagonal
/// fast path. Values are immutable; the Cholesky factor is computed once at
/// construction, so instances are safe to share across threads.
class MomentGaussian {
public:
    static MomentGaussian diagonal(Vector mean, Vector variances);
    static MomentGaussian dense(Vector mean, Matrix covariance);

    Index dim() const { return mean_.size(); }
    const Vector& mean() const { return mean_; }
    bool is_diagonal() const { return diagonal_; }
    bool is_full_rank() const { return full_rank_; }

    /// Diagonal of the covariance (cheap in both representations).
    Vector variances() const;
    /// Dense covariance; materializes the diagonal representation.
    Matrix covariance() const;
    /// Variance vector of the diagonal representation. Throws for dense.
    const Vector& diagonal_variances() const;

    double log_det_covariance() const;

    /// Exact log density. Requires a full-rank covariance.
    double log_density(const Vector& w) const;

    /// `count` seeded draws, one per column. Identical (seed, count) give
    /// identical output. Requires a Cholesky-factorizable covariance.
    Matrix sample(std::uint64_t seed, Index count) const;
    Vector sample_one(CounterRng& rng) const;

private:
    MomentGaussian() = default;

    Vector mean_;
    bool diagonal_ = true;
    bool full_rank_ = false;
    Vector var_;       // diagonal representation
    Vector sqrt_var_;  // diagonal representation
    Matrix cov_;       // dense representation (symmetrized)
    Matrix chol_;      // lower Cholesky factor, dense full-rank only
    double log_det_ = 0.0;
};

/// Gaussian in canonical parameters (eta = Lambda * mean, Lambda = precision).
/// The precision may be rank deficient; the structured rank-one form
/// scale * direction * direction^T is kept symbolic and never inverted.
///
/// A rank-one factor with location m represents the normalized 1-d density
/// of the statistic direction^T w:
///     N(direction^T w ; direction^T m, 1/scale)
/// which fixes the normalization constant used in product().
class NaturalGaussian {
public:
    static NaturalGaussian dense(Vector eta, Matrix precision);
    static NaturalGaussian rank_one(double scale, Vector direction, Vector location);

    Index dim() const { return eta_.size(); }
    const Vector& eta() const { return eta_; }
    bool is_rank_one() const { return rank_one_; }

    /// Dense precision; expands scale * d d^T exactly for the rank-one form.
    Matrix precision() const;

    double rank_one_scale() const;
    const Vector& rank_one_direction() const;
    const Vector& rank_one_location() const;

private:
    NaturalGaussian() = default;

    Vector eta_;
    Matrix precision_;  // dense form
    bool rank_one_ = false;
    double scale_ = 0.0;
    Vector direction_;
    Vector location_;
};

NaturalGaussian to_natural(const MomentGaussian& g);

/// Inverse of to_natural. Throws if the precision is rank deficient or has
/// condition number above kMaxPrecisionCondition.
MomentGaussian to_moment(const NaturalGaussian& n);

struct GaussianProduct {
    NaturalGaussian result;
    /// log of the normalization constant of the density product,
    /// log integral a(w) b(w) dw. NaN when either dense operand is not
    /// full rank (the constant is then undefined).
    double log_partition;
};

/// Density product in canonical parameters: (eta1 + eta2, Lambda1 + Lambda2).
GaussianProduct product(const NaturalGaussian& a, const NaturalGaussian& b);

/// Affine observation map x = A theta + b (+ noise).
struct AffineMap {
    Matrix matrix;
    Vector offset;
};

/// Marginal of x under p(x|theta) = N(x; A theta + b, noise) and the given
/// prior over theta: N(A mu + b, noise + A Sigma A^T).
MomentGaussian convolve_affine(const AffineMap& map, const MomentGaussian& noise,
                               const MomentGaussian& prior);

/// Posterior over theta after observing x:
/// N(C^{-1}(A^T V^{-1}(x - b) + Sigma^{-1} mu), C^{-1}),
/// C = A^T V^{-1} A + Sigma^{-1}. Requires full-rank noise.
MomentGaussian condition_affine(const AffineMap& map, const MomentGaussian& noise,
                                const MomentGaussian& prior, const Vector& observation);

/// (Diag(c) + u v^T)^{-1} without forming a dense inverse of the update.
/// Throws when |1 + v^T Diag(c)^{-1} u| < 1e-14.
Matrix woodbury_rank1(const Vector& c_diag, const Vector& u, const Vector& v);

/// Exact KL(q || p) for Gaussians; diagonal fast path when both diagonal.
double kl_divergence(const MomentGaussian& q, const MomentGaussian& p);

}  // namespace invgap

#include "invgap/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace invgap {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_symmetric(const Matrix& m, const char* what) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double dev = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (dev > kSymmetryTol * scale) {
        throw std::invalid_argument(std::string(what) + " is not symmetric");
    }
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double gaussian_log_density_1d(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (d * d / var + std::log(var) + kLog2Pi);
}

}  // namespace

MomentGaussian MomentGaussian::diagonal(Vector mean, Vector variances) {
    if (mean.size() != variances.size()) {
        throw std::invalid_argument("mean/variance size mismatch");
    }
    if ((variances.array() <= 0.0).any()) {
        throw std::invalid_argument("diagonal variances must be positive");
    }
    MomentGaussian g;
    g.mean_ = std::move(mean);
    g.var_ = std::move(variances);
    g.sqrt_var_ = g.var_.cwiseSqrt();
    g.diagonal_ = true;
    g.full_rank_ = true;
    g.log_det_ = g.var_.array().log().sum();
    return g;
}

MomentGaussian MomentGaussian::dense(Vector mean, Matrix covariance) {
    if (covariance.rows() != covariance.cols() || covariance.rows() != mean.size()) {
        throw std::invalid_argument("covariance shape mismatch");
    }
    check_symmetric(covariance, "covariance");
    MomentGaussian g;
    g.mean_ = std::move(mean);
    g.cov_ = symmetrize(covariance);
    g.diagonal_ = false;

    Eigen::LLT<Matrix> llt(g.cov_);
    if (llt.info() == Eigen::Success) {
        g.full_rank_ = true;
        g.chol_ = llt.matrixL();
        g.log_det_ = 2.0 * g.chol_.diagonal().array().log().sum();
        return g;
    }
    // Not Cholesky-factorizable: accept PSD-singular, reject indefinite.
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.cov_, Eigen::EigenvaluesOnly);
    const double max_eig = std::max(es.eigenvalues().maxCoeff(), 0.0);
    if (es.eigenvalues().minCoeff() < -kPsdTol * std::max(max_eig, 1e-300)) {
        throw std::invalid_argument("covariance is not positive semi-definite");
    }
    g.full_rank_ = false;
    g.log_det_ = -std::numeric_limits<double>::infinity();
    return g;
}

Vector MomentGaussian::variances() const {
    return diagonal_ ? var_ : Vector(cov_.diagonal());
}

Matrix MomentGaussian::covariance() const {
    if (diagonal_) {
        return Matrix(var_.asDiagonal());
    }
    return cov_;
}

const Vector& MomentGaussian::diagonal_variances() const {
    if (!diagonal_) {
        throw std::logic_error("not in diagonal representation");
    }
    return var_;
}

double MomentGaussian::log_det_covariance() const {
    if (!full_rank_) {
        throw std::runtime_error("covariance is singular");
    }
    return log_det_;
}

double MomentGaussian::log_density(const Vector& w) const {
    if (w.size() != dim()) {
        throw std::invalid_argument("point dimension mismatch");
    }
    if (!full_rank_) {
        throw std::runtime_error("log_density requires full-rank covariance");
    }
    const Vector d = w - mean_;
    double quad;
    if (diagonal_) {
        quad = (d.array().square() / var_.array()).sum();
    } else {
        const Vector z = chol_.triangularView<Eigen::Lower>().solve(d);
        quad = z.squaredNorm();
    }
    return -0.5 * (quad + log_det_ + static_cast<double>(dim()) * kLog2Pi);
}

Matrix MomentGaussian::sample(std::uint64_t seed, Index count) const {
    if (!full_rank_) {
        throw std::runtime_error("sample requires Cholesky-factorizable covariance");
    }
    CounterRng rng(seed);
    Matrix out(dim(), count);
    for (Index c = 0; c < count; ++c) {
        out.col(c) = sample_one(rng);
    }
    return out;
}

Vector MomentGaussian::sample_one(CounterRng& rng) const {
    if (!full_rank_) {
        throw std::runtime_error("sample requires Cholesky-factorizable covariance");
    }
    Vector z(dim());
    for (Index i = 0; i < dim(); ++i) {
        z[i] = rng.next_gaussian();
    }
    if (diagonal_) {
        return mean_ + sqrt_var_.cwiseProduct(z);
    }
    return mean_ + chol_.triangularView<Eigen::Lower>() * z;
}

NaturalGaussian NaturalGaussian::dense(Vector eta, Matrix precision) {
    if (precision.rows() != precision.cols() || precision.rows() != eta.size()) {
        throw std::invalid_argument("precision shape mismatch");
    }
    check_symmetric(precision, "precision");
    Matrix p = symmetrize(precision);
    Eigen::SelfAdjointEigenSolver<Matrix> es(p, Eigen::EigenvaluesOnly);
    const double max_eig = std::max(es.eigenvalues().maxCoeff(), 0.0);
    if (es.eigenvalues().minCoeff() < -kPsdTol * std::max(max_eig, 1e-300)) {
        throw std::invalid_argument("precision is not positive semi-definite");
    }
    NaturalGaussian n;
    n.eta_ = std::move(eta);
    n.precision_ = std::move(p);
    return n;
}

NaturalGaussian NaturalGaussian::rank_one(double scale, Vector direction, Vector location) {
    if (direction.size() != location.size()) {
        throw std::invalid_argument("direction/location size mismatch");
    }
    if (!(scale > 0.0)) {
        throw std::invalid_argument("rank-one scale must be positive");
    }
    NaturalGaussian n;
    n.rank_one_ = true;
    n.scale_ = scale;
    n.direction_ = std::move(direction);
    n.location_ = std::move(location);
    n.eta_ = n.scale_ * n.direction_.dot(n.location_) * n.direction_;
    return n;
}

Matrix NaturalGaussian::precision() const {
    if (rank_one_) {
        return scale_ * direction_ * direction_.transpose();
    }
    return precision_;
}

double NaturalGaussian::rank_one_scale() const {
    if (!rank_one_) throw std::logic_error("not a rank-one precision");
    return scale_;
}

const Vector& NaturalGaussian::rank_one_direction() const {
    if (!rank_one_) throw std::logic_error("not a rank-one precision");
    return direction_;
}

const Vector& NaturalGaussian::rank_one_location() const {
    if (!rank_one_) throw std::logic_error("not a rank-one precision");
    return location_;
}

NaturalGaussian to_natural(const MomentGaussian& g) {
    if (!g.is_full_rank()) {
        throw std::runtime_error("to_natural requires full-rank covariance");
    }
    if (g.is_diagonal()) {
        const Vector prec = g.diagonal_variances().cwiseInverse();
        return NaturalGaussian::dense(prec.cwiseProduct(g.mean()), Matrix(prec.asDiagonal()));
    }
    const Matrix cov = g.covariance();
    Eigen::LLT<Matrix> llt(cov);
    Matrix lambda = llt.solve(Matrix::Identity(g.dim(), g.dim()));
    lambda = symmetrize(lambda);
    Vector eta = lambda * g.mean();
    return NaturalGaussian::dense(std::move(eta), std::move(lambda));
}

MomentGaussian to_moment(const NaturalGaussian& n) {
    if (n.is_rank_one()) {
        throw std::runtime_error("singular precision: rank-one form has no moment representation");
    }
    const Matrix lambda = n.precision();
    Eigen::SelfAdjointEigenSolver<Matrix> es(lambda, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    const double max_eig = es.eigenvalues().maxCoeff();
    if (min_eig <= 0.0 || max_eig / min_eig >= kMaxPrecisionCondition) {
        throw std::runtime_error("singular precision in to_moment");
    }
    Eigen::LLT<Matrix> llt(lambda);
    Matrix cov = llt.solve(Matrix::Identity(n.dim(), n.dim()));
    cov = symmetrize(cov);
    Vector mean = cov * n.eta();
    return MomentGaussian::dense(std::move(mean), std::move(cov));
}

namespace {

// log integral of the product of two normalized full-rank Gaussian densities.
double dense_log_partition(const NaturalGaussian& a, const NaturalGaussian& b) {
    const auto ga = to_moment(a);
    const auto gb = to_moment(b);
    const MomentGaussian conv =
        MomentGaussian::dense(gb.mean(), ga.covariance() + gb.covariance());
    return conv.log_density(ga.mean());
}

bool dense_full_rank(const NaturalGaussian& n) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(n.precision(), Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    const double max_eig = es.eigenvalues().maxCoeff();
    return min_eig > 0.0 && max_eig / min_eig < kMaxPrecisionCondition;
}

// log integral p(w) * N_1(d^T w; d^T loc, 1/scale) dw for full-rank p.
double rank_one_log_partition(const NaturalGaussian& full, const NaturalGaussian& r1) {
    const auto g = to_moment(full);
    const Vector& d = r1.rank_one_direction();
    const double stat_mean = d.dot(g.mean());
    const double stat_var = d.dot(g.covariance() * d);
    return gaussian_log_density_1d(stat_mean, d.dot(r1.rank_one_location()),
                                   1.0 / r1.rank_one_scale() + stat_var);
}

}  // namespace

GaussianProduct product(const NaturalGaussian& a, const NaturalGaussian& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("product: dimension mismatch");
    }
    if (a.is_rank_one() && b.is_rank_one()) {
        throw std::invalid_argument("product of two rank-one factors is not supported");
    }
    const Vector eta = a.eta() + b.eta();
    const Matrix lambda = a.precision() + b.precision();
    double logz = std::numeric_limits<double>::quiet_NaN();
    if (a.is_rank_one()) {
        if (dense_full_rank(b)) logz = rank_one_log_partition(b, a);
    } else if (b.is_rank_one()) {
        if (dense_full_rank(a)) logz = rank_one_log_partition(a, b);
    } else if (dense_full_rank(a) && dense_full_rank(b)) {
        logz = dense_log_partition(a, b);
    }
    return {NaturalGaussian::dense(eta, lambda), logz};
}

MomentGaussian convolve_affine(const AffineMap& map, const MomentGaussian& noise,
                               const MomentGaussian& prior) {
    const Matrix& a = map.matrix;
    if (a.cols() != prior.dim() || a.rows() != noise.dim() || map.offset.size() != a.rows()) {
        throw std::invalid_argument("convolve_affine: dimension mismatch");
    }
    const Vector mean = a * prior.mean() + map.offset;
    Matrix cov = noise.covariance() + a * prior.covariance() * a.transpose();
    return MomentGaussian::dense(mean, symmetrize(cov));
}

MomentGaussian condition_affine(const AffineMap& map, const MomentGaussian& noise,
                                const MomentGaussian& prior, const Vector& observation) {
    const Matrix& a = map.matrix;
    if (a.cols() != prior.dim() || a.rows() != noise.dim() || map.offset.size() != a.rows() ||
        observation.size() != a.rows()) {
        throw std::invalid_argument("condition_affine: dimension mismatch");
    }
    if (!noise.is_full_rank()) {
        throw std::runtime_error("condition_affine: singular noise covariance");
    }
    Matrix v_inv_a;   // V^{-1} A
    Vector v_inv_r;   // V^{-1} (x - b)
    const Vector resid = observation - map.offset;
    if (noise.is_diagonal()) {
        const Vector inv = noise.diagonal_variances().cwiseInverse();
        v_inv_a = inv.asDiagonal() * a;
        v_inv_r = inv.cwiseProduct(resid);
    } else {
        Eigen::LLT<Matrix> llt(noise.covariance());
        v_inv_a = llt.solve(a);
        v_inv_r = llt.solve(resid);
    }
    Matrix prior_prec;
    Vector prior_eta;
    if (prior.is_diagonal()) {
        const Vector inv = prior.diagonal_variances().cwiseInverse();
        prior_prec = inv.asDiagonal();
        prior_eta = inv.cwiseProduct(prior.mean());
    } else {
        Eigen::LLT<Matrix> llt(prior.covariance());
        prior_prec = llt.solve(Matrix::Identity(prior.dim(), prior.dim()));
        prior_eta = llt.solve(prior.mean());
    }
    const Matrix c = symmetrize(a.transpose() * v_inv_a + prior_prec);
    Eigen::LLT<Matrix> c_llt(c);
    if (c_llt.info() != Eigen::Success) {
        throw std::runtime_error("condition_affine: posterior precision not PD");
    }
    Matrix cov = c_llt.solve(Matrix::Identity(prior.dim(), prior.dim()));
    cov = symmetrize(cov);
    const Vector mean = c_llt.solve(a.transpose() * v_inv_r + prior_eta);
    return MomentGaussian::dense(mean, std::move(cov));
}

Matrix woodbury_rank1(const Vector& c_diag, const Vector& u, const Vector& v) {
    const Index k = c_diag.size();
    if (u.size() != k || v.size() != k) {
        throw std::invalid_argument("woodbury_rank1: dimension mismatch");
    }
    if ((c_diag.array() <= 0.0).any()) {
        throw std::invalid_argument("woodbury_rank1: diagonal must be positive");
    }
    const Vector c_inv = c_diag.cwiseInverse();
    const Vector cu = c_inv.cwiseProduct(u);
    const double denom = 1.0 + v.dot(cu);
    if (std::abs(denom) < 1e-14) {
        throw std::runtime_error("woodbury_rank1: singular rank-one update");
    }
    Matrix out = Matrix(c_inv.asDiagonal());
    out.noalias() -= cu * (v.cwiseProduct(c_inv)).transpose() / denom;
    return out;
}

double kl_divergence(const MomentGaussian& q, const MomentGaussian& p) {
    if (q.dim() != p.dim()) {
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    }
    if (!q.is_full_rank() || !p.is_full_rank()) {
        throw std::runtime_error("kl_divergence: singular covariance");
    }
    const Index k = q.dim();
    if (q.is_diagonal() && p.is_diagonal()) {
        const auto& vq = q.diagonal_variances().array();
        const auto& vp = p.diagonal_variances().array();
        const auto d = (q.mean() - p.mean()).array();
        return 0.5 * (vq / vp + d.square() / vp - 1.0 + vp.log() - vq.log()).sum();
    }
    const Matrix cov_q = q.covariance();
    const Matrix cov_p = p.covariance();
    Eigen::LLT<Matrix> llt_p(cov_p);
    const double trace = llt_p.solve(cov_q).trace();
    const Vector d = q.mean() - p.mean();
    const double quad = d.dot(llt_p.solve(d));
    return 0.5 * (trace + quad - static_cast<double>(k) + p.log_det_covariance() -
                  q.log_det_covariance());
}

}  // namespace invgap

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "invgap/bnn.hpp"
#include "invgap/linear_model.hpp"
#include "invgap/mc.hpp"
#include "invgap/sweep.hpp"

using namespace invgap;

namespace {

Vector random_vec(CounterRng& rng, Index n, double scale = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = scale * rng.next_gaussian();
    return v;
}

Vector random_positive(CounterRng& rng, Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = 0.4 + 2.0 * rng.next_uniform();
    return v;
}

}  // namespace

TEST_CASE("prior_output_variance of a linear read-out") {
    // f(x) = (1/K) 1^T w under prior N(0, K sigma2_0 I): variance sigma2_0.
    const Index k = 5;
    const double sigma2_0 = 1.3;
    const auto spec = MlpSpec::make({k, 1}, Activation::identity);
    const auto prior = MomentGaussian::diagonal(
        Vector::Zero(k), Vector::Constant(k, static_cast<double>(k) * sigma2_0));
    const Vector x = Vector::Constant(k, 1.0 / static_cast<double>(k));
    const auto var = prior_output_variance(spec, prior, x, 50000, 11);
    CHECK(std::abs(var.value - sigma2_0) < 3.0 * var.std_error);

    // (Near-)zero prior variance: no output variance.
    const auto tiny = MomentGaussian::diagonal(Vector::Zero(k), Vector::Constant(k, 1e-30));
    CHECK(prior_output_variance(spec, tiny, x, 2000, 13).value < 1e-25);

    CHECK_THROWS_AS(prior_output_variance(spec, prior, x, 10, 1), std::invalid_argument);
}

TEST_CASE("odd activation with a zero-mean prior gives a zero-mean output") {
    const auto spec = MlpSpec::make({2, 3, 1}, Activation::tanh);
    const auto prior =
        MomentGaussian::diagonal(Vector::Zero(spec.num_weights()),
                                 Vector::Ones(spec.num_weights()));
    const Vector x = (Vector(2) << 0.7, -0.4).finished();
    const auto mean = mc_expectation(
        [&](CounterRng& rng) { return prior.sample_one(rng); },
        [&](const Vector& w) { return forward(spec, w, x).output(); }, 100000, 17);
    CHECK(std::abs(mean.value) < 3.0 * mean.std_error);
}

TEST_CASE("layerwise_qmix reduces to the linear-model posterior for z = 1") {
    CounterRng rng(1);
    const Index k = 4;
    TranslationLinearModel model;
    model.k = k;
    model.x = Vector::Ones(k);
    model.y = Vector::Ones(1);
    model.sigma2_y = 1.0;
    model.prior_mean = random_vec(rng, k, 0.5);
    model.prior_var = random_positive(rng, k);
    const LikelihoodParams theta{random_vec(rng, k), random_positive(rng, k)};

    const auto mix = layerwise_qmix(model.prior_mean, model.prior_var, theta.m,
                                    theta.lambda, {Vector::Ones(k)});
    CHECK(mix.size() == 1);
    const auto oracle = qmix_posterior(model, theta);
    CHECK((mix.component(0).mean() - oracle.qmix.mean()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((mix.component(0).covariance() - oracle.qmix.covariance()).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("layerwise_qmix matches the general-x linear-model posterior per component") {
    CounterRng rng(2);
    const Index k = 3;
    for (int t = 0; t < 10; ++t) {
        Vector z = random_vec(rng, k, 1.0);
        if (std::abs(z[k - 1]) < 1e-3) z[k - 1] = 1.0;
        TranslationLinearModel model;
        model.k = k;
        model.x = z;
        model.y = Vector::Ones(1);
        model.sigma2_y = 1.0;
        model.prior_mean = random_vec(rng, k, 0.5);
        model.prior_var = random_positive(rng, k);
        const LikelihoodParams theta{random_vec(rng, k), random_positive(rng, k)};
        const auto mix = layerwise_qmix(model.prior_mean, model.prior_var, theta.m,
                                        theta.lambda, {z});
        const auto oracle = qmix_posterior(model, theta);
        CHECK((mix.component(0).mean() - oracle.qmix.mean()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((mix.component(0).covariance() - oracle.qmix.covariance())
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
}

TEST_CASE("layerwise_qmix deduplicates identical activation samples") {
    CounterRng rng(3);
    const Index k = 3;
    const Vector z = random_vec(rng, k);
    const Vector z2 = random_vec(rng, k);
    const auto mix = layerwise_qmix(Vector::Zero(k), Vector::Ones(k), random_vec(rng, k),
                                    random_positive(rng, k), {z, z, z2, z});
    CHECK(mix.size() == 2);
    CHECK(mix.weight(0) == doctest::Approx(0.75).epsilon(1e-15));

    CHECK_THROWS_AS(layerwise_qmix(Vector::Zero(k), Vector::Ones(k), Vector::Zero(k),
                                   Vector::Ones(k), {Vector::Zero(k)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(layerwise_qmix(Vector::Zero(k), Vector::Ones(k), Vector::Zero(k),
                                   Vector::Ones(k), {}),
                    std::invalid_argument);
}

TEST_CASE("layerwise_qmix components contract exactly one direction of the prior") {
    CounterRng rng(4);
    const Index k = 4;
    const Vector pv = random_positive(rng, k);
    const auto mix = layerwise_qmix(Vector::Zero(k), pv, random_vec(rng, k),
                                    random_positive(rng, k), {random_vec(rng, k)});
    const Matrix cov = mix.component(0).covariance();
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    // The determinant shrinks by 1 - s/t; a single rank-one contraction.
    const double det_ratio =
        std::exp(es.eigenvalues().array().log().sum() - pv.array().log().sum());
    CHECK(det_ratio < 1.0);
    CHECK(det_ratio > 0.0);
    // The covariance differs from Diag(pv) by a rank-one matrix.
    Eigen::JacobiSVD<Matrix> svd(cov - Matrix(pv.asDiagonal()));
    CHECK(svd.singularValues()[0] > 1e-12);
    CHECK(svd.singularValues()[1] < 1e-12);
}

TEST_CASE("latent_activation_samples") {
    // Identity activation, deterministic z = 1, near-point-mass at m:
    // every sample is about 1^T m.
    const Index k = 3;
    const Vector m = (Vector(3) << 0.3, -0.2, 0.5).finished();
    const auto point =
        MomentGaussian::diagonal(m, Vector::Constant(k, 1e-20));
    const GaussianMixture mix({point}, {1.0});
    const auto samples =
        latent_activation_samples(mix, {Vector::Ones(k)}, Activation::identity, 64, 5);
    for (double s : samples) {
        CHECK(s == doctest::Approx(m.sum()).epsilon(1e-8));
    }

    // Determinism: same seed, same stream.
    const auto again =
        latent_activation_samples(mix, {Vector::Ones(k)}, Activation::identity, 64, 5);
    CHECK(samples == again);
}

TEST_CASE("latent activation sampler matches a nested-expectation double loop") {
    CounterRng rng(6);
    const Index k = 3;
    std::vector<Vector> incoming;
    for (int i = 0; i < 4; ++i) incoming.push_back(random_vec(rng, k));
    const auto comp =
        MomentGaussian::diagonal(random_vec(rng, k), random_positive(rng, k));
    const GaussianMixture mix({comp}, {1.0});

    const auto samples =
        latent_activation_samples(mix, incoming, Activation::tanh, 200000, 7);
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double sq = 0.0;
    for (double s : samples) sq += (s - mean) * (s - mean);
    const double se = std::sqrt(sq / static_cast<double>(samples.size() - 1) /
                                static_cast<double>(samples.size()));

    // Double loop: for each incoming z, the inner expectation over w.
    double nested = 0.0;
    CounterRng inner_rng(8);
    const int inner = 50000;
    for (const Vector& z : incoming) {
        double acc = 0.0;
        for (int i = 0; i < inner; ++i) {
            acc += std::tanh(comp.sample_one(inner_rng).dot(z));
        }
        nested += acc / inner;
    }
    nested /= static_cast<double>(incoming.size());
    CHECK(std::abs(mean - nested) < 3.0 * se + 0.01);
}

TEST_CASE("layerwise_fit recovers the linear-model optimum (single identity layer)") {
    // The canonical translation-invariant data: K = 3 weights, x = 1/K, ten
    // observations y = 1, noise (2 pi e)^{-1}, prior variance K per weight.
    const Index k = 3;
    const auto spec = MlpSpec::make({k, 1}, Activation::identity);
    const auto prior = MomentGaussian::diagonal(
        Vector::Zero(k), Vector::Constant(k, static_cast<double>(k)));
    const Vector x_input = Vector::Constant(k, 1.0 / static_cast<double>(k));
    const Index n_obs = 10;
    std::vector<Vector> inputs(n_obs, x_input);
    const Vector targets = Vector::Ones(n_obs);

    LayerwiseFitConfig config;
    config.seed = 31;
    const auto fit =
        layerwise_fit(spec, prior, inputs, targets, kInverseTwoPiE, config);
    CHECK(fit.sweeps >= 1);

    const auto model = TranslationLinearModel::with_defaults(k, n_obs, 1.0, kInverseTwoPiE, 1.0);
    const auto oracle = qmix_posterior(model, theta_mix_star(model));

    const auto fitted = fit.node_qmix(spec, prior, 1, 0);
    CHECK(fitted.size() == 1);
    const Vector fitted_mean = fitted.component(0).mean();
    // Means within 2 percent (the oracle mean direction is x = 1, scaled).
    for (Index i = 0; i < k; ++i) {
        CHECK(std::abs(fitted_mean[i] - oracle.qmix.mean()[i]) <
              0.02 * std::abs(oracle.qmix.mean()[i]));
    }
    // Predictive variance within 5 percent.
    const double fitted_pred =
        x_input.dot(fitted.component(0).covariance() * x_input) + kInverseTwoPiE;
    const auto oracle_terms =
        elbo_terms(model, theta_mix_star(model), PosteriorKind::invariance_abiding);
    CHECK(std::abs(fitted_pred - oracle_terms.predictive_variance) <
          0.05 * oracle_terms.predictive_variance);
}

TEST_CASE("layerwise_fit with no data reverts to the prior") {
    const auto spec = MlpSpec::make({2, 2, 1}, Activation::tanh);
    const Index dim = spec.num_weights();
    const auto prior = MomentGaussian::diagonal(Vector::Zero(dim), Vector::Ones(dim));
    LayerwiseFitConfig config;
    config.seed = 37;
    config.max_sweeps = 4;
    const auto fit = layerwise_fit(spec, prior, {}, Vector(0), 0.1, config);
    for (Index l = 1; l <= spec.num_layers(); ++l) {
        for (Index j = 0; j < spec.layer_rows(l); ++j) {
            const auto qmix = fit.node_qmix(spec, prior, l, j);
            const auto idx = spec.node_indices(l, j);
            Vector pm(static_cast<Index>(idx.size()));
            Vector pv(static_cast<Index>(idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i) {
                pm[static_cast<Index>(i)] = 0.0;
                pv[static_cast<Index>(i)] = 1.0;
            }
            double kl = 0.0;
            for (std::size_t c = 0; c < qmix.size(); ++c) {
                kl += qmix.weight(c) * kl_divergence(qmix.component(c),
                                                     MomentGaussian::diagonal(pm, pv));
            }
            CHECK(kl < 1e-3);
        }
    }
}

TEST_CASE("layerwise_fit trace is monotone up to Monte-Carlo noise") {
    const auto spec = MlpSpec::make({2, 1}, Activation::identity);
    const auto prior = MomentGaussian::diagonal(Vector::Zero(2), Vector::Constant(2, 2.0));
    CounterRng rng(9);
    std::vector<Vector> inputs;
    Vector targets(6);
    for (int n = 0; n < 6; ++n) {
        inputs.push_back(random_vec(rng, 2));
        targets[n] = rng.next_gaussian();
    }
    LayerwiseFitConfig config;
    config.seed = 41;
    config.max_sweeps = 6;
    config.param_tol = 0.0;  // force all sweeps to observe the trace
    const auto fit = layerwise_fit(spec, prior, inputs, targets, 0.3, config);
    CHECK(fit.sweeps == 6);
    CHECK(fit.trace.size() == 6);
    for (std::size_t i = 1; i < fit.trace.size(); ++i) {
        const double slack =
            3.0 * (fit.trace_std_error[i] + fit.trace_std_error[i - 1]) + 1e-9;
        CHECK(fit.trace[i] >= fit.trace[i - 1] - slack);
    }

    CHECK_THROWS_AS(layerwise_fit(MlpSpec::make({40, 40, 1}, Activation::tanh),
                                  MomentGaussian::diagonal(Vector::Zero(1640),
                                                           Vector::Ones(1640)),
                                  inputs, targets, 0.3, config),
                    std::invalid_argument);
}

TEST_CASE("layerwise_fit runs with relu activations") {
    // Relu layers can emit exactly-zero activation samples; the fit must
    // filter them rather than abort.
    const auto spec = MlpSpec::make({1, 2, 1}, Activation::relu);
    const Index dim = spec.num_weights();
    const auto prior = MomentGaussian::diagonal(Vector::Zero(dim), Vector::Ones(dim));
    CounterRng rng(11);
    std::vector<Vector> inputs;
    Vector targets(5);
    for (int n = 0; n < 5; ++n) {
        inputs.push_back(random_vec(rng, 1));
        targets[n] = rng.next_gaussian();
    }
    LayerwiseFitConfig config;
    config.seed = 17;
    config.max_sweeps = 3;
    config.activation_samples = 16;
    const auto fit = layerwise_fit(spec, prior, inputs, targets, 0.2, config);
    CHECK(fit.sweeps >= 1);
    CHECK(fit.trace.size() == static_cast<std::size_t>(fit.sweeps));
}

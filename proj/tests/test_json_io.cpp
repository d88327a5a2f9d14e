#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "invgap/json_io.hpp"

using namespace invgap;

namespace {

Vector random_vec(CounterRng& rng, Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.next_gaussian();
    return v;
}

}  // namespace

TEST_CASE("gaussian json round trip, diagonal and dense") {
    CounterRng rng(1);
    const auto diag = MomentGaussian::diagonal(random_vec(rng, 3),
                                               (Vector(3) << 0.5, 1.5, 2.5).finished());
    const Json dj = gaussian_to_json(diag);
    CHECK(dj.contains("diag"));
    const auto diag2 = gaussian_from_json(dj);
    CHECK(diag2.is_diagonal());
    CHECK((diag2.mean() - diag.mean()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((diag2.diagonal_variances() - diag.diagonal_variances()).cwiseAbs().maxCoeff() ==
          0.0);

    Matrix cov(2, 2);
    cov << 2.0, 0.3, 0.3, 1.0;
    const auto dense = MomentGaussian::dense(random_vec(rng, 2), cov);
    const Json sj = gaussian_to_json(dense);
    CHECK(sj.contains("cov"));
    CHECK(sj["cov"].size() == 4);
    const auto dense2 = gaussian_from_json(sj);
    CHECK((dense2.covariance() - dense.covariance()).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(gaussian_from_json(Json{{"mean", {0.0, 0.0}}, {"cov", {1.0}}}),
                    std::invalid_argument);
}

TEST_CASE("model and theta round trips") {
    const auto model = TranslationLinearModel::with_defaults(4, 6, 1.0, 0.25, 2.0);
    const auto back = model_from_json(model_to_json(model));
    CHECK(back.k == 4);
    CHECK((back.prior_var - model.prior_var).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.y - model.y).cwiseAbs().maxCoeff() == 0.0);

    // Defaults are filled in when omitted.
    Json minimal;
    minimal["k"] = 3;
    minimal["y"] = {1.0, 1.0};
    minimal["sigma2_y"] = 0.5;
    minimal["sigma2_0"] = 2.0;
    const auto filled = model_from_json(minimal);
    CHECK(filled.x == Vector::Ones(3));
    CHECK(filled.prior_var == Vector::Constant(3, 6.0));

    const LikelihoodParams theta{(Vector(2) << 1.0, -1.0).finished(),
                                 (Vector(2) << 0.5, 0.7).finished()};
    const auto theta2 = theta_from_json(theta_to_json(theta));
    CHECK((theta2.m - theta.m).cwiseAbs().maxCoeff() == 0.0);
    CHECK((theta2.lambda - theta.lambda).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mlp spec round trip") {
    const auto spec = MlpSpec::make({1, 2, 2, 1}, Activation::tanh);
    const auto back = mlp_spec_from_json(mlp_spec_to_json(spec));
    CHECK(back.layer_widths == spec.layer_widths);
    CHECK(back.activations == spec.activations);
    CHECK_THROWS_AS(mlp_spec_from_json(Json{{"widths", {3}}}), std::invalid_argument);
}

TEST_CASE("sweep config parsing") {
    Json j;
    j["k_min"] = 2;
    j["k_max"] = 8;
    j["k_step"] = 3;
    j["sigma2_y"] = "1/(2*pi*e)";
    j["n_obs"] = 5;
    const auto config = sweep_config_from_json(j);
    CHECK(config.k_values == std::vector<Index>{2, 5, 8});
    CHECK(config.sigma2_y == doctest::Approx(kInverseTwoPiE).epsilon(1e-15));
    CHECK(config.n_obs == 5);

    // Defaults: the documented K schedule.
    const auto defaults = sweep_config_from_json(Json::object());
    CHECK(defaults.k_values.front() == 1);
    CHECK(defaults.k_values.back() == 10000);
    CHECK(defaults.k_values.size() == 107);

    const auto round = sweep_config_from_json(sweep_config_to_json(config));
    CHECK(round.k_values == config.k_values);
    CHECK(round.sigma2_y == config.sigma2_y);
}

TEST_CASE("report serializers") {
    ConditionReport report;
    report.condition1_max_log_density_gap = 1e-12;
    report.samples_checked = 100;
    report.pass = true;
    const Json j = condition_report_to_json(report);
    CHECK(j["pass"] == true);
    CHECK(j["samples_checked"] == 100);

    McEstimate est{1.5, 0.1, 1000, 7};
    const Json mj = mc_estimate_to_json(est);
    CHECK(mj["value"] == 1.5);
    CHECK(mj["n"] == 1000);
}

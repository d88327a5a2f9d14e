#include "invgap/json_io.hpp"

#include <stdexcept>

namespace invgap {

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected a JSON array");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json vector_to_json(const Vector& v) {
    Json j = Json::array();
    for (Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

Json gaussian_to_json(const MomentGaussian& g) {
    Json j;
    j["mean"] = vector_to_json(g.mean());
    if (g.is_diagonal()) {
        j["diag"] = vector_to_json(g.diagonal_variances());
    } else {
        const Matrix cov = g.covariance();
        Json flat = Json::array();
        for (Index r = 0; r < cov.rows(); ++r) {
            for (Index c = 0; c < cov.cols(); ++c) flat.push_back(cov(r, c));
        }
        j["cov"] = std::move(flat);
    }
    return j;
}

MomentGaussian gaussian_from_json(const Json& j) {
    const Vector mean = vector_from_json(j.at("mean"));
    if (j.contains("diag")) {
        return MomentGaussian::diagonal(mean, vector_from_json(j.at("diag")));
    }
    const Json& flat = j.at("cov");
    const Index k = mean.size();
    if (static_cast<Index>(flat.size()) != k * k) {
        throw std::invalid_argument("cov array must have dim^2 entries");
    }
    Matrix cov(k, k);
    for (Index r = 0; r < k; ++r) {
        for (Index c = 0; c < k; ++c) {
            cov(r, c) = flat[static_cast<std::size_t>(r * k + c)].get<double>();
        }
    }
    return MomentGaussian::dense(mean, cov);
}

Json model_to_json(const TranslationLinearModel& model) {
    Json j;
    j["k"] = model.k;
    j["x"] = vector_to_json(model.x);
    j["y"] = vector_to_json(model.y);
    j["sigma2_y"] = model.sigma2_y;
    j["prior_mean"] = vector_to_json(model.prior_mean);
    j["prior_var"] = vector_to_json(model.prior_var);
    return j;
}

TranslationLinearModel model_from_json(const Json& j) {
    TranslationLinearModel model;
    model.k = j.at("k").get<Index>();
    model.x = j.contains("x") ? vector_from_json(j.at("x")) : Vector::Ones(model.k);
    model.y = vector_from_json(j.at("y"));
    model.sigma2_y = j.at("sigma2_y").get<double>();
    model.prior_mean =
        j.contains("prior_mean") ? vector_from_json(j.at("prior_mean")) : Vector::Zero(model.k);
    if (j.contains("prior_var")) {
        model.prior_var = vector_from_json(j.at("prior_var"));
    } else {
        const double sigma2_0 = j.value("sigma2_0", 1.0);
        model.prior_var =
            Vector::Constant(model.k, static_cast<double>(model.k) * sigma2_0);
    }
    model.validate();
    return model;
}

Json theta_to_json(const LikelihoodParams& theta) {
    Json j;
    j["m"] = vector_to_json(theta.m);
    j["lambda"] = vector_to_json(theta.lambda);
    return j;
}

LikelihoodParams theta_from_json(const Json& j) {
    return {vector_from_json(j.at("m")), vector_from_json(j.at("lambda"))};
}

Json mlp_spec_to_json(const MlpSpec& spec) {
    Json j;
    j["widths"] = spec.layer_widths;
    Json acts = Json::array();
    for (Activation a : spec.activations) acts.push_back(activation_name(a));
    j["activations"] = std::move(acts);
    return j;
}

MlpSpec mlp_spec_from_json(const Json& j) {
    MlpSpec spec;
    spec.layer_widths = j.at("widths").get<std::vector<Index>>();
    if (j.contains("activations")) {
        for (const auto& a : j.at("activations")) {
            spec.activations.push_back(activation_from_name(a.get<std::string>()));
        }
    } else {
        spec.activations.assign(spec.layer_widths.size() - 1, Activation::tanh);
    }
    spec.validate();
    return spec;
}

Json sweep_config_to_json(const SweepConfig& config) {
    Json j;
    j["k_values"] = config.k_values;
    j["n_obs"] = config.n_obs;
    j["y"] = config.y_value;
    j["sigma2_y"] = config.sigma2_y;
    j["sigma2_0"] = config.sigma2_0;
    j["seed"] = config.seed;
    return j;
}

SweepConfig sweep_config_from_json(const Json& j) {
    SweepConfig config;
    if (j.contains("k_values")) {
        config.k_values = j.at("k_values").get<std::vector<Index>>();
    } else if (j.contains("k_min") || j.contains("k_max")) {
        config.k_values = SweepConfig::range_k_values(
            j.value("k_min", Index{1}), j.value("k_max", Index{100}), j.value("k_step", Index{1}));
    }
    config.n_obs = j.value("n_obs", config.n_obs);
    config.y_value = j.value("y", config.y_value);
    if (j.contains("sigma2_y")) {
        const Json& s = j.at("sigma2_y");
        if (s.is_string() && s.get<std::string>() == "1/(2*pi*e)") {
            config.sigma2_y = kInverseTwoPiE;
        } else {
            config.sigma2_y = s.get<double>();
        }
    }
    config.sigma2_0 = j.value("sigma2_0", config.sigma2_0);
    config.seed = j.value("seed", config.seed);
    config.validate();
    return config;
}

Json mc_estimate_to_json(const McEstimate& est) {
    Json j;
    j["value"] = est.value;
    j["std_error"] = est.std_error;
    j["n"] = est.n;
    j["seed"] = est.seed;
    return j;
}

Json condition_report_to_json(const ConditionReport& report) {
    Json j;
    j["condition1_max_log_density_gap"] = report.condition1_max_log_density_gap;
    j["condition2_max_logdet_deviation"] = report.condition2_max_logdet_deviation;
    j["samples_checked"] = report.samples_checked;
    j["pass"] = report.pass;
    return j;
}

Json gap_identity_to_json(const GapIdentityReport& report) {
    Json j;
    j["kl_q0_p"] = mc_estimate_to_json(report.kl_q0_p);
    j["kl_qmix_p"] = mc_estimate_to_json(report.kl_qmix_p);
    j["kl_q0_qmix"] = mc_estimate_to_json(report.kl_q0_qmix);
    j["residual"] = report.residual;
    j["residual_std_error"] = report.residual_std_error;
    return j;
}

Json fit_result_to_json(const LayerwiseFitResult& result) {
    Json j;
    Json layers = Json::array();
    for (std::size_t l = 0; l < result.m.size(); ++l) {
        Json nodes = Json::array();
        for (std::size_t n = 0; n < result.m[l].size(); ++n) {
            Json node;
            node["m"] = vector_to_json(result.m[l][n]);
            node["v"] = vector_to_json(result.v[l][n]);
            nodes.push_back(std::move(node));
        }
        layers.push_back(std::move(nodes));
    }
    j["layers"] = std::move(layers);
    j["trace"] = result.trace;
    j["trace_std_error"] = result.trace_std_error;
    j["converged"] = result.converged;
    j["sweeps"] = result.sweeps;
    return j;
}

}  // namespace invgap

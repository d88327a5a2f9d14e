#include "invgap/invgap.h"

#include <cstring>
#include <new>
#include <stdexcept>
#include <string>

#include "invgap/bnn_check.hpp"
#include "invgap/invariance.hpp"
#include "invgap/json_io.hpp"
#include "invgap/linear_model.hpp"
#include "invgap/sweep.hpp"
#include "invgap/verify.hpp"

using invgap::Index;
using invgap::Matrix;
using invgap::Vector;

struct ig_gaussian_s {
    invgap::MomentGaussian g;
};

struct ig_model_s {
    invgap::TranslationLinearModel m;
};

struct ig_mlp_s {
    invgap::MlpSpec spec;
};

namespace {

thread_local std::string g_last_error;

ig_status fail(ig_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
ig_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        return fail(IG_ERROR_INVALID_ARGUMENT, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(IG_ERROR_INVALID_ARGUMENT, e.what());
    } catch (const std::runtime_error& e) {
        return fail(IG_ERROR_NUMERICAL, e.what());
    } catch (const std::bad_alloc&) {
        return fail(IG_ERROR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(IG_ERROR_INTERNAL, e.what());
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

Vector to_vector(const double* data, Index n) {
    return Eigen::Map<const Vector>(data, n);
}

invgap::LikelihoodParams theta_from(const ig_model* m, const double* theta_m,
                                    const double* theta_lambda) {
    return {to_vector(theta_m, m->m.k), to_vector(theta_lambda, m->m.k)};
}

}  // namespace

extern "C" {

const char* ig_version(void) { return "0.1.0"; }

const char* ig_last_error(void) { return g_last_error.c_str(); }

void ig_string_free(char* s) { delete[] s; }

/* ---- Gaussians -------------------------------------------------------- */

ig_status ig_gaussian_create_diagonal(int64_t dim, const double* mean,
                                      const double* variances, ig_gaussian** out) {
    if (!mean || !variances || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        *out = new ig_gaussian_s{invgap::MomentGaussian::diagonal(to_vector(mean, dim),
                                                                  to_vector(variances, dim))};
        return IG_OK;
    });
}

ig_status ig_gaussian_create_dense(int64_t dim, const double* mean,
                                   const double* cov_row_major, ig_gaussian** out) {
    if (!mean || !cov_row_major || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        Matrix cov(dim, dim);
        for (Index r = 0; r < dim; ++r) {
            for (Index c = 0; c < dim; ++c) cov(r, c) = cov_row_major[r * dim + c];
        }
        *out = new ig_gaussian_s{invgap::MomentGaussian::dense(to_vector(mean, dim), cov)};
        return IG_OK;
    });
}

void ig_gaussian_free(ig_gaussian* g) { delete g; }

int64_t ig_gaussian_dim(const ig_gaussian* g) { return g ? g->g.dim() : 0; }

ig_status ig_gaussian_mean(const ig_gaussian* g, double* out) {
    if (!g || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    Eigen::Map<Vector>(out, g->g.dim()) = g->g.mean();
    return IG_OK;
}

ig_status ig_gaussian_covariance(const ig_gaussian* g, double* out_row_major) {
    if (!g || !out_row_major) return fail(IG_ERROR_NULL_POINTER, "null argument");
    const Matrix cov = g->g.covariance();
    for (Index r = 0; r < cov.rows(); ++r) {
        for (Index c = 0; c < cov.cols(); ++c) out_row_major[r * cov.cols() + c] = cov(r, c);
    }
    return IG_OK;
}

ig_status ig_gaussian_log_density(const ig_gaussian* g, const double* w, double* out) {
    if (!g || !w || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        *out = g->g.log_density(to_vector(w, g->g.dim()));
        return IG_OK;
    });
}

ig_status ig_gaussian_sample(const ig_gaussian* g, uint64_t seed, int64_t count, double* out) {
    if (!g || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        const Matrix draws = g->g.sample(seed, count);  // dim x count
        for (Index c = 0; c < count; ++c) {
            for (Index r = 0; r < g->g.dim(); ++r) out[c * g->g.dim() + r] = draws(r, c);
        }
        return IG_OK;
    });
}

ig_status ig_gaussian_kl(const ig_gaussian* q, const ig_gaussian* p, double* out) {
    if (!q || !p || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        *out = invgap::kl_divergence(q->g, p->g);
        return IG_OK;
    });
}

ig_status ig_gaussian_to_json(const ig_gaussian* g, char** json_out) {
    if (!g || !json_out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        *json_out = copy_string(invgap::gaussian_to_json(g->g).dump());
        return IG_OK;
    });
}

ig_status ig_gaussian_from_json(const char* json, ig_gaussian** out) {
    if (!json || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        *out = new ig_gaussian_s{
            invgap::gaussian_from_json(nlohmann::json::parse(json))};
        return IG_OK;
    });
}

/* ---- Translation-invariant linear model ------------------------------- */

ig_status ig_model_create(int64_t k, const double* x, const double* y, int64_t n_obs,
                          double sigma2_y, const double* prior_mean, const double* prior_var,
                          double sigma2_0, ig_model** out) {
    if (!y || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        invgap::TranslationLinearModel model;
        model.k = k;
        model.x = x ? to_vector(x, k) : Vector::Ones(k);
        model.y = to_vector(y, n_obs);
        model.sigma2_y = sigma2_y;
        model.prior_mean = prior_mean ? to_vector(prior_mean, k) : Vector::Zero(k);
        model.prior_var = prior_var
                              ? to_vector(prior_var, k)
                              : Vector::Constant(k, static_cast<double>(k) * sigma2_0);
        model.validate();
        *out = new ig_model_s{std::move(model)};
        return IG_OK;
    });
}

void ig_model_free(ig_model* m) { delete m; }

ig_status ig_model_theta_mix_star(const ig_model* m, double* m_out, double* lambda_out) {
    if (!m || !m_out || !lambda_out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        const auto theta = invgap::theta_mix_star(m->m);
        Eigen::Map<Vector>(m_out, m->m.k) = theta.m;
        Eigen::Map<Vector>(lambda_out, m->m.k) = theta.lambda;
        return IG_OK;
    });
}

ig_status ig_model_theta_0_star(const ig_model* m, double* m_out, double* lambda_out) {
    if (!m || !m_out || !lambda_out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        const auto theta = invgap::theta_0_star(m->m);
        Eigen::Map<Vector>(m_out, m->m.k) = theta.m;
        Eigen::Map<Vector>(lambda_out, m->m.k) = theta.lambda;
        return IG_OK;
    });
}

ig_status ig_model_invariance_gap(const ig_model* m, const double* theta_m,
                                  const double* theta_lambda, double* gap_out) {
    if (!m || !theta_m || !theta_lambda || !gap_out) {
        return fail(IG_ERROR_NULL_POINTER, "null argument");
    }
    return guarded([&] {
        *gap_out = invgap::invariance_gap(m->m, theta_from(m, theta_m, theta_lambda));
        return IG_OK;
    });
}

ig_status ig_model_elbo_terms(const ig_model* m, const double* theta_m,
                              const double* theta_lambda, int32_t which, double* ell,
                              double* kl, double* elbo, double* predictive_variance) {
    if (!m || !theta_m || !theta_lambda) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        const auto report = invgap::elbo_terms(
            m->m, theta_from(m, theta_m, theta_lambda),
            which == 0 ? invgap::PosteriorKind::mean_field
                       : invgap::PosteriorKind::invariance_abiding);
        if (ell) *ell = report.ell;
        if (kl) *kl = report.kl;
        if (elbo) *elbo = report.elbo;
        if (predictive_variance) *predictive_variance = report.predictive_variance;
        return IG_OK;
    });
}

ig_status ig_model_data_related_bound(const ig_model* m, double* out) {
    if (!m || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        // sigma2_L(x) under the default prior family Sigma = Diag(sigma^2):
        // Var[(1/K) x^T w] = (1/K^2) sum x_i^2 sigma_i^2, identical per row.
        const double k = static_cast<double>(m->m.k);
        const double var =
            m->m.x.cwiseProduct(m->m.x).dot(m->m.prior_var) / (k * k);
        *out = invgap::data_related_bound(Vector::Constant(m->m.n_obs(), var), m->m.y,
                                          m->m.sigma2_y);
        return IG_OK;
    });
}

ig_status ig_model_log_evidence(const ig_model* m, double* out) {
    if (!m || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        *out = invgap::log_evidence(m->m);
        return IG_OK;
    });
}

ig_status ig_model_true_posterior(const ig_model* m, ig_gaussian** out) {
    if (!m || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        *out = new ig_gaussian_s{invgap::true_posterior(m->m)};
        return IG_OK;
    });
}

ig_status ig_model_q0_posterior(const ig_model* m, const double* theta_m,
                                const double* theta_lambda, ig_gaussian** out,
                                double* log_z0) {
    if (!m || !theta_m || !theta_lambda || !out) {
        return fail(IG_ERROR_NULL_POINTER, "null argument");
    }
    return guarded([&] {
        auto result = invgap::q0_posterior(m->m, theta_from(m, theta_m, theta_lambda));
        *out = new ig_gaussian_s{std::move(result.q0)};
        if (log_z0) *log_z0 = result.log_z0;
        return IG_OK;
    });
}

ig_status ig_model_qmix_posterior(const ig_model* m, const double* theta_m,
                                  const double* theta_lambda, ig_gaussian** out,
                                  double* log_zmix) {
    if (!m || !theta_m || !theta_lambda || !out) {
        return fail(IG_ERROR_NULL_POINTER, "null argument");
    }
    return guarded([&] {
        auto result = invgap::qmix_posterior(m->m, theta_from(m, theta_m, theta_lambda));
        *out = new ig_gaussian_s{std::move(result.qmix)};
        if (log_zmix) *log_zmix = result.log_zmix;
        return IG_OK;
    });
}

/* ---- Feed-forward networks -------------------------------------------- */

ig_status ig_mlp_create(const int64_t* widths, int64_t n_widths, const char* activation,
                        ig_mlp** out) {
    if (!widths || !activation || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        std::vector<Index> w(widths, widths + n_widths);
        *out = new ig_mlp_s{
            invgap::MlpSpec::make(std::move(w), invgap::activation_from_name(activation))};
        return IG_OK;
    });
}

void ig_mlp_free(ig_mlp* mlp) { delete mlp; }

int64_t ig_mlp_num_weights(const ig_mlp* mlp) { return mlp ? mlp->spec.num_weights() : 0; }

ig_status ig_mlp_forward(const ig_mlp* mlp, const double* w, const double* x, double* out) {
    if (!mlp || !w || !x || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        *out = invgap::forward(mlp->spec, to_vector(w, mlp->spec.num_weights()),
                               to_vector(x, mlp->spec.layer_widths.front()))
                   .output();
        return IG_OK;
    });
}

ig_status ig_mlp_permutation_count(const ig_mlp* mlp, int64_t* out) {
    if (!mlp || !out) return fail(IG_ERROR_NULL_POINTER, "null argument");
    return guarded([&] {
        *out = invgap::permutation_count(mlp->spec);
        return IG_OK;
    });
}

/* ---- Experiment runners ------------------------------------------------ */

namespace {

ig_status run_sweep(const char* config_json, const char* out_path, char** csv_out,
                    bool elbo) {
    if (!config_json) return fail(IG_ERROR_NULL_POINTER, "null config");
    return guarded([&]() -> ig_status {
        const auto config =
            invgap::sweep_config_from_json(nlohmann::json::parse(config_json));
        const std::string csv =
            elbo ? invgap::elbo_sweep_csv(config) : invgap::gap_sweep_csv(config);
        if (out_path) {
            try {
                invgap::write_file(out_path, csv);
            } catch (const std::runtime_error& e) {
                return fail(IG_ERROR_IO, e.what());
            }
        }
        if (csv_out) *csv_out = copy_string(csv);
        return IG_OK;
    });
}

}  // namespace

ig_status ig_run_gap_sweep(const char* config_json, const char* out_path, char** csv_out) {
    return run_sweep(config_json, out_path, csv_out, false);
}

ig_status ig_run_elbo_sweep(const char* config_json, const char* out_path, char** csv_out) {
    return run_sweep(config_json, out_path, csv_out, true);
}

ig_status ig_run_verify(const char* suite, uint64_t seed, const char* widths_json,
                        char** json_out, int32_t* all_passed) {
    if (!suite) return fail(IG_ERROR_NULL_POINTER, "null suite");
    return guarded([&] {
        std::vector<std::int64_t> widths;
        if (widths_json) {
            widths = nlohmann::json::parse(widths_json).get<std::vector<std::int64_t>>();
        }
        const auto report = invgap::run_verify(suite, seed, widths);
        if (json_out) *json_out = copy_string(invgap::verify_report_to_json(report).dump(2));
        if (all_passed) *all_passed = report.pass ? 1 : 0;
        return IG_OK;
    });
}

ig_status ig_run_bnn_check(const char* config_json, char** json_out, int32_t* all_passed) {
    if (!config_json) return fail(IG_ERROR_NULL_POINTER, "null config");
    return guarded([&] {
        const auto config =
            invgap::bnn_check_config_from_json(nlohmann::json::parse(config_json));
        const auto report = invgap::run_bnn_check(config);
        if (json_out) *json_out = copy_string(report.dump(2));
        if (all_passed) *all_passed = report["pass"].get<bool>() ? 1 : 0;
        return IG_OK;
    });
}

}  // extern "C"

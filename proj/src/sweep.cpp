#include "invgap/sweep.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "invgap/invariance.hpp"

namespace invgap {

namespace {

void append_value(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

void append_row_start(std::string& out, Index k) {
    out += std::to_string(k);
}

}  // namespace

std::vector<Index> SweepConfig::default_k_values() {
    std::vector<Index> ks;
    for (Index k = 1; k <= 100; ++k) ks.push_back(k);
    for (Index k = 200; k < 10000; k *= 2) ks.push_back(k);
    ks.push_back(10000);
    return ks;
}

std::vector<Index> SweepConfig::range_k_values(Index k_min, Index k_max, Index k_step) {
    if (k_step <= 0) return default_k_values();
    if (k_min < 1 || k_max < k_min) {
        throw std::invalid_argument("invalid k range");
    }
    std::vector<Index> ks;
    for (Index k = k_min; k <= k_max; k += k_step) ks.push_back(k);
    return ks;
}

TranslationLinearModel SweepConfig::model_for(Index k) const {
    return TranslationLinearModel::with_defaults(k, n_obs, y_value, sigma2_y, sigma2_0);
}

void SweepConfig::validate() const {
    if (k_values.empty()) throw std::invalid_argument("k_values must be nonempty");
    for (Index k : k_values) {
        if (k < 1) throw std::invalid_argument("k values must be >= 1");
    }
    if (n_obs < 1) throw std::invalid_argument("n_obs must be >= 1");
    if (!(sigma2_y > 0.0)) throw std::invalid_argument("sigma2_y must be positive");
    if (!(sigma2_0 > 0.0)) throw std::invalid_argument("sigma2_0 must be positive");
}

std::string gap_sweep_csv(const SweepConfig& config) {
    config.validate();
    std::string out = "k,gap_theta_mix_star,gap_theta_0_star,data_related_bound\n";
    for (Index k : config.k_values) {
        const TranslationLinearModel model = config.model_for(k);
        const double gap_mix = invariance_gap_closed_form(model, theta_mix_star(model));
        const double gap_0 = invariance_gap_closed_form(model, theta_0_star(model));
        // sigma2_L(x) = sigma2_0 for the prior with variance K sigma2_0.
        const double bound = data_related_bound(
            Vector::Constant(config.n_obs, config.sigma2_0), model.y, config.sigma2_y);
        append_row_start(out, k);
        out += ',';
        append_value(out, gap_mix);
        out += ',';
        append_value(out, gap_0);
        out += ',';
        append_value(out, bound);
        out += '\n';
    }
    return out;
}

std::string elbo_sweep_csv(const SweepConfig& config) {
    config.validate();
    std::string out = "k";
    static const char* posterior_names[] = {"q0", "qmix"};
    static const char* theta_names[] = {"theta0", "thetamix"};
    static const char* term_names[] = {"ell", "kl", "elbo", "predvar"};
    for (const char* q : posterior_names) {
        for (const char* th : theta_names) {
            for (const char* term : term_names) {
                out += ',';
                out += q;
                out += '_';
                out += th;
                out += '_';
                out += term;
            }
        }
    }
    out += '\n';
    for (Index k : config.k_values) {
        const TranslationLinearModel model = config.model_for(k);
        const LikelihoodParams thetas[2] = {theta_0_star(model), theta_mix_star(model)};
        append_row_start(out, k);
        for (PosteriorKind which :
             {PosteriorKind::mean_field, PosteriorKind::invariance_abiding}) {
            for (const LikelihoodParams& theta : thetas) {
                const ElboReport r = elbo_terms(model, theta, which);
                for (double v : {r.ell, r.kl, r.elbo, r.predictive_variance}) {
                    out += ',';
                    append_value(out, v);
                }
            }
        }
        out += '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream stream(path, std::ios::binary);
    if (!stream) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    stream << contents;
    if (!stream) {
        throw std::runtime_error("failed writing output file: " + path);
    }
}

}  // namespace invgap

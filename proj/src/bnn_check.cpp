#include "invgap/bnn_check.hpp"

#include <cmath>
#include <stdexcept>

#include "invgap/invariance.hpp"
#include "invgap/json_io.hpp"
#include "invgap/mc.hpp"

namespace invgap {

BnnCheckConfig bnn_check_config_from_json(const nlohmann::json& j) {
    BnnCheckConfig config;
    config.widths = j.at("widths").get<std::vector<Index>>();
    config.activation = activation_from_name(j.value("activation", std::string("tanh")));
    config.seed = j.value("seed", std::uint64_t{0});
    config.sigma2_y = j.value("sigma2_y", 0.1);
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        for (const auto& row : d.at("x")) {
            config.inputs.push_back(vector_from_json(row));
        }
        config.targets = vector_from_json(d.at("y"));
    } else {
        config.synthetic_n = j.value("synthetic_n", Index{-1});
    }
    config.run_fit = j.value("fit", false);
    config.fit.seed = config.seed;
    config.fit.activation_samples = j.value("fit_activation_samples", 64);
    config.fit.max_sweeps = j.value("fit_max_sweeps", 50);
    config.invariance_trials = j.value("invariance_trials", std::int64_t{100});
    return config;
}

nlohmann::json run_bnn_check(const BnnCheckConfig& config) {
    MlpSpec spec = MlpSpec::make(config.widths, config.activation);
    const Index dim = spec.num_weights();
    if (dim > 1000) {
        throw std::invalid_argument("network too large: bnn-check is limited to 1000 weights");
    }

    nlohmann::json report;
    report["spec"] = mlp_spec_to_json(spec);
    report["num_weights"] = dim;

    // Dataset: explicit, synthetic from a random teacher net, or empty.
    std::vector<Vector> inputs = config.inputs;
    Vector targets = config.targets;
    CounterRng rng(CounterRng::derive(config.seed, 0xDA7A));
    if (inputs.empty() && config.synthetic_n > 0) {
        Vector teacher(dim);
        for (Index i = 0; i < dim; ++i) teacher[i] = rng.next_gaussian();
        targets.resize(config.synthetic_n);
        for (Index n = 0; n < config.synthetic_n; ++n) {
            Vector x(spec.layer_widths.front());
            for (Index i = 0; i < x.size(); ++i) x[i] = rng.next_gaussian();
            inputs.push_back(x);
            targets[n] = forward(spec, teacher, x).output() +
                         std::sqrt(config.sigma2_y) * rng.next_gaussian();
        }
    }
    report["n_data"] = static_cast<Index>(inputs.size());

    const auto prior = MomentGaussian::diagonal(Vector::Zero(dim), Vector::Ones(dim));

    // Translation invariance: per-input node translations must keep f(x).
    {
        double worst = 0.0;
        std::int64_t checked = 0;
        for (std::int64_t t = 0; t < config.invariance_trials; ++t) {
            Vector w(dim), x(spec.layer_widths.front());
            for (Index i = 0; i < dim; ++i) w[i] = rng.next_gaussian();
            for (Index i = 0; i < x.size(); ++i) x[i] = rng.next_gaussian();
            const auto fwd = forward(spec, w, x);
            const Index l = 1 + static_cast<Index>(
                                    rng.next_uniform() *
                                    static_cast<double>(spec.num_layers()));
            const Index j = static_cast<Index>(
                rng.next_uniform() * static_cast<double>(spec.layer_rows(l)));
            const Vector& z = fwd.activations[static_cast<std::size_t>(l - 1)];
            if (z.size() < 2) continue;
            const auto basis = build_bz(z);
            Vector delta(basis.b.cols());
            for (Index i = 0; i < delta.size(); ++i) delta[i] = 2.0 * rng.next_gaussian();
            WeightVector wv{spec, w};
            wv.set_node(l, j, translate_node(wv.node(l, j), basis, delta));
            worst = std::max(worst, std::abs(forward(spec, wv.flat, x).output() - fwd.output()));
            ++checked;
        }
        report["translation"]["max_output_residual"] = worst;
        report["translation"]["trials"] = checked;
        report["translation"]["pass"] = worst < 1e-9;
    }

    // Permutation invariance and gap (enumerable sets only).
    const std::int64_t n_perms = permutation_count(spec);
    report["permutation"]["count"] = n_perms;
    if (n_perms <= config.permutation_cap) {
        const auto perms = enumerate_permutations(spec, config.permutation_cap);
        double worst = 0.0;
        bool exact = true;
        for (const auto& p : perms) {
            const auto map = permutation_index_map(spec, p);
            for (int t = 0; t < 10; ++t) {
                Vector w(dim), x(spec.layer_widths.front());
                for (Index i = 0; i < dim; ++i) w[i] = rng.next_gaussian();
                for (Index i = 0; i < x.size(); ++i) x[i] = rng.next_gaussian();
                const Vector pw = apply_permutation(spec, p, w);
                Vector pw_kron(dim);
                for (Index i = 0; i < dim; ++i) pw_kron[i] = w[map[static_cast<std::size_t>(i)]];
                exact = exact && (pw.array() == pw_kron.array()).all();
                worst = std::max(worst, std::abs(forward(spec, pw, x).output() -
                                                 forward(spec, w, x).output()));
            }
        }
        report["permutation"]["max_output_residual"] = worst;
        report["permutation"]["kronecker_equals_layer_path"] = exact;
        report["permutation"]["pass"] = worst < 1e-9 && exact;

        // Monte-Carlo permutation gap for a separated likelihood mode.
        std::vector<Matrix> matrices;
        for (const auto& p : perms) matrices.push_back(permutation_matrix(spec, p));
        Vector m(dim);
        for (Index i = 0; i < dim; ++i) m[i] = (i % 2 == 0 ? 8.0 : -8.0);
        const auto pair =
            make_permutation_pair(prior, m, Vector::Constant(dim, 0.05), matrices);
        const auto gap = invariance_gap(pair, GapMethod::monte_carlo, 50000,
                                        CounterRng::derive(config.seed, 0x6A9));
        report["permutation"]["gap"] = gap.gap;
        report["permutation"]["gap_std_error"] = gap.std_error;
        report["permutation"]["gap_upper_bound"] = std::log(static_cast<double>(n_perms));
    }

    // Prior output variance at one probe input (first data point if any).
    {
        Vector x0;
        if (!inputs.empty()) {
            x0 = inputs.front();
        } else {
            x0 = Vector::Ones(spec.layer_widths.front());
        }
        const auto var = prior_output_variance(spec, prior, x0, 20000,
                                               CounterRng::derive(config.seed, 0x0F));
        report["prior_output_variance"]["value"] = var.value;
        report["prior_output_variance"]["std_error"] = var.std_error;
        report["data_related_bound"] =
            inputs.empty()
                ? 0.0
                : data_related_bound(Vector::Constant(targets.size(), var.value), targets,
                                     config.sigma2_y);
    }

    if (config.run_fit) {
        LayerwiseFitConfig fit_config = config.fit;
        fit_config.seed = CounterRng::derive(config.seed, 0xF17);
        const auto fit = layerwise_fit(spec, prior, inputs, targets, config.sigma2_y,
                                       fit_config);
        report["fit"] = fit_result_to_json(fit);
        if (inputs.empty()) {
            // No data: the fitted posterior must revert to the prior.
            double worst_kl = 0.0;
            for (Index l = 1; l <= spec.num_layers(); ++l) {
                for (Index j = 0; j < spec.layer_rows(l); ++j) {
                    const auto qmix = fit.node_qmix(spec, prior, l, j);
                    const auto idx = spec.node_indices(l, j);
                    Vector pm(static_cast<Index>(idx.size())), pv(static_cast<Index>(idx.size()));
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                        pm[static_cast<Index>(i)] = prior.mean()[idx[i]];
                        pv[static_cast<Index>(i)] = 1.0;
                    }
                    worst_kl = std::max(
                        worst_kl, kl_divergence(qmix.component(0),
                                                MomentGaussian::diagonal(pm, pv)));
                }
            }
            report["fit"]["max_node_kl_to_prior"] = worst_kl;
            report["fit"]["reverts_to_prior"] = worst_kl < 1e-3;
        }
    }

    bool pass = report["translation"]["pass"].get<bool>();
    if (report["permutation"].contains("pass")) {
        pass = pass && report["permutation"]["pass"].get<bool>();
    }
    report["pass"] = pass;
    return report;
}

}  // namespace invgap

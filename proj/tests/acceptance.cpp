// Acceptance suite: one integration check per analytic claim of the library,
// run at fixed tolerances and seeds. Prints one PASS/FAIL line per criterion
// (with per-sub-check detail) and exits nonzero when any executed criterion
// fails. An optional argument selects a single criterion by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "invgap/bnn.hpp"
#include "invgap/invariance.hpp"
#include "invgap/linear_model.hpp"
#include "invgap/mc.hpp"
#include "invgap/mlp.hpp"
#include "invgap/sweep.hpp"

using namespace invgap;

namespace {

constexpr double kTwoPiE = 17.079468445347132;

struct SubCheck {
    std::string name;
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    std::function<std::vector<SubCheck>()> run;
};

SubCheck residual_check(const std::string& name, double residual, double tol) {
    char detail[128];
    std::snprintf(detail, sizeof(detail), "residual %.3g, tolerance %.3g", residual, tol);
    return {name, residual < tol, detail};
}

Vector random_vec(CounterRng& rng, Index n, double scale = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = scale * rng.next_gaussian();
    return v;
}

// Random (K <= max_k, theta, prior) draw inside the family where conditions
// (product identity, volume preservation) hold: lambda proportional to the
// prior variances.
struct Draw {
    TranslationLinearModel model;
    LikelihoodParams theta;
};

Draw random_draw(CounterRng& rng, Index max_k) {
    const Index k = 1 + static_cast<Index>(rng.next_uniform() * static_cast<double>(max_k));
    TranslationLinearModel model;
    model.k = k;
    model.x = Vector::Ones(k);
    model.y = random_vec(rng, 1 + static_cast<Index>(rng.next_uniform() * 10.0), 1.5);
    model.sigma2_y = 0.2 + rng.next_uniform();
    model.prior_mean = random_vec(rng, k, 0.5);
    model.prior_var = Vector::Constant(k, 0.5 + 2.0 * rng.next_uniform());
    LikelihoodParams theta{random_vec(rng, k, 2.0),
                           (0.2 + 3.0 * rng.next_uniform()) * model.prior_var};
    return {std::move(model), std::move(theta)};
}

TranslationLinearModel figure_model(Index k) {
    return TranslationLinearModel::with_defaults(k, 10, 1.0, kInverseTwoPiE, 1.0);
}

double linear_model_loglik(const TranslationLinearModel& model, const Vector& w) {
    const double pred = model.x.dot(w) / static_cast<double>(model.k);
    double acc = 0.0;
    for (Index i = 0; i < model.n_obs(); ++i) {
        const double r = model.y[i] - pred;
        acc += -r * r / (2.0 * model.sigma2_y);
    }
    return acc - 0.5 * static_cast<double>(model.n_obs()) *
                     std::log(2.0 * 3.14159265358979323846 * model.sigma2_y);
}

// --- criterion 1: gap identity ------------------------------------------

std::vector<SubCheck> criterion_gap_identity() {
    const auto start = std::chrono::steady_clock::now();
    CounterRng rng(1001);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const Draw d = random_draw(rng, 20);
        const auto q0 = q0_posterior(d.model, d.theta);
        const auto qmix = qmix_posterior(d.model, d.theta);
        const auto prior = MomentGaussian::diagonal(d.model.prior_mean, d.model.prior_var);
        const double residual = (kl_divergence(q0.q0, prior) -
                                 kl_divergence(qmix.qmix, prior)) -
                                kl_divergence(q0.q0, qmix.qmix);
        worst = std::max(worst, std::abs(residual));
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<SubCheck> checks;
    checks.push_back(residual_check("max |(KL(q0||p) - KL(qmix||p)) - KL(q0||qmix)| over "
                                    "1000 draws",
                                    worst, 1e-9));
    checks.push_back(residual_check("runtime seconds", seconds, 10.0));
    return checks;
}

// --- criterion 2: predictive equivalence --------------------------------

std::vector<SubCheck> criterion_predictive_equivalence() {
    CounterRng rng(1002);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const Draw d = random_draw(rng, 20);
        const auto mf = elbo_terms(d.model, d.theta, PosteriorKind::mean_field);
        const auto ia = elbo_terms(d.model, d.theta, PosteriorKind::invariance_abiding);
        worst = std::max(worst, std::abs(mf.ell - ia.ell));
    }
    std::vector<SubCheck> checks;
    checks.push_back(
        residual_check("max closed-form |ELL(q0) - ELL(qmix)| over 1000 draws", worst,
                       1e-10));

    double worst_z = 0.0;
    for (int t = 0; t < 10; ++t) {
        const Draw d = random_draw(rng, 8);
        const auto prior = MomentGaussian::diagonal(d.model.prior_mean, d.model.prior_var);
        const auto pair =
            make_translation_pair(d.model.x, prior, d.theta.m, d.theta.lambda);
        const auto model = d.model;
        const auto eq = ell_equivalence_check(
            pair, [model](const Vector& w) { return linear_model_loglik(model, w); },
            100000, 2000 + static_cast<std::uint64_t>(t));
        worst_z = std::max(worst_z, std::abs(eq.z_score));
    }
    checks.push_back(residual_check(
        "max |z| of the Monte-Carlo ELL difference, 10 draws at 1e5 samples", worst_z,
        3.0));
    return checks;
}

// --- criterion 3: true-posterior recovery -------------------------------

std::vector<SubCheck> criterion_posterior_recovery() {
    double worst = 0.0, worst_evidence = 0.0;
    for (Index k = 1; k <= 200; ++k) {
        const auto model = figure_model(k);
        const auto theta = theta_mix_star(model);
        const auto qmix = qmix_posterior(model, theta);
        const auto post = true_posterior(model);
        worst = std::max(worst, (qmix.qmix.mean() - post.mean()).cwiseAbs().maxCoeff());
        worst = std::max(
            worst, (qmix.qmix.covariance() - post.covariance()).cwiseAbs().maxCoeff());
        const auto report = elbo_terms(model, theta, PosteriorKind::invariance_abiding);
        worst_evidence =
            std::max(worst_evidence, std::abs(report.elbo - log_evidence(model)));
    }
    std::vector<SubCheck> checks;
    checks.push_back(residual_check(
        "max |qmix(theta_mix*) - true posterior| over K = 1..200 (mean and covariance)",
        worst, 1e-10));
    checks.push_back(residual_check("max |ELBO(qmix, theta_mix*) - ln p(D)| over K = 1..200",
                                    worst_evidence, 1e-9));
    return checks;
}

// --- criterion 4: mean-field optimum ------------------------------------

std::vector<SubCheck> criterion_mean_field_optimum() {
    std::vector<SubCheck> checks;
    double worst_ratio = 0.0;
    bool optimal = true;
    CounterRng rng(1004);
    for (Index k : {Index{2}, Index{10}, Index{50}}) {
        const auto model = figure_model(k);
        const auto t0 = theta_0_star(model);
        const auto tm = theta_mix_star(model);
        for (Index i = 0; i < k; ++i) {
            worst_ratio = std::max(
                worst_ratio, std::abs(t0.lambda[i] / tm.lambda[i] / static_cast<double>(k) -
                                      1.0));
        }
        const double best = elbo_terms(model, t0, PosteriorKind::mean_field).elbo;
        for (int t = 0; t < 100; ++t) {
            LikelihoodParams perturbed{
                t0.m + random_vec(rng, k, 0.3),
                t0.lambda.cwiseProduct(random_vec(rng, k, 0.3).array().exp().matrix())};
            if (elbo_terms(model, perturbed, PosteriorKind::mean_field).elbo >
                best + 1e-12) {
                optimal = false;
            }
        }
    }
    checks.push_back(residual_check(
        "lambda_0*/lambda_mix* = K (relative deviation, K in {2,10,50})", worst_ratio,
        4.0 * std::numeric_limits<double>::epsilon()));
    checks.push_back({"q0(theta_0*) beats 100 random theta perturbations in ELBO",
                      optimal, optimal ? "no perturbation improved the ELBO"
                                       : "a perturbation improved the ELBO"});
    return checks;
}

// --- criterion 5: gap asymptotics (Fig. 1) ------------------------------

std::vector<SubCheck> criterion_gap_asymptotics() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<SubCheck> checks;

    // Linearity of the gap at theta_mix*: constant second differences.
    std::vector<double> gaps;
    for (Index k = 1; k <= 100; ++k) {
        const auto model = figure_model(k);
        gaps.push_back(invariance_gap_closed_form(model, theta_mix_star(model)));
    }
    double worst_second_diff = 0.0;
    for (std::size_t i = 2; i < gaps.size(); ++i) {
        worst_second_diff =
            std::max(worst_second_diff,
                     std::abs((gaps[i] - gaps[i - 1]) - (gaps[i - 1] - gaps[i - 2])));
    }
    checks.push_back(residual_check("gap(theta_mix*) linear in K: max second difference",
                                    worst_second_diff, 1e-9));
    const double slope = gaps[1] - gaps[0];
    const double expected_slope =
        0.5 * (std::log(1.0 + 10.0 * kTwoPiE) + 1.0 / (1.0 + 10.0 * kTwoPiE) - 1.0);
    checks.push_back(residual_check("slope equals (1/2)[ln(1+10*2pi*e)+1/(1+10*2pi*e)-1]",
                                    std::abs(slope - expected_slope), 1e-12));
    {
        char detail[96];
        std::snprintf(detail, sizeof(detail), "slope = %.6f", slope);
        checks.push_back({"slope is approximately 2.076",
                          std::abs(slope - 2.076) < 1e-3, detail});
    }

    // Gap at theta_0* at K = 10^4 under the stated threshold.
    const auto big = figure_model(10000);
    const double gap_theta0 = invariance_gap_closed_form(big, theta_0_star(big));
    {
        char detail[96];
        std::snprintf(detail, sizeof(detail), "measured %.5f (threshold 0.05)", gap_theta0);
        checks.push_back({"gap(theta_0*) < 0.05 at K = 10^4", gap_theta0 < 0.05, detail});
    }

    // Data-related bound: constant 10 * 2 pi e, never exceeded by
    // KL(q0(theta_0*)||p) over the sweep schedule.
    double worst_bound_dev = 0.0;
    double worst_excess = -1e300;
    for (Index k : SweepConfig::default_k_values()) {
        const auto model = figure_model(k);
        const double bound =
            data_related_bound(Vector::Ones(10), model.y, model.sigma2_y);
        worst_bound_dev = std::max(worst_bound_dev, std::abs(bound - 10.0 * kTwoPiE));
        const auto report = elbo_terms(model, theta_0_star(model), PosteriorKind::mean_field);
        worst_excess = std::max(worst_excess, report.kl - bound);
    }
    checks.push_back(residual_check("data-related bound constant at 10*2pi*e = 170.79...",
                                    worst_bound_dev, 1e-9));
    checks.push_back({"KL(q0(theta_0*)||p) never exceeds the bound", worst_excess <= 0.0,
                      "max excess " + std::to_string(worst_excess)});

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    checks.push_back(residual_check("runtime seconds", seconds, 60.0));
    return checks;
}

// --- criterion 6: posterior collapse (Fig. 2) ---------------------------

std::vector<SubCheck> criterion_posterior_collapse() {
    std::vector<SubCheck> checks;
    const auto big = figure_model(10000);
    const auto t0 = theta_0_star(big);
    const auto q0 = q0_posterior(big, t0);
    const double ratio = q0.q0.diagonal_variances()[0] / big.prior_var[0];
    {
        char detail[96];
        std::snprintf(detail, sizeof(detail), "measured %.5f (threshold 0.99)", ratio);
        checks.push_back(
            {"q0(theta_0*) variance / prior variance > 0.99 at K = 10^4", ratio > 0.99,
             detail});
    }
    const auto report = elbo_terms(big, t0, PosteriorKind::mean_field);
    const double target = 1.0 + kInverseTwoPiE;
    const double rel = std::abs(report.predictive_variance - target) / target;
    {
        char detail[128];
        std::snprintf(detail, sizeof(detail),
                      "predictive %.6f vs sigma2_0+sigma2_y %.6f (relative %.4f, "
                      "threshold 0.01)",
                      report.predictive_variance, target, rel);
        checks.push_back({"q0(theta_0*) predictive variance within 1% of sigma2_0+sigma2_y "
                          "at K = 10^4",
                          rel < 0.01, detail});
    }
    const double expected_pred = kInverseTwoPiE + 1.0 / (10.0 / kInverseTwoPiE + 1.0);
    double worst_pred = 0.0;
    for (Index k : SweepConfig::default_k_values()) {
        const auto model = figure_model(k);
        const auto mix = elbo_terms(model, theta_mix_star(model),
                                    PosteriorKind::invariance_abiding);
        worst_pred = std::max(worst_pred,
                              std::abs(mix.predictive_variance - expected_pred));
    }
    checks.push_back(residual_check(
        "qmix(theta_mix*) predictive variance constant at sigma2_y+(N/sigma2_y+1/sigma2_0)^-1",
        worst_pred, 1e-9));
    return checks;
}

// --- criterion 7: conditions --------------------------------------------

std::vector<SubCheck> criterion_conditions() {
    std::vector<SubCheck> checks;
    CounterRng rng(1007);
    // Translation with a (non-isotropic) diagonal Gaussian prior and
    // proportional likelihood variances.
    const Index k = 4;
    const Vector prior_var =
        Vector::Constant(k, 0.5) +
        Vector::NullaryExpr(k, [&](Index) { return 2.0 * rng.next_uniform(); });
    const auto prior = MomentGaussian::diagonal(random_vec(rng, k, 0.5), prior_var);
    const auto tpair = make_translation_pair(Vector::Ones(k), prior,
                                             random_vec(rng, k, 2.0), 0.8 * prior_var);
    const auto t1 = verify_condition_1(tpair, 10000, 3001, 1e-8);
    const auto t2 = verify_condition_2(tpair.transform, 2000, 3002, 1e-8);
    checks.push_back(residual_check("translation condition 1 log-density gap, 1e4 samples",
                                    t1.condition1_max_log_density_gap, 1e-8));
    checks.push_back(residual_check("translation condition 2 |log det|",
                                    t2.condition2_max_logdet_deviation, 1e-8));

    const auto spec = MlpSpec::make({1, 2, 1}, Activation::tanh);
    std::vector<Matrix> perms;
    for (const auto& p : enumerate_permutations(spec)) {
        perms.push_back(permutation_matrix(spec, p));
    }
    const Index dim = spec.num_weights();
    const auto iso = MomentGaussian::diagonal(Vector::Zero(dim), Vector::Constant(dim, 1.4));
    const auto ppair = make_permutation_pair(iso, random_vec(rng, dim, 1.5),
                                             Vector::Constant(dim, 0.6), perms);
    const auto p1 = verify_condition_1(ppair, 10000, 3003, 1e-8);
    const auto p2 = verify_condition_2(ppair.transform, 2000, 3004, 1e-8);
    checks.push_back(residual_check("permutation condition 1 (isotropic prior), 1e4 samples",
                                    p1.condition1_max_log_density_gap, 1e-8));
    checks.push_back(residual_check("permutation condition 2 |log det|",
                                    p2.condition2_max_logdet_deviation, 1e-8));

    Vector aniso = Vector::Ones(dim);
    aniso[0] = 1.0;
    aniso[1] = 2.0;
    const auto bad_pair =
        make_permutation_pair(MomentGaussian::diagonal(Vector::Zero(dim), aniso),
                              random_vec(rng, dim, 1.5), Vector::Constant(dim, 0.6), perms);
    const auto bad = verify_condition_1(bad_pair, 10000, 3005, 1e-8);
    checks.push_back({"anisotropic-prior permutation fails condition 1 (negative control)",
                      !bad.pass,
                      "max gap " + std::to_string(bad.condition1_max_log_density_gap)});
    return checks;
}

// --- criterion 8: permutation gap range ---------------------------------

std::vector<SubCheck> criterion_permutation_gap() {
    std::vector<SubCheck> checks;
    const auto spec = MlpSpec::make({1, 2, 1}, Activation::tanh);
    std::vector<Matrix> perms;
    for (const auto& p : enumerate_permutations(spec)) {
        perms.push_back(permutation_matrix(spec, p));
    }
    const Index dim = spec.num_weights();
    const auto prior = MomentGaussian::diagonal(Vector::Zero(dim), Vector::Ones(dim));

    const Vector far = (Vector(dim) << 12.0, -12.0, 12.0, -12.0).finished();
    const auto separated =
        make_permutation_pair(prior, far, Vector::Constant(dim, 0.05), perms);
    const auto gap = invariance_gap(separated, GapMethod::monte_carlo, 100000, 4001);
    {
        char detail[128];
        std::snprintf(detail, sizeof(detail), "gap %.6f vs ln 2 = %.6f (3 sigma = %.2g)",
                      gap.gap, std::log(2.0), 3.0 * gap.std_error);
        checks.push_back({"separated modes: MC gap = ln 2 within 3 sigma at 1e5 samples",
                          std::abs(gap.gap - std::log(2.0)) <=
                              3.0 * std::max(gap.std_error, 1e-12),
                          detail});
    }

    const auto collapsed =
        make_permutation_pair(prior, Vector::Zero(dim), Vector::Ones(dim), perms);
    const auto zero = invariance_gap(collapsed, GapMethod::monte_carlo, 100000, 4002);
    {
        char detail[96];
        std::snprintf(detail, sizeof(detail), "gap %.3g (3 sigma = %.2g)", zero.gap,
                      3.0 * zero.std_error);
        checks.push_back({"g0 = prior: MC gap = 0 within 3 sigma",
                          std::abs(zero.gap) <= 3.0 * std::max(zero.std_error, 1e-12),
                          detail});
    }
    return checks;
}

// --- criterion 9: network invariances -----------------------------------

std::vector<SubCheck> criterion_network_invariances() {
    std::vector<SubCheck> checks;
    const auto spec = MlpSpec::make({1, 2, 2, 1}, Activation::tanh);
    CounterRng rng(1009);

    // 100 node translations across 50 random inputs.
    double worst_translation = 0.0;
    for (int input = 0; input < 50; ++input) {
        const Vector x = random_vec(rng, 1, 1.0);
        const Vector w = random_vec(rng, spec.num_weights(), 1.0);
        const auto fwd = forward(spec, w, x);
        for (int rep = 0; rep < 2; ++rep) {
            Index l, j;
            Vector z;
            do {
                l = 1 + static_cast<Index>(rng.next_uniform() * 3.0);
                j = static_cast<Index>(rng.next_uniform() *
                                       static_cast<double>(spec.layer_rows(l)));
                z = fwd.activations[static_cast<std::size_t>(l - 1)];
            } while (z.size() < 2);
            const auto basis = build_bz(z);
            WeightVector wv{spec, w};
            wv.set_node(l, j,
                        translate_node(wv.node(l, j), basis,
                                       random_vec(rng, basis.b.cols(), 3.0)));
            worst_translation =
                std::max(worst_translation,
                         std::abs(forward(spec, wv.flat, x).output() - fwd.output()));
        }
    }
    checks.push_back(residual_check(
        "100 random node translations change f(x) by less than 1e-9 (50 inputs)",
        worst_translation, 1e-9));

    const auto perms = enumerate_permutations(spec);
    double worst_perm = 0.0;
    bool exact = true;
    for (const auto& p : perms) {
        const auto map = permutation_index_map(spec, p);
        for (int input = 0; input < 50; ++input) {
            const Vector x = random_vec(rng, 1, 1.0);
            const Vector w = random_vec(rng, spec.num_weights(), 1.0);
            const Vector pw = apply_permutation(spec, p, w);
            Vector pw_kron(w.size());
            for (Index i = 0; i < w.size(); ++i) {
                pw_kron[i] = w[map[static_cast<std::size_t>(i)]];
            }
            exact = exact && (pw.array() == pw_kron.array()).all();
            worst_perm = std::max(worst_perm, std::abs(forward(spec, pw, x).output() -
                                                       forward(spec, w, x).output()));
        }
    }
    {
        char detail[96];
        std::snprintf(detail, sizeof(detail), "%zu stacked permutations, max residual %.3g",
                      perms.size(), worst_perm);
        checks.push_back({"all 4 stacked permutations change f(x) by less than 1e-9",
                          perms.size() == 4 && worst_perm < 1e-9, detail});
    }
    checks.push_back({"Kronecker and layer-matrix permutation paths agree exactly", exact,
                      exact ? "bitwise equal" : "paths diverged"});
    return checks;
}

// --- criterion 10: layer-wise fit oracle --------------------------------

std::vector<SubCheck> criterion_layerwise_fit() {
    std::vector<SubCheck> checks;
    const Index k = 3;
    const auto spec = MlpSpec::make({k, 1}, Activation::identity);
    const auto prior = MomentGaussian::diagonal(
        Vector::Zero(k), Vector::Constant(k, static_cast<double>(k)));
    const Vector x_input = Vector::Constant(k, 1.0 / static_cast<double>(k));
    std::vector<Vector> inputs(10, x_input);
    const Vector targets = Vector::Ones(10);

    LayerwiseFitConfig config;
    config.seed = 5001;
    const auto fit = layerwise_fit(spec, prior, inputs, targets, kInverseTwoPiE, config);

    const auto model = figure_model(k);
    const auto oracle = qmix_posterior(model, theta_mix_star(model));
    const auto fitted = fit.node_qmix(spec, prior, 1, 0);
    double worst_mean = 0.0;
    for (Index i = 0; i < k; ++i) {
        worst_mean = std::max(worst_mean,
                              std::abs(fitted.component(0).mean()[i] -
                                       oracle.qmix.mean()[i]) /
                                  std::abs(oracle.qmix.mean()[i]));
    }
    {
        char detail[96];
        std::snprintf(detail, sizeof(detail), "max relative mean error %.5f (threshold 0.02)",
                      worst_mean);
        checks.push_back(
            {"fit recovers the closed-form qmix mean within 2%", worst_mean < 0.02, detail});
    }
    const double fitted_pred =
        x_input.dot(fitted.component(0).covariance() * x_input) + kInverseTwoPiE;
    const double oracle_pred =
        elbo_terms(model, theta_mix_star(model), PosteriorKind::invariance_abiding)
            .predictive_variance;
    const double rel = std::abs(fitted_pred - oracle_pred) / oracle_pred;
    {
        char detail[128];
        std::snprintf(detail, sizeof(detail),
                      "predictive %.6f vs %.6f (relative %.5f, threshold 0.05)", fitted_pred,
                      oracle_pred, rel);
        checks.push_back(
            {"fit recovers the predictive variance within 5%", rel < 0.05, detail});
    }
    return checks;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "gap identity: KL(q0||p) - KL(qmix||p) = KL(q0||qmix)", criterion_gap_identity},
        {2, "predictive equivalence: ELL(q0) = ELL(qmix)", criterion_predictive_equivalence},
        {3, "qmix at theta_mix* recovers the true posterior and the evidence",
         criterion_posterior_recovery},
        {4, "mean-field optimum: factor-K variance and ELBO optimality",
         criterion_mean_field_optimum},
        {5, "gap asymptotics under the figure parameters", criterion_gap_asymptotics},
        {6, "posterior collapse of the mean-field optimum", criterion_posterior_collapse},
        {7, "product and volume-preservation conditions", criterion_conditions},
        {8, "permutation gap range [0, ln|P|]", criterion_permutation_gap},
        {9, "network translation and permutation invariances",
         criterion_network_invariances},
        {10, "layer-wise fit against the linear-model closed form",
         criterion_layerwise_fit},
    };

    int selected = 0;
    if (argc > 1) {
        selected = std::atoi(argv[1]);
    }

    bool all_passed = true;
    for (const auto& criterion : criteria) {
        if (selected != 0 && criterion.id != selected) continue;
        std::vector<SubCheck> checks;
        try {
            checks = criterion.run();
        } catch (const std::exception& e) {
            checks.push_back({"execution", false, std::string("exception: ") + e.what()});
        }
        bool pass = true;
        for (const auto& c : checks) pass = pass && c.pass;
        all_passed = all_passed && pass;
        std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion.id,
                    criterion.name.c_str());
        for (const auto& c : checks) {
            std::printf("        %s %s (%s)\n", c.pass ? "pass:" : "FAIL:", c.name.c_str(),
                        c.detail.c_str());
        }
    }
    return all_passed ? 0 : 1;
}

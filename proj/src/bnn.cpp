#include "invgap/bnn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "invgap/mc.hpp"

namespace invgap {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr std::int64_t kVarianceChunk = 4096;

double pairwise(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise(v, lo, mid) + pairwise(v, mid, hi);
}

}  // namespace

McVariance prior_output_variance(const MlpSpec& spec, const MomentGaussian& prior,
                                 const Vector& x, std::int64_t n_samples,
                                 std::uint64_t seed) {
    spec.validate();
    if (n_samples < 1000) {
        throw std::invalid_argument("prior_output_variance requires n_samples >= 1000");
    }
    if (prior.dim() != spec.num_weights()) {
        throw std::invalid_argument("prior dimension must match weight count");
    }
    const std::int64_t n_chunks = (n_samples + kVarianceChunk - 1) / kVarianceChunk;
    std::vector<double> s1(static_cast<std::size_t>(n_chunks), 0.0);
    std::vector<double> s2 = s1, s3 = s1, s4 = s1;
    for (std::int64_t c = 0; c < n_chunks; ++c) {
        CounterRng rng(CounterRng::derive(seed, static_cast<std::uint64_t>(c)));
        const std::int64_t begin = c * kVarianceChunk;
        const std::int64_t end = std::min(n_samples, begin + kVarianceChunk);
        double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
        for (std::int64_t i = begin; i < end; ++i) {
            const Vector w = prior.sample_one(rng);
            const double f = forward(spec, w, x).output();
            a1 += f;
            a2 += f * f;
            a3 += f * f * f;
            a4 += f * f * f * f;
        }
        const auto idx = static_cast<std::size_t>(c);
        s1[idx] = a1;
        s2[idx] = a2;
        s3[idx] = a3;
        s4[idx] = a4;
    }
    const double n = static_cast<double>(n_samples);
    const double m1 = pairwise(s1, 0, s1.size()) / n;
    const double m2 = pairwise(s2, 0, s2.size()) / n;
    const double m3 = pairwise(s3, 0, s3.size()) / n;
    const double m4 = pairwise(s4, 0, s4.size()) / n;
    const double var = std::max(0.0, m2 - m1 * m1);
    // Central fourth moment from raw moments; stderr of the variance
    // estimator is sqrt((mu4 - var^2) / n).
    const double mu4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1 * m1 * m1 * m1;
    McVariance out;
    out.value = var;
    out.std_error = std::sqrt(std::max(0.0, mu4 - var * var) / n);
    out.n = n_samples;
    return out;
}

GaussianMixture layerwise_qmix(const Vector& prior_mean, const Vector& prior_var,
                               const Vector& m, const Vector& v,
                               const std::vector<Vector>& z_samples) {
    const Index k = prior_mean.size();
    if (prior_var.size() != k || m.size() != k || v.size() != k) {
        throw std::invalid_argument("layerwise_qmix: parameter size mismatch");
    }
    if (z_samples.empty()) {
        throw std::invalid_argument("layerwise_qmix: no activation samples");
    }
    // Deduplicate by exact match; weights carry multiplicity.
    std::vector<Vector> unique;
    std::vector<double> counts;
    for (const Vector& z : z_samples) {
        if (z.size() != k) {
            throw std::invalid_argument("layerwise_qmix: activation size mismatch");
        }
        if (z.norm() == 0.0) {
            throw std::invalid_argument("layerwise_qmix: degenerate activation sample");
        }
        bool found = false;
        for (std::size_t i = 0; i < unique.size(); ++i) {
            if ((unique[i].array() == z.array()).all()) {
                counts[i] += 1.0;
                found = true;
                break;
            }
        }
        if (!found) {
            unique.push_back(z);
            counts.push_back(1.0);
        }
    }
    std::vector<MomentGaussian> components;
    components.reserve(unique.size());
    for (const Vector& z : unique) {
        const Vector u = prior_var.cwiseProduct(z);  // Sigma z
        const double t = z.dot(u) + z.cwiseProduct(z).dot(v);
        const double alpha = (z.dot(m) - z.dot(prior_mean)) / t;
        Matrix cov = Matrix(prior_var.asDiagonal());
        cov.noalias() -= (1.0 / t) * u * u.transpose();
        components.push_back(MomentGaussian::dense(prior_mean + alpha * u, std::move(cov)));
    }
    return GaussianMixture(std::move(components), std::move(counts));
}

std::vector<double> latent_activation_samples(const GaussianMixture& node_qmix,
                                              const std::vector<Vector>& incoming,
                                              Activation h, int count, std::uint64_t seed) {
    if (incoming.empty()) {
        throw std::invalid_argument("latent_activation_samples: no incoming samples");
    }
    CounterRng rng(seed);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const auto zi = std::min<std::size_t>(
            static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(incoming.size())),
            incoming.size() - 1);
        const Vector w = node_qmix.sample_one(rng);
        out.push_back(apply_activation(h, w.dot(incoming[zi])));
    }
    return out;
}

namespace {

// Everything the per-node objective needs, bundled so line searches can
// re-evaluate it deterministically.
struct NodeContext {
    const MlpSpec* spec;
    Index l;
    Index j;
    Vector prior_mean;  // node slice
    Vector prior_var;   // node slice
    const std::vector<Vector>* z_samples;  // incoming activation samples
    const std::vector<Vector>* inputs;     // data
    const Vector* targets;
    double sigma2_y;
    Vector point_weights;  // flat weights, all nodes at current means
    std::int64_t ell_samples;
    std::int64_t kl_samples;
    std::uint64_t eval_seed;
};

struct Objective {
    double value;
    double std_error;
};

// ELL of the data with node (l, j) sampled from its qmix and every other
// weight at its point estimate; closed form for a last-layer identity node,
// Monte-Carlo otherwise.
Objective node_ell(const NodeContext& ctx, const GaussianMixture& qmix) {
    const MlpSpec& spec = *ctx.spec;
    const bool last_identity =
        ctx.l == spec.num_layers() &&
        spec.activations.back() == Activation::identity && spec.layer_widths.back() == 1;
    const auto n_data = static_cast<Index>(ctx.inputs->size());
    if (n_data == 0) return {0.0, 0.0};
    const double log_noise = 0.5 * (kLog2Pi + std::log(ctx.sigma2_y));
    if (last_identity) {
        double total = 0.0;
        for (Index n = 0; n < n_data; ++n) {
            const auto fwd = forward(spec, ctx.point_weights, (*ctx.inputs)[n]);
            const Vector& z = fwd.activations[static_cast<std::size_t>(spec.num_layers() - 1)];
            double acc = 0.0;
            for (std::size_t c = 0; c < qmix.size(); ++c) {
                const auto& comp = qmix.component(c);
                const double mean = comp.mean().dot(z);
                const double var = z.dot(comp.covariance() * z);
                const double d = (*ctx.targets)[n] - mean;
                acc += qmix.weight(c) * (-(d * d + var) / (2.0 * ctx.sigma2_y) - log_noise);
            }
            total += acc;
        }
        return {total, 0.0};
    }
    // Monte-Carlo: sample the node's weights, run the data through the net.
    WeightVector wv{spec, ctx.point_weights};
    CounterRng rng(ctx.eval_seed);
    const std::int64_t s_count = ctx.ell_samples;
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t s = 0; s < s_count; ++s) {
        const Vector w_node = qmix.sample_one(rng);
        wv.set_node(ctx.l, ctx.j, w_node);
        double ell = 0.0;
        for (Index n = 0; n < n_data; ++n) {
            const double f = forward(spec, wv.flat, (*ctx.inputs)[n]).output();
            const double d = (*ctx.targets)[n] - f;
            ell += -d * d / (2.0 * ctx.sigma2_y) - log_noise;
        }
        sum += ell;
        sum_sq += ell * ell;
    }
    const double mean = sum / static_cast<double>(s_count);
    const double var =
        std::max(0.0, (sum_sq - static_cast<double>(s_count) * mean * mean) /
                          static_cast<double>(s_count - 1));
    return {mean, std::sqrt(var / static_cast<double>(s_count))};
}

// KL(qmix_node || prior_node): exact for a single component; for proper
// mixtures the convexity bound sum_i w_i KL(q_i || p) stands in (exact when
// the components coincide, e.g. in the collapse limit), which keeps the
// objective deterministic.
Objective node_kl(const NodeContext& ctx, const GaussianMixture& qmix) {
    const MomentGaussian prior = MomentGaussian::diagonal(ctx.prior_mean, ctx.prior_var);
    double kl = 0.0;
    for (std::size_t c = 0; c < qmix.size(); ++c) {
        kl += qmix.weight(c) * kl_divergence(qmix.component(c), prior);
    }
    return {kl, 0.0};
}

Objective node_objective(const NodeContext& ctx, const Vector& m, const Vector& v) {
    const GaussianMixture qmix =
        layerwise_qmix(ctx.prior_mean, ctx.prior_var, m, v, *ctx.z_samples);
    const Objective ell = node_ell(ctx, qmix);
    const Objective kl = node_kl(ctx, qmix);
    return {ell.value - kl.value, std::hypot(ell.std_error, kl.std_error)};
}

// Golden-section maximization over [lo, hi]; the current point is kept
// unless the candidate strictly improves the objective, so flat stretches
// leave the parameters untouched.
double golden_max(const std::function<double(double)>& f, double current, double lo,
                  double hi, int iters) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double candidate = fc > fd ? c : d;
    const double f_candidate = fc > fd ? fc : fd;
    return f_candidate > f(current) ? candidate : current;
}

}  // namespace

GaussianMixture LayerwiseFitResult::node_qmix(const MlpSpec& spec, const MomentGaussian& prior,
                                              Index l, Index j) const {
    const auto idx = spec.node_indices(l, j);
    Vector pm(static_cast<Index>(idx.size())), pv(static_cast<Index>(idx.size()));
    const Vector prior_variances = prior.variances();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        pm[static_cast<Index>(i)] = prior.mean()[idx[i]];
        pv[static_cast<Index>(i)] = prior_variances[idx[i]];
    }
    return layerwise_qmix(pm, pv, m[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(j)],
                          v[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(j)],
                          activation_samples[static_cast<std::size_t>(l - 1)]);
}

LayerwiseFitResult layerwise_fit(const MlpSpec& spec, const MomentGaussian& prior,
                                 const std::vector<Vector>& inputs, const Vector& targets,
                                 double sigma2_y, const LayerwiseFitConfig& config) {
    spec.validate();
    if (spec.num_weights() > 1000) {
        throw std::invalid_argument("layerwise_fit is restricted to networks with <= 1000 weights");
    }
    if (prior.dim() != spec.num_weights()) {
        throw std::invalid_argument("prior dimension must match weight count");
    }
    if (static_cast<Index>(inputs.size()) != targets.size()) {
        throw std::invalid_argument("inputs/targets size mismatch");
    }
    const Index n_layers = spec.num_layers();
    const Vector prior_variances = prior.variances();

    LayerwiseFitResult result;
    result.m.resize(static_cast<std::size_t>(n_layers));
    result.v.resize(static_cast<std::size_t>(n_layers));
    result.activation_samples.resize(static_cast<std::size_t>(n_layers));
    for (Index l = 1; l <= n_layers; ++l) {
        auto& ml = result.m[static_cast<std::size_t>(l - 1)];
        auto& vl = result.v[static_cast<std::size_t>(l - 1)];
        for (Index j = 0; j < spec.layer_rows(l); ++j) {
            const auto idx = spec.node_indices(l, j);
            Vector m0(static_cast<Index>(idx.size())), v0(static_cast<Index>(idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i) {
                m0[static_cast<Index>(i)] = prior.mean()[idx[i]];
                // Near-flat likelihood start: the initial qmix is close to
                // the prior, the no-data fixed point.
                v0[static_cast<Index>(i)] = 1e6 * prior_variances[idx[i]];
            }
            ml.push_back(std::move(m0));
            vl.push_back(std::move(v0));
        }
    }

    // Downstream layers are represented by point estimates: the current
    // per-node qmix mixture means, updated in place as nodes are fitted.
    Vector point_est = prior.mean();

    bool converged = false;
    int sweep = 0;
    for (; sweep < config.max_sweeps && !converged; ++sweep) {
        double max_rel_change = 0.0;
        double sweep_objective = 0.0;
        double sweep_se_sq = 0.0;

        // Layer-0 activation samples are the data inputs themselves.
        result.activation_samples[0] = inputs;
        if (inputs.empty()) {
            result.activation_samples[0] = {Vector::Ones(spec.layer_widths[0])};
        }

        for (Index l = 1; l <= n_layers; ++l) {
            for (Index j = 0; j < spec.layer_rows(l); ++j) {
                auto& m_cur = result.m[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(j)];
                auto& v_cur = result.v[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(j)];
                NodeContext ctx;
                ctx.spec = &spec;
                ctx.l = l;
                ctx.j = j;
                const auto idx = spec.node_indices(l, j);
                ctx.prior_mean.resize(static_cast<Index>(idx.size()));
                ctx.prior_var.resize(static_cast<Index>(idx.size()));
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    ctx.prior_mean[static_cast<Index>(i)] = prior.mean()[idx[i]];
                    ctx.prior_var[static_cast<Index>(i)] = prior_variances[idx[i]];
                }
                ctx.z_samples = &result.activation_samples[static_cast<std::size_t>(l - 1)];
                ctx.inputs = &inputs;
                ctx.targets = &targets;
                ctx.sigma2_y = sigma2_y;
                ctx.point_weights = point_est;
                ctx.ell_samples = config.ell_mc_samples;
                ctx.kl_samples = config.kl_mc_samples;
                ctx.eval_seed = CounterRng::derive(
                    config.seed, static_cast<std::uint64_t>(sweep * 131 + l * 17 + j));

                const Vector m_before = m_cur, v_before = v_cur;
                for (int pass = 0; pass < config.coordinate_passes; ++pass) {
                    for (Index i = 0; i < m_cur.size(); ++i) {
                        const double scale =
                            std::sqrt(ctx.prior_var[i]) + std::abs(m_cur[i]);
                        m_cur[i] = golden_max(
                            [&](double val) {
                                Vector m_try = m_cur;
                                m_try[i] = val;
                                return node_objective(ctx, m_try, v_cur).value;
                            },
                            m_cur[i], m_cur[i] - 4.0 * scale, m_cur[i] + 4.0 * scale,
                            config.line_search_iters);
                    }
                    for (Index i = 0; i < v_cur.size(); ++i) {
                        const double lo = std::log(1e-8 * ctx.prior_var[i]);
                        const double hi = std::log(1e12 * ctx.prior_var[i]);
                        v_cur[i] = std::exp(golden_max(
                            [&](double lv) {
                                Vector v_try = v_cur;
                                v_try[i] = std::exp(lv);
                                return node_objective(ctx, m_cur, v_try).value;
                            },
                            std::log(v_cur[i]), lo, hi, config.line_search_iters));
                    }
                }
                for (Index i = 0; i < m_cur.size(); ++i) {
                    const double scale = std::sqrt(ctx.prior_var[i]);
                    max_rel_change = std::max(
                        max_rel_change, std::abs(m_cur[i] - m_before[i]) / (scale + 1e-12));
                    max_rel_change = std::max(
                        max_rel_change,
                        std::abs(std::log(v_cur[i] / v_before[i])) / 10.0);
                }
                const Objective final_obj = node_objective(ctx, m_cur, v_cur);
                sweep_objective += final_obj.value;
                sweep_se_sq += final_obj.std_error * final_obj.std_error;

                // Refresh the node's point estimate with its qmix mean.
                const GaussianMixture fitted =
                    layerwise_qmix(ctx.prior_mean, ctx.prior_var, m_cur, v_cur, *ctx.z_samples);
                Vector mean = Vector::Zero(m_cur.size());
                for (std::size_t c = 0; c < fitted.size(); ++c) {
                    mean += fitted.weight(c) * fitted.component(c).mean();
                }
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    point_est[idx[i]] = mean[static_cast<Index>(i)];
                }
            }
            // Sample this layer's activations for the next one.
            if (l < n_layers) {
                auto& samples = result.activation_samples[static_cast<std::size_t>(l)];
                samples.clear();
                CounterRng rng(CounterRng::derive(
                    config.seed, 0xFEED0000ULL + static_cast<std::uint64_t>(sweep * 131 + l)));
                const auto& incoming = result.activation_samples[static_cast<std::size_t>(l - 1)];
                std::vector<GaussianMixture> node_posteriors;
                for (Index j = 0; j < spec.layer_rows(l); ++j) {
                    node_posteriors.push_back(result.node_qmix(spec, prior, l, j));
                }
                for (int p = 0; p < config.activation_samples; ++p) {
                    const auto zi = std::min<std::size_t>(
                        static_cast<std::size_t>(rng.next_uniform() *
                                                 static_cast<double>(incoming.size())),
                        incoming.size() - 1);
                    Vector z(spec.layer_rows(l));
                    for (Index j = 0; j < spec.layer_rows(l); ++j) {
                        const Vector w = node_posteriors[static_cast<std::size_t>(j)].sample_one(rng);
                        z[j] = apply_activation(spec.activations[static_cast<std::size_t>(l - 1)],
                                                w.dot(incoming[zi]));
                    }
                    // Exactly-zero activations (possible with relu) carry no
                    // translation structure and would break the per-node
                    // mixture; drop them.
                    if (z.norm() == 0.0) continue;
                    samples.push_back(std::move(z));
                }
                if (samples.empty()) {
                    // Dead layer: downstream weights are unidentified and
                    // the objective reduces to the KL term; any direction
                    // works.
                    samples.push_back(Vector::Ones(spec.layer_rows(l)));
                }
            }
        }
        result.trace.push_back(sweep_objective);
        result.trace_std_error.push_back(std::sqrt(sweep_se_sq));
        converged = max_rel_change < config.param_tol;
    }
    result.converged = converged;
    result.sweeps = sweep;
    return result;
}

}  // namespace invgap

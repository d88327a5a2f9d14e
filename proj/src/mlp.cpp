#include "invgap/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace invgap {

double apply_activation(Activation h, double v) {
    switch (h) {
        case Activation::identity:
            return v;
        case Activation::tanh:
            return std::tanh(v);
        case Activation::relu:
            return v > 0.0 ? v : 0.0;
    }
    throw std::logic_error("unknown activation");
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    throw std::invalid_argument("unknown activation: " + name);
}

const char* activation_name(Activation h) {
    switch (h) {
        case Activation::identity:
            return "identity";
        case Activation::tanh:
            return "tanh";
        case Activation::relu:
            return "relu";
    }
    return "?";
}

Index MlpSpec::num_weights() const {
    Index total = 0;
    for (Index l = 1; l <= num_layers(); ++l) {
        total += layer_rows(l) * layer_cols(l);
    }
    return total;
}

Index MlpSpec::layer_offset(Index l) const {
    Index offset = 0;
    for (Index i = 1; i < l; ++i) {
        offset += layer_rows(i) * layer_cols(i);
    }
    return offset;
}

std::vector<Index> MlpSpec::node_indices(Index l, Index j) const {
    if (l < 1 || l > num_layers() || j < 0 || j >= layer_rows(l)) {
        throw std::invalid_argument("node index out of range");
    }
    const Index offset = layer_offset(l);
    const Index rows = layer_rows(l);
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(layer_cols(l)));
    for (Index i = 0; i < layer_cols(l); ++i) {
        idx.push_back(offset + j + i * rows);
    }
    return idx;
}

void MlpSpec::validate() const {
    if (layer_widths.size() < 2) {
        throw std::invalid_argument("network needs at least one weight layer");
    }
    for (Index w : layer_widths) {
        if (w < 1) throw std::invalid_argument("layer widths must be >= 1");
    }
    if (static_cast<Index>(activations.size()) != num_layers()) {
        throw std::invalid_argument("one activation per weight layer required");
    }
}

MlpSpec MlpSpec::make(std::vector<Index> widths, Activation shared) {
    MlpSpec spec;
    spec.layer_widths = std::move(widths);
    spec.activations.assign(spec.layer_widths.size() - 1, shared);
    spec.validate();
    return spec;
}

Vector WeightVector::node(Index l, Index j) const {
    const auto idx = spec.node_indices(l, j);
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = flat[idx[i]];
    return out;
}

void WeightVector::set_node(Index l, Index j, const Vector& values) {
    const auto idx = spec.node_indices(l, j);
    if (values.size() != static_cast<Index>(idx.size())) {
        throw std::invalid_argument("node weight size mismatch");
    }
    for (std::size_t i = 0; i < idx.size(); ++i) flat[idx[i]] = values[static_cast<Index>(i)];
}

ForwardResult forward(const MlpSpec& spec, const Vector& w, const Vector& x) {
    spec.validate();
    if (w.size() != spec.num_weights()) {
        throw std::invalid_argument("weight vector size mismatch");
    }
    if (x.size() != spec.layer_widths.front()) {
        throw std::invalid_argument("input size mismatch");
    }
    ForwardResult result;
    result.activations.reserve(static_cast<std::size_t>(spec.num_layers()) + 1);
    result.activations.push_back(x);
    Vector z = x;
    for (Index l = 1; l <= spec.num_layers(); ++l) {
        const Eigen::Map<const Matrix> wl(w.data() + spec.layer_offset(l), spec.layer_rows(l),
                                          spec.layer_cols(l));
        Vector pre = wl * z;
        for (Index i = 0; i < pre.size(); ++i) {
            pre[i] = apply_activation(spec.activations[static_cast<std::size_t>(l - 1)], pre[i]);
        }
        z = std::move(pre);
        result.activations.push_back(z);
    }
    return result;
}

TranslationBasisZ build_bz(const Vector& z) {
    const Index k = z.size();
    if (k < 1) throw std::invalid_argument("empty activation vector");
    TranslationBasisZ basis;
    basis.z = z;
    const double max_abs = z.cwiseAbs().maxCoeff();
    if (max_abs == 0.0) {
        // Zero activation: the node value is independent of w entirely.
        basis.b = Matrix::Identity(k, k);
        return basis;
    }
    Index pivot = k - 1;
    if (std::abs(z[pivot]) <= 1e-12 * max_abs) {
        z.cwiseAbs().maxCoeff(&pivot);
    }
    basis.b = Matrix::Zero(k, k - 1);
    Index col = 0;
    for (Index i = 0; i < k; ++i) {
        if (i == pivot) continue;
        basis.b(i, col) = 1.0;
        basis.b(pivot, col) = -z[i] / z[pivot];
        ++col;
    }
    return basis;
}

Vector translate_node(const Vector& node_weights, const TranslationBasisZ& basis,
                      const Vector& delta) {
    if (node_weights.size() != basis.b.rows() || delta.size() != basis.b.cols()) {
        throw std::invalid_argument("translate_node: dimension mismatch");
    }
    return node_weights + basis.b * delta;
}

namespace {

std::int64_t factorial(Index n) {
    std::int64_t f = 1;
    for (Index i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

std::int64_t permutation_count(const MlpSpec& spec) {
    spec.validate();
    std::int64_t count = 1;
    for (Index l = 1; l < spec.num_layers(); ++l) {
        const std::int64_t f = factorial(spec.layer_widths[l]);
        if (count > (1LL << 62) / f) {
            throw std::overflow_error("permutation count overflow");
        }
        count *= f;
    }
    return count;
}

std::vector<StackedPermutation> enumerate_permutations(const MlpSpec& spec, std::int64_t cap) {
    const std::int64_t total = permutation_count(spec);
    if (total > cap) {
        throw std::invalid_argument("permutation set exceeds enumeration cap");
    }
    // Per-hidden-layer permutation lists, then their cartesian product.
    std::vector<std::vector<std::vector<Index>>> per_layer;
    for (Index l = 1; l < spec.num_layers(); ++l) {
        std::vector<Index> base(static_cast<std::size_t>(spec.layer_widths[l]));
        std::iota(base.begin(), base.end(), Index{0});
        std::vector<std::vector<Index>> perms;
        do {
            perms.push_back(base);
        } while (std::next_permutation(base.begin(), base.end()));
        per_layer.push_back(std::move(perms));
    }
    std::vector<StackedPermutation> out;
    out.reserve(static_cast<std::size_t>(total));
    StackedPermutation current;
    current.hidden_perms.resize(per_layer.size());
    std::function<void(std::size_t)> recurse = [&](std::size_t depth) {
        if (depth == per_layer.size()) {
            out.push_back(current);
            return;
        }
        for (const auto& p : per_layer[depth]) {
            current.hidden_perms[depth] = p;
            recurse(depth + 1);
        }
    };
    recurse(0);
    return out;
}

namespace {

// perm[new] = old for hidden layers; identity for input and output layers.
std::vector<Index> layer_perm(const MlpSpec& spec, const StackedPermutation& p, Index l) {
    if (l <= 0 || l >= spec.num_layers()) {
        std::vector<Index> id(static_cast<std::size_t>(spec.layer_widths[static_cast<std::size_t>(
            std::clamp<Index>(l, 0, spec.num_layers()))]));
        std::iota(id.begin(), id.end(), Index{0});
        return id;
    }
    return p.hidden_perms[static_cast<std::size_t>(l - 1)];
}

}  // namespace

Vector apply_permutation(const MlpSpec& spec, const StackedPermutation& p, const Vector& w) {
    spec.validate();
    if (static_cast<Index>(p.hidden_perms.size()) != spec.num_layers() - 1) {
        throw std::invalid_argument("stacked permutation shape mismatch");
    }
    if (w.size() != spec.num_weights()) {
        throw std::invalid_argument("weight vector size mismatch");
    }
    Vector out(w.size());
    for (Index l = 1; l <= spec.num_layers(); ++l) {
        const auto row_perm = layer_perm(spec, p, l);
        const auto col_perm = layer_perm(spec, p, l - 1);
        const Index rows = spec.layer_rows(l);
        const Index cols = spec.layer_cols(l);
        const Index offset = spec.layer_offset(l);
        const Eigen::Map<const Matrix> wl(w.data() + offset, rows, cols);
        Eigen::Map<Matrix> wl_out(out.data() + offset, rows, cols);
        for (Index a = 0; a < rows; ++a) {
            for (Index b = 0; b < cols; ++b) {
                wl_out(a, b) = wl(row_perm[static_cast<std::size_t>(a)],
                                  col_perm[static_cast<std::size_t>(b)]);
            }
        }
    }
    return out;
}

std::vector<Index> permutation_index_map(const MlpSpec& spec, const StackedPermutation& p) {
    spec.validate();
    std::vector<Index> map(static_cast<std::size_t>(spec.num_weights()));
    for (Index l = 1; l <= spec.num_layers(); ++l) {
        const auto row_perm = layer_perm(spec, p, l);
        const auto col_perm = layer_perm(spec, p, l - 1);
        const Index rows = spec.layer_rows(l);
        const Index cols = spec.layer_cols(l);
        const Index offset = spec.layer_offset(l);
        // Block (P_{l-1} (x) P_l): flat position j + i*rows of vec(W_l).
        for (Index i = 0; i < cols; ++i) {
            for (Index j = 0; j < rows; ++j) {
                const Index dst = offset + j + i * rows;
                const Index src = offset + row_perm[static_cast<std::size_t>(j)] +
                                  col_perm[static_cast<std::size_t>(i)] * rows;
                map[static_cast<std::size_t>(dst)] = src;
            }
        }
    }
    return map;
}

Matrix permutation_matrix(const MlpSpec& spec, const StackedPermutation& p) {
    const auto map = permutation_index_map(spec, p);
    const Index n = spec.num_weights();
    Matrix out = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        out(i, map[static_cast<std::size_t>(i)]) = 1.0;
    }
    return out;
}

}  // namespace invgap

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "invgap/gaussian.hpp"

namespace invgap {

enum class Activation { identity, tanh, relu };

double apply_activation(Activation h, double v);
Activation activation_from_name(const std::string& name);
const char* activation_name(Activation h);

/// Feed-forward architecture: widths n_0 (input) .. n_L, one monotonic
/// scalar activation per weight layer, no biases. The flat weight vector
/// stacks the layer matrices W_l (n_l x n_{l-1}) in column-major order so
/// that stacked node permutations act as block-diagonal Kronecker products
/// P_{l-1} (x) P_l on it.
struct MlpSpec {
    std::vector<Index> layer_widths;       // n_0 .. n_L
    std::vector<Activation> activations;   // size L

    Index num_layers() const { return static_cast<Index>(layer_widths.size()) - 1; }
    Index num_weights() const;
    Index layer_offset(Index l) const;     // l in 1..L
    Index layer_rows(Index l) const { return layer_widths[l]; }
    Index layer_cols(Index l) const { return layer_widths[l - 1]; }

    /// Flat indices of w_{l,j} (weights into node j of layer l); strided,
    /// stride n_l, one entry per input. The slices over all (l, j) partition
    /// the flat vector.
    std::vector<Index> node_indices(Index l, Index j) const;

    void validate() const;
    static MlpSpec make(std::vector<Index> widths, Activation shared);
};

/// Flat parameter vector bound to an architecture, with per-node accessors.
struct WeightVector {
    MlpSpec spec;
    Vector flat;

    Vector node(Index l, Index j) const;
    void set_node(Index l, Index j, const Vector& values);
};

struct ForwardResult {
    std::vector<Vector> activations;  // z_0 = x, .., z_L
    double output() const { return activations.back()[0]; }
};

ForwardResult forward(const MlpSpec& spec, const Vector& w, const Vector& x);

/// Basis of the node-level translation-invariant subspace for activation
/// vector z: columns span the null space of z^T. When the last component of
/// z vanishes the pivot moves to the largest-magnitude component; for z = 0
/// every direction is invariant and the basis is the identity.
struct TranslationBasisZ {
    Vector z;
    Matrix b;
};

TranslationBasisZ build_bz(const Vector& z);

/// w + B_z delta: leaves w^T z (and so the node value) unchanged.
Vector translate_node(const Vector& node_weights, const TranslationBasisZ& basis,
                      const Vector& delta);

/// One node relabelling per hidden layer; perm[new_index] = old_index.
struct StackedPermutation {
    std::vector<std::vector<Index>> hidden_perms;  // size L-1
};

/// |P| = prod of k_l! over hidden layers.
std::int64_t permutation_count(const MlpSpec& spec);

std::vector<StackedPermutation> enumerate_permutations(const MlpSpec& spec,
                                                       std::int64_t cap = 1000000);

/// Applies the permutation through the layer matrices: W_l' = P_l W_l P_{l-1}^T.
Vector apply_permutation(const MlpSpec& spec, const StackedPermutation& p, const Vector& w);

/// Flat index map of the block-diagonal Kronecker form; out[i] = in[map[i]].
std::vector<Index> permutation_index_map(const MlpSpec& spec, const StackedPermutation& p);

/// Materialized 0/1 permutation matrix over the flat weight vector.
Matrix permutation_matrix(const MlpSpec& spec, const StackedPermutation& p);

}  // namespace invgap

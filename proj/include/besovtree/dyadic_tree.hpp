#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "besovtree/grid_wavelet.hpp"

namespace besovtree {

/// Coordinate (j, k) in the dyadic tree. In 1D only k[0] is used; in 2D k = (row, col).
struct NodeId {
    int dim = 1;
    int level = 0;
    std::array<std::int64_t, 2> k{0, 0};

    static NodeId make_1d(int level, std::int64_t k) { return {1, level, {k, 0}}; }
    static NodeId make_2d(int level, std::int64_t row, std::int64_t col) { return {2, level, {row, col}}; }

    /// Row-major index of the node inside its level.
    std::size_t flat() const;
    static NodeId from_flat(int dim, int level, std::size_t index);

    friend bool operator==(const NodeId&, const NodeId&) = default;
};

/// Throws ParameterError at the root.
NodeId parent(const NodeId& node);
/// The 2^d children (j+1, 2k + delta); throws ParameterError when j == depth.
std::vector<NodeId> children(const NodeId& node, int depth);

/// Per-node raw inclusion bits t_jk over the whole tree, levels 0..J.
class TreeMask {
public:
    TreeMask() = default;
    TreeMask(int dim, int depth, bool value = false);

    static TreeMask root_only(int dim, int depth);
    static TreeMask full(int dim, int depth) { return TreeMask(dim, depth, true); }

    int dim() const { return dim_; }
    int depth() const { return depth_; }
    std::size_t level_size(int level) const { return bits_[level].size(); }

    bool get(int level, std::size_t k) const { return bits_[level][k] != 0; }
    void set(int level, std::size_t k, bool value) { bits_[level][k] = value ? 1 : 0; }
    bool get(const NodeId& node) const { return get(node.level, node.flat()); }
    void set(const NodeId& node, bool value) { set(node.level, node.flat(), value); }

    const std::vector<std::vector<std::uint8_t>>& levels() const { return bits_; }

    /// Effective bits: a node is on iff it and every ancestor are on.
    TreeMask effective() const;
    std::size_t count() const;

    friend bool operator==(const TreeMask&, const TreeMask&) = default;

private:
    int dim_ = 1;
    int depth_ = 0;
    std::vector<std::vector<std::uint8_t>> bits_;
};

/// True iff the raw bits are ancestor-closed (every set node has its parent set).
bool validate_proper(const TreeMask& mask);

/// Per-node cached quantities, level-major: values[j][flat k].
struct BranchStats {
    int dim = 1;
    int depth = 0;
    std::vector<std::vector<double>> energy;  // sum of squares over the complete subtree, all bands
    std::vector<std::vector<double>> weight;  // optimised subtree weight (filled by pruning)
    std::vector<std::vector<double>> gap;     // pruning minus inclusion weight (filled by pruning)
};

/// Squared coefficients of one node summed over bands, in band order.
double node_energy(const Pyramid& pyramid, int level, std::size_t k);

/// Bottom-up subtree energies: E = node_energy + sum over children in child order.
BranchStats subtree_energies(const Pyramid& pyramid);

}  // namespace besovtree

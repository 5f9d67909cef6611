#include "besovtree/dyadic_tree.hpp"

#include <string>

#include "besovtree/errors.hpp"

namespace besovtree {

std::size_t NodeId::flat() const {
    if (dim == 1) return static_cast<std::size_t>(k[0]);
    return static_cast<std::size_t>(k[0]) * (std::size_t{1} << level) + static_cast<std::size_t>(k[1]);
}

NodeId NodeId::from_flat(int dim, int level, std::size_t index) {
    if (dim == 1) return make_1d(level, static_cast<std::int64_t>(index));
    const std::size_t width = std::size_t{1} << level;
    return make_2d(level, static_cast<std::int64_t>(index / width), static_cast<std::int64_t>(index % width));
}

NodeId parent(const NodeId& node) {
    if (node.level <= 0) throw ParameterError("the root node has no parent");
    NodeId p = node;
    p.level = node.level - 1;
    p.k[0] = node.k[0] / 2;
    p.k[1] = node.dim == 2 ? node.k[1] / 2 : 0;
    return p;
}

std::vector<NodeId> children(const NodeId& node, int depth) {
    if (node.level >= depth) {
        throw ParameterError("node at level " + std::to_string(node.level) + " has no children in a depth-" +
                             std::to_string(depth) + " tree");
    }
    std::vector<NodeId> out;
    if (node.dim == 1) {
        for (std::int64_t d = 0; d < 2; ++d) out.push_back(NodeId::make_1d(node.level + 1, 2 * node.k[0] + d));
    } else {
        for (std::int64_t dr = 0; dr < 2; ++dr) {
            for (std::int64_t dc = 0; dc < 2; ++dc) {
                out.push_back(NodeId::make_2d(node.level + 1, 2 * node.k[0] + dr, 2 * node.k[1] + dc));
            }
        }
    }
    return out;
}

TreeMask::TreeMask(int dim, int depth, bool value) : dim_(dim), depth_(depth) {
    if ((dim != 1 && dim != 2) || depth < 0) throw DimensionError("invalid tree shape");
    bits_.resize(static_cast<std::size_t>(depth) + 1);
    for (int j = 0; j <= depth; ++j) {
        const std::size_t n = dim == 1 ? (std::size_t{1} << j) : (std::size_t{1} << (2 * j));
        bits_[j].assign(n, value ? 1 : 0);
    }
}

TreeMask TreeMask::root_only(int dim, int depth) {
    TreeMask m(dim, depth, false);
    m.set(0, 0, true);
    return m;
}

TreeMask TreeMask::effective() const {
    TreeMask out = *this;
    for (int j = 1; j <= depth_; ++j) {
        for (std::size_t k = 0; k < out.bits_[j].size(); ++k) {
            if (!out.bits_[j][k]) continue;
            const NodeId up = parent(NodeId::from_flat(dim_, j, k));
            if (!out.get(up)) out.bits_[j][k] = 0;
        }
    }
    return out;
}

std::size_t TreeMask::count() const {
    std::size_t n = 0;
    for (const auto& level : bits_) {
        for (auto b : level) n += b;
    }
    return n;
}

bool validate_proper(const TreeMask& mask) {
    for (int j = 1; j <= mask.depth(); ++j) {
        for (std::size_t k = 0; k < mask.level_size(j); ++k) {
            if (mask.get(j, k) && !mask.get(parent(NodeId::from_flat(mask.dim(), j, k)))) return false;
        }
    }
    return true;
}

double node_energy(const Pyramid& pyramid, int level, std::size_t k) {
    double e = 0.0;
    for (int band = 0; band < pyramid.bands(); ++band) {
        const double v = pyramid.at(level, band, k);
        e += v * v;
    }
    return e;
}

BranchStats subtree_energies(const Pyramid& pyramid) {
    pyramid.validate();
    BranchStats stats;
    stats.dim = pyramid.dim;
    stats.depth = pyramid.depth;
    const auto levels = static_cast<std::size_t>(pyramid.depth) + 1;
    stats.energy.resize(levels);
    stats.weight.resize(levels);
    stats.gap.resize(levels);
    for (int j = pyramid.depth; j >= 0; --j) {
        const std::size_t n = pyramid.level_size(j);
        auto& e = stats.energy[j];
        e.assign(n, 0.0);
        stats.weight[j].assign(n, 0.0);
        stats.gap[j].assign(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double sum = node_energy(pyramid, j, k);
            if (j < pyramid.depth) {
                for (const NodeId& c : children(NodeId::from_flat(pyramid.dim, j, k), pyramid.depth)) {
                    sum += stats.energy[j + 1][c.flat()];
                }
            }
            e[k] = sum;
        }
    }
    return stats;
}

}  // namespace besovtree

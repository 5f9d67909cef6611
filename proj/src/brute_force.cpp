#include "besovtree/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "besovtree/errors.hpp"

namespace besovtree::oracle {

namespace {

// Costs are accumulated in extended precision so that genuine ties can be told apart
// from differences as small as the beta clamp near 0.5.
using Real = long double;
constexpr Real kInf = std::numeric_limits<Real>::infinity();

struct FlatNode {
    int level = 0;
    std::size_t k = 0;
    std::vector<int> children;
    std::vector<int> subtree;  // complete subtree, node itself first
};

struct FlatTree {
    int dim = 1;
    int depth = 0;
    int bands = 1;
    std::vector<FlatNode> nodes;
    std::vector<std::vector<int>> by_level;
};

FlatTree flatten(int dim, int depth) {
    FlatTree tree;
    tree.dim = dim;
    tree.depth = depth;
    tree.bands = dim == 1 ? 1 : 3;
    tree.by_level.resize(static_cast<std::size_t>(depth) + 1);
    std::vector<std::vector<int>> index(static_cast<std::size_t>(depth) + 1);
    for (int j = 0; j <= depth; ++j) {
        const std::size_t n = dim == 1 ? (std::size_t{1} << j) : (std::size_t{1} << (2 * j));
        for (std::size_t k = 0; k < n; ++k) {
            index[j].push_back(static_cast<int>(tree.nodes.size()));
            tree.by_level[j].push_back(static_cast<int>(tree.nodes.size()));
            tree.nodes.push_back({j, k, {}, {}});
        }
    }
    for (auto& node : tree.nodes) {
        if (node.level == depth) continue;
        for (const NodeId& c : children(NodeId::from_flat(dim, node.level, node.k), depth)) {
            node.children.push_back(index[c.level][c.flat()]);
        }
    }
    std::function<void(int, std::vector<int>&)> collect = [&](int v, std::vector<int>& out) {
        out.push_back(v);
        for (int c : tree.nodes[v].children) collect(c, out);
    };
    for (std::size_t v = 0; v < tree.nodes.size(); ++v) collect(static_cast<int>(v), tree.nodes[v].subtree);
    return tree;
}

// Golden-section minimum of a convex function on [lo, hi].
Real golden_min(const std::function<Real(Real)>& f, Real lo, Real hi, Real& argmin) {
    const Real ratio = (std::sqrt(5.0L) - 1.0L) / 2.0L;
    Real a = lo;
    Real b = hi;
    for (int it = 0; it < 200 && b - a > 0; ++it) {
        const Real x1 = b - ratio * (b - a);
        const Real x2 = a + ratio * (b - a);
        if (f(x1) <= f(x2)) {
            b = x2;
        } else {
            a = x1;
        }
    }
    argmin = 0.5 * (a + b);
    Real best = f(argmin);
    for (Real x : {lo, hi}) {
        if (f(x) < best) {
            best = f(x);
            argmin = x;
        }
    }
    return best;
}

struct DataCosts {
    std::vector<Real> included;  // min over g of -log z^1, data and coefficient prior only
    std::vector<Real> excluded;
    std::vector<std::vector<Real>> estimate;  // argmin g per band
};

DataCosts data_costs(const Pyramid& pyramid, const FlatTree& tree, const BaseDensity& density, double sigma) {
    DataCosts costs;
    const Real var = static_cast<Real>(sigma) * sigma;
    const Real kappa = density.kappa;
    for (const auto& node : tree.nodes) {
        Real inc = 0.0;
        Real exc = 0.0;
        std::vector<Real> est;
        for (int band = 0; band < tree.bands; ++band) {
            const Real m = pyramid.at(node.level, band, node.k);
            std::function<Real(Real)> f;
            if (density.kind == BaseKind::Gaussian) {
                f = [&](Real g) { return (m - g) * (m - g) / (2 * var) + g * g / (2 * kappa * kappa); };
            } else {
                f = [&](Real g) { return (m - g) * (m - g) / (2 * var) + std::abs(g) / kappa; };
            }
            Real g = 0.0;
            inc += golden_min(f, std::min<Real>(0.0, m), std::max<Real>(0.0, m), g);
            exc += m * m / (2 * var);
            est.push_back(g);
        }
        costs.included.push_back(inc);
        costs.excluded.push_back(exc);
        costs.estimate.push_back(std::move(est));
    }
    return costs;
}

// Per-level beta values, index by level (entry 0 unused).
struct LevelPenalty {
    std::vector<Real> keep;  // -log beta
    std::vector<Real> drop;  // -log(1 - beta)
};

Real beta_from_log_odds(double lam) {
    return lam == std::numeric_limits<double>::infinity() ? 0.0L : 1.0L / (1.0L + std::exp(static_cast<Real>(lam)));
}

void set_level(LevelPenalty& pen, int level, Real beta) {
    pen.keep[level] = beta > 0 ? -std::log(beta) : kInf;
    pen.drop[level] = -std::log1p(-beta);
}

using Bits = std::uint64_t;

std::vector<Bits> enumerate_subtrees(const FlatTree& tree, int v) {
    std::vector<Bits> result{Bits{1} << v};
    for (int c : tree.nodes[v].children) {
        std::vector<Bits> options{0};
        for (Bits s : enumerate_subtrees(tree, c)) options.push_back(s);
        std::vector<Bits> next;
        next.reserve(result.size() * options.size());
        for (Bits r : result) {
            for (Bits o : options) next.push_back(r | o);
        }
        result = std::move(next);
    }
    return result;
}

// Weight of keeping subtree S rooted at v; v's own inclusion penalty is not counted.
Real subtree_cost(const FlatTree& tree, const DataCosts& data, const LevelPenalty& pen, int v, Bits s) {
    Real cost = 0.0;
    for (int u : tree.nodes[v].subtree) {
        const bool on = (s >> u) & 1;
        cost += on ? data.included[u] : data.excluded[u];
        if (u == v) continue;
        const int l = tree.nodes[u].level;
        if (on) {
            if (pen.keep[l] == kInf) return kInf;
            cost += tree.bands * pen.keep[l];
        } else {
            cost += tree.bands * pen.drop[l];
        }
    }
    return cost;
}

int popcount(Bits b) { return __builtin_popcountll(b); }

bool tie(Real x, Real y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return x == y;
    return std::abs(x - y) <= 1e-17L * std::max<Real>(1.0L, std::abs(y));
}

// x beats y by more than the tie tolerance.
bool better(Real x, Real y) { return x < y && !tie(x, y); }

// Best subtree rooted at v: minimal cost, ties to the larger subtree.
std::pair<Real, Bits> best_subtree(const FlatTree& tree, const DataCosts& data, const LevelPenalty& pen, int v) {
    Real best = kInf;
    Bits arg = Bits{1} << v;
    for (Bits s : enumerate_subtrees(tree, v)) {
        const Real c = subtree_cost(tree, data, pen, v, s);
        if (better(c, best) || (tie(c, best) && popcount(s) > popcount(arg))) {
            if (c < best) best = c;
            arg = s;
        }
    }
    return {best, arg};
}

PruneResult assemble(const Pyramid& pyramid, const FlatTree& tree, const DataCosts& data, const BaseDensity& density,
                     Bits selected) {
    PruneResult result;
    result.mask = TreeMask(pyramid.dim, pyramid.depth, false);
    result.coefficients = Pyramid::zeros(pyramid.dim, pyramid.depth, pyramid.family);
    result.coefficients.scaling = pyramid.scaling;
    for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
        if (!((selected >> u) & 1)) continue;
        const auto& node = tree.nodes[u];
        result.mask.set(node.level, node.k, true);
        for (int band = 0; band < tree.bands; ++band) {
            result.coefficients.at(node.level, band, node.k) =
                density.kind == BaseKind::Gaussian ? pyramid.at(node.level, band, node.k)
                                                   : static_cast<double>(data.estimate[u][band]);
        }
    }
    result.raw_mask = result.mask;
    return result;
}

}  // namespace

double map_objective(const Pyramid& pyramid, const TreeMask& effective, const BaseDensity& density,
                     std::span<const double> level_log_odds, std::optional<Hyperprior> hyper, double noise_sigma) {
    pyramid.validate();
    if (level_log_odds.size() != static_cast<std::size_t>(pyramid.depth)) {
        throw DimensionError("need one log-odds value per level 1..J");
    }
    const FlatTree tree = flatten(pyramid.dim, pyramid.depth);
    const DataCosts data = data_costs(pyramid, tree, density, noise_sigma);
    Real total = 0.0;
    for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
        const auto& node = tree.nodes[u];
        const bool on = effective.get(node.level, node.k);
        total += on ? data.included[u] : data.excluded[u];
        if (node.level == 0) continue;
        const Real beta = beta_from_log_odds(level_log_odds[node.level - 1]);
        if (on) {
            total += tree.bands * (beta > 0 ? -std::log(beta) : kInf);
        } else {
            total += tree.bands * -std::log1p(-beta);
        }
        if (hyper && hyper->a != 0.0) total += tree.bands * -hyper->a * std::log(0.5 - beta);
    }
    return static_cast<double>(total);
}

PruneResult brute_force_map(const Pyramid& pyramid, const BaseDensity& density, const BetaSchedule& beta,
                            double noise_sigma) {
    pyramid.validate();
    density.validate();
    beta.validate(pyramid.depth);
    const FlatTree tree = flatten(pyramid.dim, pyramid.depth);
    if (tree.nodes.size() > 22) {
        throw CapacityError("exhaustive fixed-beta search is limited to 22 nodes, tree has " +
                            std::to_string(tree.nodes.size()));
    }
    const DataCosts data = data_costs(pyramid, tree, density, noise_sigma);
    LevelPenalty pen{std::vector<Real>(pyramid.depth + 1, 0.0), std::vector<Real>(pyramid.depth + 1, 0.0)};
    std::vector<double> lam;
    for (int j = 1; j <= pyramid.depth; ++j) {
        set_level(pen, j, beta.at(j));
        lam.push_back(std::log((1.0 - beta.at(j)) / beta.at(j)));
    }
    const auto [cost, selected] = best_subtree(tree, data, pen, 0);
    PruneResult result = assemble(pyramid, tree, data, density, selected);
    result.total_cost = static_cast<double>(cost);
    result.level_log_odds = lam;
    return result;
}

PruneResult brute_force_map(const Pyramid& pyramid, const BaseDensity& density, const Hyperprior& hyper) {
    pyramid.validate();
    density.validate();
    hyper.validate();
    if ((pyramid.dim == 1 && pyramid.depth > 4) || (pyramid.dim == 2 && pyramid.depth > 2)) {
        throw CapacityError("exhaustive automatic search supports depth <= 4 (1D) or <= 2 (2D)");
    }
    const FlatTree tree = flatten(pyramid.dim, pyramid.depth);
    const DataCosts data = data_costs(pyramid, tree, density, 1.0);
    const int depth = pyramid.depth;
    const Real mult = tree.bands;
    LevelPenalty pen{std::vector<Real>(depth + 1, 0.0), std::vector<Real>(depth + 1, 0.0)};
    std::vector<Real> betas(depth + 1, 0.0);

    for (int j = depth; j >= 1; --j) {
        const auto& row = tree.by_level[j];
        const std::size_t n = row.size();
        std::vector<Real> kept(n), pruned(n), gap(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int v = row[i];
            kept[i] = best_subtree(tree, data, pen, v).first;
            pruned[i] = subtree_cost(tree, data, pen, v, 0);
            gap[i] = pruned[i] - kept[i];
        }
        // Candidate grid, by increasing beta.
        std::vector<Real> grid{0.0};
        bool nonpositive = false;
        for (std::size_t i = 0; i < n; ++i) {
            // Round-off left over from the numerical minimisation is not a gap.
            const Real g = gap[i];
            if (g > 1e-14L * std::max(Real{1}, std::abs(pruned[i]))) {
                grid.push_back(1.0L / (1.0L + std::exp(g / mult)));
            } else {
                nonpositive = true;
            }
        }
        if (hyper.a == 0.0 && nonpositive) grid.push_back(0.5L - 1e-12L);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

        Real best_cost = kInf;
        Real best_beta = 0.0;
        int best_size = -1;
        for (Real b : grid) {
            const Real keep_pen = b > 0 ? -std::log(b) : kInf;
            const Real drop_pen = -std::log1p(-b);
            const Real hyper_pen = hyper.a == 0.0 ? 0.0L : -hyper.a * std::log(0.5L - b);
            for (Bits subset = 0; subset < (Bits{1} << n); ++subset) {
                if (b == 0.0 && subset != 0) break;
                Real cost = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    cost += ((subset >> i) & 1) ? kept[i] + mult * keep_pen : pruned[i] + mult * drop_pen;
                }
                cost += static_cast<Real>(n) * mult * hyper_pen;
                const int size = popcount(subset);
                const bool same_candidate = (b == best_beta) && best_size >= 0;
                if (better(cost, best_cost) ||
                    (same_candidate && tie(cost, best_cost) && size > best_size)) {
                    best_cost = cost;
                    best_beta = b;
                    best_size = size;
                }
            }
        }
        betas[j] = best_beta;
        set_level(pen, j, best_beta);
    }

    const auto [root_cost, selected] = best_subtree(tree, data, pen, 0);
    PruneResult result = assemble(pyramid, tree, data, density, selected);
    Real total = root_cost;
    std::vector<double> beta_hat;
    for (int j = 1; j <= depth; ++j) {
        beta_hat.push_back(static_cast<double>(betas[j]));
        result.level_log_odds.push_back(betas[j] > 0 ? static_cast<double>(std::log((1.0L - betas[j]) / betas[j]))
                                                     : std::numeric_limits<double>::infinity());
        if (hyper.a != 0.0) {
            total += static_cast<Real>(tree.by_level[j].size()) * mult * -hyper.a * std::log(0.5L - betas[j]);
        }
    }
    result.beta_hat = beta_hat;
    result.total_cost = static_cast<double>(total);
    return result;
}

}  // namespace besovtree::oracle

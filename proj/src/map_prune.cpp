#include "besovtree/map_prune.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "besovtree/errors.hpp"

namespace besovtree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfClampEpsilon = 1e-12;

// Per-node data terms after minimising over the coefficient value.
struct NodeModel {
    std::vector<std::vector<double>> kept;     // cost with the node included
    std::vector<std::vector<double>> own_gap;  // excluded minus included cost of the node alone
    double inv_two_var = 0.5;                  // excluded cost is energy * inv_two_var
    double laplace_threshold = 0.0;            // > 0 only for the Laplace density
};

NodeModel build_model(const Pyramid& pyramid, const BaseDensity& density, double sigma) {
    NodeModel model;
    const double var = sigma * sigma;
    model.inv_two_var = 1.0 / (2.0 * var);
    const auto levels = static_cast<std::size_t>(pyramid.depth) + 1;
    model.kept.resize(levels);
    model.own_gap.resize(levels);
    const double kappa = density.kappa;
    const double kappa2 = kappa * kappa;
    if (density.kind == BaseKind::Laplace) model.laplace_threshold = var / kappa;
    for (int j = 0; j <= pyramid.depth; ++j) {
        const std::size_t n = pyramid.level_size(j);
        model.kept[j].assign(n, 0.0);
        model.own_gap[j].assign(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double kept = 0.0;
            double gap = 0.0;
            for (int band = 0; band < pyramid.bands(); ++band) {
                const double m = pyramid.at(j, band, k);
                if (density.kind == BaseKind::Gaussian) {
                    kept += m * m / (2.0 * (kappa2 + var));
                    gap += m * m * kappa2 / (2.0 * var * (kappa2 + var));
                } else {
                    const double t = model.laplace_threshold;
                    const double a = std::abs(m);
                    if (a <= t) {
                        kept += m * m / (2.0 * var);
                    } else {
                        kept += a / kappa - var / (2.0 * kappa2);
                        gap += (a - t) * (a - t) / (2.0 * var);
                    }
                }
            }
            model.kept[j][k] = kept;
            model.own_gap[j][k] = gap;
        }
    }
    return model;
}

struct EngineOutput {
    TreeMask raw;
    std::vector<double> log_odds;  // index by level, entry 0 unused
    std::vector<LevelDiagnostics> diagnostics;
    BranchStats stats;
    double root_weight = 0.0;
};

// Bottom-up recursion shared by all modes. Exactly one of fixed/hyper is set.
EngineOutput run_engine(const Pyramid& pyramid, const NodeModel& model, const BetaSchedule* fixed,
                        const Hyperprior* hyper) {
    const int depth = pyramid.depth;
    const int dim = pyramid.dim;
    const int mult = pyramid.bands();
    const double fanout = dim == 1 ? 2.0 : 4.0;

    EngineOutput out;
    out.stats = subtree_energies(pyramid);
    out.raw = TreeMask(dim, depth, false);
    out.log_odds.assign(static_cast<std::size_t>(depth) + 1, 0.0);

    std::vector<std::vector<double>> pruned(static_cast<std::size_t>(depth) + 1);
    double penalty_below = 0.0;  // exclusion penalties of the complete subtree under a level-j node

    for (int j = depth; j >= 0; --j) {
        const std::size_t n = pyramid.level_size(j);
        auto& weight = out.stats.weight[j];
        auto& gap = out.stats.gap[j];
        pruned[j].assign(n, 0.0);
        if (j < depth) {
            const double lam = out.log_odds[j + 1];
            penalty_below = fanout * (mult * softplus(-lam) + penalty_below);
        }
        for (std::size_t k = 0; k < n; ++k) {
            double f = model.kept[j][k];
            double d = model.own_gap[j][k];
            if (j < depth) {
                const double lam = out.log_odds[j + 1];
                const double include = mult * softplus(lam);
                const double exclude = mult * softplus(-lam);
                for (const NodeId& c : children(NodeId::from_flat(dim, j, k), depth)) {
                    const std::size_t ck = c.flat();
                    if (out.raw.get(j + 1, ck)) {
                        f += out.stats.weight[j + 1][ck] + include;
                        d += std::max(0.0, out.stats.gap[j + 1][ck] - mult * lam);
                    } else {
                        f += pruned[j + 1][ck] + exclude;
                    }
                }
            }
            weight[k] = f;
            gap[k] = d;
            pruned[j][k] = out.stats.energy[j][k] * model.inv_two_var + penalty_below;
        }

        if (j == 0) {
            out.raw.set(0, 0, true);
            break;
        }
        double lam = 0.0;
        if (fixed != nullptr) {
            lam = beta_to_log_odds(fixed->at(j));
        } else {
            LevelSelection sel = level_beta_select(gap, weight, pruned[j], mult, *hyper);
            lam = sel.log_odds;
            LevelDiagnostics diag;
            diag.level = j;
            diag.grid_size = sel.candidates.size();
            diag.chosen_index = sel.chosen;
            diag.beta = sel.beta;
            diag.log_odds = sel.log_odds;
            diag.included = sel.included.size();
            diag.candidates = std::move(sel.candidates);
            out.diagnostics.push_back(std::move(diag));
        }
        out.log_odds[j] = lam;
        // Same test as the candidate grid uses, so a node sitting exactly on its own
        // candidate is kept.
        for (std::size_t k = 0; k < n; ++k) out.raw.set(j, k, gap[k] / mult >= lam);
    }
    out.root_weight = out.stats.weight[0][0];
    std::reverse(out.diagnostics.begin(), out.diagnostics.end());
    return out;
}

PruneResult finish(const Pyramid& pyramid, const NodeModel& model, const BaseDensity& density, EngineOutput engine,
                   const Hyperprior* hyper) {
    PruneResult result;
    result.raw_mask = engine.raw;
    result.mask = engine.raw.effective();
    result.coefficients = Pyramid::zeros(pyramid.dim, pyramid.depth, pyramid.family);
    result.coefficients.scaling = pyramid.scaling;
    for (int j = 0; j <= pyramid.depth; ++j) {
        for (std::size_t k = 0; k < pyramid.level_size(j); ++k) {
            if (!result.mask.get(j, k)) continue;
            for (int band = 0; band < pyramid.bands(); ++band) {
                const double m = pyramid.at(j, band, k);
                result.coefficients.at(j, band, k) =
                    density.kind == BaseKind::Laplace ? soft_threshold(m, model.laplace_threshold) : m;
            }
        }
    }
    result.level_log_odds.assign(engine.log_odds.begin() + 1, engine.log_odds.end());
    double cost = engine.root_weight;
    if (hyper != nullptr) {
        std::vector<double> beta_hat;
        for (int j = 1; j <= pyramid.depth; ++j) {
            const double lam = engine.log_odds[j];
            beta_hat.push_back(log_odds_to_beta(lam));
            cost += static_cast<double>(pyramid.level_size(j)) * pyramid.bands() * hyperprior_penalty(lam, hyper->a);
        }
        result.beta_hat = std::move(beta_hat);
    }
    result.total_cost = cost;
    result.diagnostics = std::move(engine.diagnostics);
    result.stats = std::move(engine.stats);
    return result;
}

}  // namespace

std::string_view to_string(BaseKind kind) { return kind == BaseKind::Gaussian ? "gaussian" : "laplace"; }

BaseKind parse_base_kind(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "gaussian" || lower == "normal") return BaseKind::Gaussian;
    if (lower == "laplace") return BaseKind::Laplace;
    throw ParameterError("unknown base prior: " + std::string(name));
}

void BaseDensity::validate() const {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("kappa must be positive and finite");
}

void Hyperprior::validate() const {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("hyperprior exponent a must be >= 0");
}

void BetaSchedule::validate(int depth) const {
    if (beta.empty()) throw ParameterError("beta schedule is empty");
    if (beta.size() != 1 && beta.size() != static_cast<std::size_t>(depth)) {
        throw ParameterError("per-level beta needs one entry for each level 1..J");
    }
    for (double b : beta) {
        if (!(b > 0.0 && b <= 0.5)) {
            throw ParameterError("fixed beta must lie in (0, 0.5], got " + std::to_string(b));
        }
    }
}

double beta_to_log_odds(double beta) {
    if (beta <= 0.0) return kInf;
    return std::log1p(-beta) - std::log(beta);
}

double log_odds_to_beta(double log_odds) {
    if (log_odds == kInf) return 0.0;
    if (log_odds > 0) {
        const double e = std::exp(-log_odds);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(log_odds));
}

double softplus(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double hyperprior_penalty(double log_odds, double a) {
    if (a == 0.0) return 0.0;
    // 0.5 - beta = tanh(lambda / 2) / 2
    if (log_odds == kInf) return a * std::log(2.0);
    if (!(log_odds > 0.0)) return kInf;
    return -a * (std::log(std::tanh(0.5 * log_odds)) - std::log(2.0));
}

LevelSelection level_beta_select(std::span<const double> gaps, std::span<const double> kept,
                                 std::span<const double> pruned, int multiplicity, const Hyperprior& hyper) {
    hyper.validate();
    const std::size_t n = gaps.size();
    if (kept.size() != n || pruned.size() != n) throw DimensionError("gap and weight arrays differ in length");
    for (double g : gaps) {
        if (!std::isfinite(g)) throw ParameterError("gaps must be finite");
    }
    const double mult = multiplicity;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return gaps[x] > gaps[y]; });

    // prefix[s] = change in data weight when the s largest gaps are kept.
    std::vector<double> prefix(n + 1, 0.0);
    double base = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] + (kept[order[i]] - pruned[order[i]]);
        base += pruned[i];
    }

    std::vector<GridCandidate> cands;
    cands.push_back({kInf, 0.0, 0, 0.0});
    std::size_t positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = gaps[order[i]];
        if (!(g > 0.0)) break;
        positive = i + 1;
        if (i + 1 < n && gaps[order[i + 1]] == g) continue;
        const double lam = g / mult;
        cands.push_back({lam, log_odds_to_beta(lam), i + 1, 0.0});
    }
    if (hyper.a == 0.0 && positive < n) {
        const double lam = std::log1p(2.0 * kHalfClampEpsilon / (0.5 - kHalfClampEpsilon));
        std::size_t count = 0;
        while (count < n && gaps[order[count]] / mult >= lam) ++count;
        cands.push_back({lam, 0.5 - kHalfClampEpsilon, count, 0.0});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const GridCandidate& x, const GridCandidate& y) { return x.log_odds > y.log_odds; });

    const double nodes = static_cast<double>(n);
    std::size_t best = 0;
    double best_excess = 0.0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
        auto& cand = cands[c];
        const double kept_count = static_cast<double>(cand.included);
        double cost = base + prefix[cand.included];
        if (cand.included > 0) cost += mult * kept_count * softplus(cand.log_odds);
        cost += mult * (nodes - kept_count) * softplus(-cand.log_odds);
        cost += nodes * mult * hyperprior_penalty(cand.log_odds, hyper.a);
        cand.cost = cost;
        if (c == 0) continue;
        // Selection uses B(candidate) - B(beta = 0) in a form without cancellation: the
        // node that defines a grid point saves exactly what its penalty costs, so the
        // absolute costs above cannot separate it from beta = 0 once e^-gap < 1 ulp.
        const std::size_t k = cand.included;
        const double lam = cand.log_odds;
        const double edge = k > 0 && gaps[order[k - 1]] > 0.0 && gaps[order[k - 1]] / mult == lam
                                ? gaps[order[k - 1]]
                                : mult * lam;
        double excess = 0.0;
        for (std::size_t i = 0; i < k; ++i) excess += edge - gaps[order[i]];
        const double beta = log_odds_to_beta(lam);
        excess += mult * nodes * std::log1p(std::exp(-lam));
        if (hyper.a != 0.0) excess += -nodes * mult * hyper.a * std::log1p(-2.0 * beta);
        if (excess < best_excess) {
            best = c;
            best_excess = excess;
        }
    }

    LevelSelection sel;
    sel.chosen = best;
    sel.log_odds = cands[best].log_odds;
    sel.beta = cands[best].beta;
    sel.included.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cands[best].included));
    std::sort(sel.included.begin(), sel.included.end());
    sel.candidates = std::move(cands);
    return sel;
}

PruneResult prune_fixed_beta(const Pyramid& pyramid, const BetaSchedule& beta, const BaseDensity& density,
                             double noise_sigma) {
    pyramid.validate();
    density.validate();
    beta.validate(pyramid.depth);
    if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) throw ParameterError("noise sigma must be positive");
    const NodeModel model = build_model(pyramid, density, noise_sigma);
    return finish(pyramid, model, density, run_engine(pyramid, model, &beta, nullptr), nullptr);
}

PruneResult auto_prune_gaussian(const Pyramid& pyramid, const Hyperprior& hyper) {
    pyramid.validate();
    hyper.validate();
    const BaseDensity density = BaseDensity::gaussian(1.0);
    const NodeModel model = build_model(pyramid, density, 1.0);
    return finish(pyramid, model, density, run_engine(pyramid, model, nullptr, &hyper), &hyper);
}

PruneResult auto_prune_laplace(const Pyramid& pyramid, const Hyperprior& hyper, double kappa) {
    pyramid.validate();
    hyper.validate();
    const BaseDensity density = BaseDensity::laplace(kappa);
    density.validate();
    const NodeModel model = build_model(pyramid, density, 1.0);
    return finish(pyramid, model, density, run_engine(pyramid, model, nullptr, &hyper), &hyper);
}

double rescale_beta(double beta, double exponent) {
    if (!(beta > 0.0 && beta <= 0.5)) throw ParameterError("beta must lie in (0, 0.5]");
    if (!(exponent > 0.0) || !std::isfinite(exponent)) throw ParameterError("exponent must be positive");
    return log_odds_to_beta(exponent * beta_to_log_odds(beta));
}

double reduce_to_unit(double beta, double sigma, double kappa) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be positive");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("kappa must be positive");
    const double c = sigma * sigma * (kappa * kappa + sigma * sigma) / (2.0 * kappa * kappa);
    return rescale_beta(beta, c);
}

double estimate_noise_sigma(const Pyramid& pyramid) {
    pyramid.validate();
    std::vector<double> mags;
    for (const auto& band : pyramid.details[pyramid.depth]) {
        for (double v : band) mags.push_back(std::abs(v));
    }
    const auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
    std::nth_element(mags.begin(), mid, mags.end());
    double median = *mid;
    if (mags.size() % 2 == 0) {
        const double lower = *std::max_element(mags.begin(), mid);
        median = 0.5 * (median + lower);
    }
    return median / 0.6745;
}

}  // namespace besovtree

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "besovtree/dyadic_tree.hpp"
#include "besovtree/grid_wavelet.hpp"

namespace besovtree {

enum class BaseKind { Gaussian, Laplace };

std::string_view to_string(BaseKind kind);
BaseKind parse_base_kind(std::string_view name);

/// Base prior on included coefficients. Gaussian: N(0, kappa^2), penalty g^2 / (2 kappa^2).
/// Laplace: penalty |g| / kappa, which soft-thresholds the data at 1 / kappa (unit noise).
struct BaseDensity {
    BaseKind kind = BaseKind::Gaussian;
    double kappa = 1.0;

    static BaseDensity gaussian(double kappa = 1.0) { return {BaseKind::Gaussian, kappa}; }
    static BaseDensity laplace(double kappa) { return {BaseKind::Laplace, kappa}; }
    void validate() const;
};

/// Hyperprior density proportional to (0.5 - beta)^a on [0, 0.5].
struct Hyperprior {
    double a = 0.0;
    void validate() const;
};

/// One beta for every level, or one per level j = 1..J.
struct BetaSchedule {
    std::vector<double> beta;

    static BetaSchedule uniform(double b) { return {{b}}; }
    double at(int level) const { return beta.size() == 1 ? beta.front() : beta.at(static_cast<std::size_t>(level - 1)); }
    /// Entries must lie in (0, 0.5]; size 1 or depth.
    void validate(int depth) const;
};

// Beta is handled internally through its log-odds lambda = log((1 - beta) / beta);
// lambda = +inf encodes beta = 0 (nothing may be included).
double beta_to_log_odds(double beta);
double log_odds_to_beta(double log_odds);
/// log(1 + e^x), finite for all finite x, and correct at +-inf.
double softplus(double x);
/// -a log(0.5 - beta) written in terms of the log-odds.
double hyperprior_penalty(double log_odds, double a);

/// One point of the data-determined beta grid.
struct GridCandidate {
    double log_odds = std::numeric_limits<double>::infinity();
    double beta = 0.0;
    std::size_t included = 0;  // nodes with gap >= multiplicity * log_odds
    double cost = 0.0;         // row weight B = L + R at this candidate
};

struct LevelSelection {
    double log_odds = std::numeric_limits<double>::infinity();
    double beta = 0.0;
    std::vector<std::size_t> included;    // node indices in the selected set
    std::size_t chosen = 0;               // index into candidates
    std::vector<GridCandidate> candidates;  // ordered by increasing beta
};

/// Levelwise MAP choice of beta for one row of nodes.
///
/// gaps[k] = pruned[k] - kept[k] is the weight saved by keeping node k's optimised subtree.
/// Every node pays `multiplicity` copies of the inclusion/exclusion penalty (3 bands in 2D).
/// Candidates are beta = 0, beta_k = 1 / (1 + exp(gap_k / multiplicity)) for positive gaps, and
/// for a == 0 a point 1e-12 below 0.5 when some gap is nonpositive. Ties go to the smaller beta.
LevelSelection level_beta_select(std::span<const double> gaps, std::span<const double> kept,
                                 std::span<const double> pruned, int multiplicity, const Hyperprior& hyper);

struct LevelDiagnostics {
    int level = 0;
    std::size_t grid_size = 0;
    std::size_t chosen_index = 0;
    double beta = 0.0;
    double log_odds = 0.0;
    std::size_t included = 0;
    std::vector<GridCandidate> candidates;
};

struct PruneResult {
    TreeMask mask;         // effective bits
    TreeMask raw_mask;     // per-level decisions before projection
    Pyramid coefficients;  // estimates, zero off the mask
    std::optional<std::vector<double>> beta_hat;  // levels 1..J, automatic modes only
    std::vector<double> level_log_odds;           // log-odds used on levels 1..J
    double total_cost = 0.0;                      // -log posterior up to data-independent constants
    std::vector<LevelDiagnostics> diagnostics;    // automatic modes only
    BranchStats stats;
};

/// Exact MAP tree for fixed beta. noise_sigma != 1 selects the general Gaussian-noise costs.
PruneResult prune_fixed_beta(const Pyramid& pyramid, const BetaSchedule& beta, const BaseDensity& density,
                             double noise_sigma = 1.0);

/// Levelwise automatic beta with N(0,1) coefficients and unit noise; kept nodes return m.
PruneResult auto_prune_gaussian(const Pyramid& pyramid, const Hyperprior& hyper);

/// Levelwise automatic beta with Laplace(0, kappa) coefficients; kept nodes are soft-thresholded.
PruneResult auto_prune_laplace(const Pyramid& pyramid, const Hyperprior& hyper, double kappa);

/// beta^c / (beta^c + (1 - beta)^c), evaluated in log-odds form.
double rescale_beta(double beta, double exponent);

/// Unit-variance equivalent of beta for noise sigma and prior scale kappa:
/// exponent c = sigma^2 (kappa^2 + sigma^2) / (2 kappa^2).
double reduce_to_unit(double beta, double sigma, double kappa);

/// MAD / 0.6745 over the finest-level coefficients of every band.
double estimate_noise_sigma(const Pyramid& pyramid);

/// sign(m) max(|m| - t, 0)
inline double soft_threshold(double m, double t) {
    const double mag = (m < 0 ? -m : m) - t;
    if (mag <= 0) return 0.0;
    return m < 0 ? -mag : mag;
}

}  // namespace besovtree

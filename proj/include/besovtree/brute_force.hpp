#pragma once

#include <optional>
#include <span>

#include "besovtree/map_prune.hpp"

// Exhaustive reference solvers for small trees. They share no code with the pruning
// recursion: coefficient costs are minimised numerically, subtrees are enumerated
// explicitly and each level's (beta, kept set) pair is searched over every subset.
namespace besovtree::oracle {

/// -log posterior of an effective mask, summed node by node.
/// level_log_odds holds the log-odds of beta for levels 1..J. With a hyperprior every
/// node also pays -a log(0.5 - beta_j).
double map_objective(const Pyramid& pyramid, const TreeMask& effective, const BaseDensity& density,
                     std::span<const double> level_log_odds, std::optional<Hyperprior> hyper = std::nullopt,
                     double noise_sigma = 1.0);

/// Global minimiser over all proper subtrees for fixed beta; at most 22 nodes.
PruneResult brute_force_map(const Pyramid& pyramid, const BaseDensity& density, const BetaSchedule& beta,
                            double noise_sigma = 1.0);

/// Levelwise automatic selection solved by enumeration; 1D depth <= 4, 2D depth <= 2.
/// Gaussian density must have kappa = 1 (unit normalisation).
PruneResult brute_force_map(const Pyramid& pyramid, const BaseDensity& density, const Hyperprior& hyper);

}  // namespace besovtree::oracle

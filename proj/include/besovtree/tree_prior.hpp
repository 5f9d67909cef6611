#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "besovtree/dyadic_tree.hpp"
#include "besovtree/grid_wavelet.hpp"

namespace besovtree {

/// Seed plus stream id. Equal (seed, stream) pairs give identical draw sequences.
struct RandomSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::mt19937_64 engine() const;
    RandomSeed substream(std::uint64_t id) const { return {seed, stream * 0x9E3779B97F4A7C15ULL + id + 1}; }
};

/// Random tree Besov prior B^s_pp with wavelet density index beta.
///
/// `beta` holds either one value used on every level or one value per level j = 1..J.
/// Here kappa scales the p-exponential density exp(-|x|^p / (2 kappa^p)); it is a
/// different parameterisation from the kappa of the pruning base densities.
struct PriorConfig {
    double s = 1.0;
    double p = 2.0;
    double kappa = 1.0;
    std::vector<double> beta{0.5};
    int dim = 1;
    int depth = 0;

    void validate() const;
    /// Inclusion probability of a level-j node given its parent, j >= 1.
    double beta_at(int level) const;
    /// gamma = d + log2(beta) for scalar beta.
    double gamma() const;
};

/// Galton-Watson subtree: root always on, each child on with probability beta_j given its parent.
TreeMask sample_subtree(const PriorConfig& config, const RandomSeed& seed);

/// One draw from the density proportional to exp(-|x|^p / (2 kappa^p)).
double sample_coefficient(double p, double kappa, std::mt19937_64& rng);
double sample_coefficient(double p, double kappa, const RandomSeed& seed);

struct PriorDraw {
    TreeMask mask;
    Pyramid pyramid;
    DyadicSignal signal;
};

/// Coefficients 2^{-j(s + d/2 - d/p)} X on the sampled subtree, zero elsewhere, synthesised.
PriorDraw sample_besov(const PriorConfig& config, const WaveletBasis& basis, const RandomSeed& seed);
DyadicSignal sample_besov_function(const PriorConfig& config, const WaveletBasis& basis, const RandomSeed& seed);

/// (sum_{j=-1}^{J} 2^{jp(s+d/2-d/p)} ||f_j||_p^p)^{1/p}; the scaling block is level -1.
double besov_norm(const Pyramid& pyramid, double s, double p);

}  // namespace besovtree

#include "besovtree/tree_prior.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <string>

#include "besovtree/errors.hpp"

namespace besovtree {

namespace {

// Uniform on the open interval (0, 1) from the top 53 bits.
double open_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::mt19937_64 RandomSeed::engine() const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

void PriorConfig::validate() const {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError("prior integrability p must be >= 1");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("prior scale kappa must be positive");
    if (dim != 1 && dim != 2) throw ParameterError("prior dimension must be 1 or 2");
    if (depth < 0) throw ParameterError("prior depth must be nonnegative");
    if (beta.empty()) throw ParameterError("beta must not be empty");
    if (beta.size() != 1 && beta.size() != static_cast<std::size_t>(depth)) {
        throw ParameterError("per-level beta needs one entry for each level 1..J");
    }
    for (double b : beta) {
        if (!(b >= 0.0 && b <= 1.0)) throw ParameterError("beta entries must lie in [0, 1]");
    }
}

double PriorConfig::beta_at(int level) const {
    if (beta.size() == 1) return beta.front();
    return beta.at(static_cast<std::size_t>(level - 1));
}

double PriorConfig::gamma() const { return dim + std::log2(beta.front()); }

TreeMask sample_subtree(const PriorConfig& config, const RandomSeed& seed) {
    config.validate();
    auto rng = seed.engine();
    // Raw bits are i.i.d. Bernoulli(beta_j); projecting them gives the branching process.
    TreeMask raw(config.dim, config.depth, false);
    raw.set(0, 0, true);
    for (int j = 1; j <= config.depth; ++j) {
        const double b = config.beta_at(j);
        for (std::size_t k = 0; k < raw.level_size(j); ++k) raw.set(j, k, open_uniform(rng) < b);
    }
    return raw.effective();
}

double sample_coefficient(double p, double kappa, std::mt19937_64& rng) {
    if (!(p >= 1.0)) throw ParameterError("p must be >= 1, got " + std::to_string(p));
    if (!(kappa > 0.0)) throw ParameterError("kappa must be positive");
    // |X|^p / (2 kappa^p) ~ Gamma(1/p, 1); invert its CDF.
    const double u = open_uniform(rng);
    const double sign = (rng() >> 63) ? -1.0 : 1.0;
    const double g = boost::math::gamma_p_inv(1.0 / p, u);
    return sign * kappa * std::pow(2.0 * g, 1.0 / p);
}

double sample_coefficient(double p, double kappa, const RandomSeed& seed) {
    auto rng = seed.engine();
    return sample_coefficient(p, kappa, rng);
}

PriorDraw sample_besov(const PriorConfig& config, const WaveletBasis& basis, const RandomSeed& seed) {
    config.validate();
    if (!(config.s < basis.regularity)) {
        throw ParameterError("smoothness s=" + std::to_string(config.s) + " must be below the basis regularity " +
                             std::to_string(basis.regularity));
    }
    PriorDraw draw;
    draw.mask = sample_subtree(config, seed.substream(0));
    draw.pyramid = Pyramid::zeros(config.dim, config.depth, basis.family);
    const double d = config.dim;
    const double exponent = config.s + d / 2.0 - d / config.p;
    auto rng = seed.substream(1).engine();
    for (int j = 0; j <= config.depth; ++j) {
        const double scale = std::pow(2.0, -j * exponent);
        for (std::size_t k = 0; k < draw.pyramid.level_size(j); ++k) {
            for (int band = 0; band < draw.pyramid.bands(); ++band) {
                const double x = sample_coefficient(config.p, config.kappa, rng);
                draw.pyramid.at(j, band, k) = draw.mask.get(j, k) ? scale * x : 0.0;
            }
        }
    }
    draw.signal = inverse_dwt(draw.pyramid);
    return draw;
}

DyadicSignal sample_besov_function(const PriorConfig& config, const WaveletBasis& basis, const RandomSeed& seed) {
    return sample_besov(config, basis, seed).signal;
}

double besov_norm(const Pyramid& pyramid, double s, double p) {
    if (!(p >= 1.0)) throw ParameterError("p must be >= 1");
    pyramid.validate();
    const double d = pyramid.dim;
    const double exponent = s + d / 2.0 - d / p;
    double total = 0.0;
    double coarse = 0.0;
    for (double v : pyramid.scaling) coarse += std::pow(std::abs(v), p);
    total += std::pow(2.0, -p * exponent) * coarse;
    for (int j = 0; j <= pyramid.depth; ++j) {
        double level = 0.0;
        for (const auto& band : pyramid.details[j]) {
            for (double v : band) level += std::pow(std::abs(v), p);
        }
        total += std::pow(2.0, j * p * exponent) * level;
    }
    return std::pow(total, 1.0 / p);
}

}  // namespace besovtree

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "besovtree/grid_wavelet.hpp"
#include "besovtree/map_prune.hpp"
#include "besovtree/quality.hpp"

namespace besovtree {

enum class BetaMode { Fixed, Automatic };
enum class NoiseMode { AssumeUnit, Estimate };

/// Denoising pipeline settings. The input is multiplied by `scale` before the transform
/// and divided by it afterwards. With NoiseMode::Estimate the noise level is taken from the
/// finest-level MAD of the scaled coefficients.
struct DenoiseConfig {
    WaveletFamily wavelet = WaveletFamily::Haar;
    BaseDensity density = BaseDensity::gaussian();
    BetaMode mode = BetaMode::Automatic;
    BetaSchedule beta = BetaSchedule::uniform(1e-4);  // used in fixed mode
    Hyperprior hyper{100.0};                         // used in automatic mode
    double scale = 1.0;
    NoiseMode noise = NoiseMode::AssumeUnit;

    static DenoiseConfig fixed(double beta, BaseDensity density = BaseDensity::gaussian());
    static DenoiseConfig automatic(double a, BaseDensity density = BaseDensity::gaussian());
    void validate() const;
};

struct DenoiseOutput {
    DyadicSignal signal;
    PruneResult prune;
    double noise_sigma = 1.0;  // noise level used on the scaled coefficients
};

DenoiseOutput denoise(const DyadicSignal& signal, const DenoiseConfig& config);

/// Prunes an existing pyramid (unit scale) with the pruning mode chosen by `config`.
PruneResult prune_pyramid(const Pyramid& pyramid, const DenoiseConfig& config, double noise_sigma = 1.0);

/// 2D scale heuristic 250 / noise_pct, noise given in percent of the maximum amplitude.
double default_image_scale(double noise_pct);

/// Circular 1D convolution with an odd-length kernel centred on its middle tap.
struct ConvOp {
    std::vector<double> kernel;

    static ConvOp delta() { return {{1.0}}; }
    /// Sampled Gaussian of standard deviation `sigma` (in samples), truncated at
    /// `radius` taps each side and normalised to unit sum.
    static ConvOp gaussian(double sigma, int radius);
    void validate() const;
};

DyadicSignal convolve(const DyadicSignal& x, const ConvOp& op);
/// Adjoint (circular correlation): <Ax, y> == <x, A^T y>.
DyadicSignal adjoint(const DyadicSignal& y, const ConvOp& op);
/// ||A||^2 by power iteration on A^T A for signals of length n.
double operator_norm_sq(const ConvOp& op, std::size_t n, int iterations = 200);

struct PnPConfig {
    std::optional<double> tau;  // default 1 / ||A||^2
    int iterations = 50;
    double tolerance = 1e-4;
    DenoiseConfig denoiser;
    void validate() const;
};

struct PnPResult {
    DyadicSignal signal;
    int iterations = 0;
    double tau = 0.0;
    std::vector<double> relative_change;  // ||f_{t+1} - f_t|| / ||f_t|| per iteration
};

using PnPObserver = std::function<void(int iteration, const DyadicSignal& iterate)>;

/// f <- Denoise(f - tau A^T (A f - m)) from f = 0. Throws DivergenceError when
/// ||f|| exceeds 1e3 ||m||, ParameterError when tau ||A||^2 >= 2.
PnPResult pnp_deconvolve(const DyadicSignal& measurement, const ConvOp& op, const PnPConfig& config,
                         const PnPObserver& observer = {});

enum class ThresholdMode { Soft, Hard };

/// Thresholds every detail coefficient; the scaling coefficient is left alone.
Pyramid threshold_pyramid(const Pyramid& pyramid, ThresholdMode mode, double t);
DyadicSignal threshold_reconstruct(const Pyramid& pyramid, ThresholdMode mode, double t);

struct ThresholdSweep {
    double best_threshold = 0.0;
    double best_score = 0.0;
    DyadicSignal signal;
    std::vector<double> thresholds;
    std::vector<double> scores;
};

/// Tries every threshold and keeps the one with the best score against `reference`
/// (SSIM for 2D signals, negative relative error for 1D). Ties keep the earlier threshold.
ThresholdSweep threshold_sweep(const Pyramid& pyramid, ThresholdMode mode, std::span<const double> thresholds,
                               const DyadicSignal& reference, double scale = 1.0);

/// n log-spaced points on [1e-6, 0.49] (n = 1 gives {0.49}) followed by `refine`
/// points 0.5 - 10^-(3 + i) approaching the upper end of the admissible range.
std::vector<double> beta_grid(int n, int refine = 0);

struct BetaSweep {
    std::vector<double> betas;
    std::vector<double> scores;
    double best_beta = 0.0;
    double best_score = 0.0;
    DenoiseOutput best;
};

enum class SweepMetric { Auto, Ssim, RelError };

/// Fixed-beta denoising at every grid point with `base` as the template config, scored
/// against `reference`. Auto scores by SSIM in 2D and by negative relative error in 1D.
/// Ties keep the larger beta.
BetaSweep sweep_beta(const DyadicSignal& noisy, const DyadicSignal& reference, const DenoiseConfig& base,
                     std::span<const double> grid, SweepMetric metric = SweepMetric::Auto);

struct BenchmarkConfig {
    WaveletFamily wavelet = WaveletFamily::Daubechies2;
    double scale = 1.0;
    double kappa_laplace = 0.11;
    double a_gaussian = 100.0;
    double a_laplace = 10.0;
    std::vector<double> beta_grid;          // empty: beta_grid(25, 4)
    std::vector<double> threshold_factors;  // multiples of the MAD noise estimate; empty: 0, 0.1, ..., 6
};

struct BenchmarkRow {
    std::string method;
    MetricsReport metrics;
    std::optional<double> beta;       // swept fixed beta
    std::optional<double> threshold;  // swept threshold, in input units
};

/// Noisy input, fixed/automatic Gaussian, fixed/automatic Laplace, soft and hard thresholding.
std::vector<BenchmarkRow> run_benchmark(const DyadicSignal& clean, const DyadicSignal& noisy,
                                        const BenchmarkConfig& config);

/// Piecewise-constant blocks test signal on 2^(J+1) points t_i = (i + 1) / n.
DyadicSignal blocks_signal(int depth);

/// Piecewise-smooth grey image in [0, 1] with side 2^(J+1): smooth shading plus
/// a disc, a rectangle, a triangle and a ring with sharp edges.
DyadicSignal synthetic_image(int depth);

/// Standard deviation of the samples (population form).
double signal_sd(const DyadicSignal& signal);
/// Noise sd for an sd(signal) / sd(noise) ratio.
double noise_sigma_for_snr(const DyadicSignal& signal, double snr);
/// Noise sd equal to pct percent of the maximum absolute amplitude.
double noise_sigma_for_pct(const DyadicSignal& signal, double pct);
/// signal + sigma * N(0, 1) from a seeded mt19937_64.
DyadicSignal add_gaussian_noise(const DyadicSignal& signal, double sigma, std::uint64_t seed);

}  // namespace besovtree

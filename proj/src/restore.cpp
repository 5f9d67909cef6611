#include "besovtree/restore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "besovtree/errors.hpp"
#include "besovtree/quality.hpp"

namespace besovtree {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

DyadicSignal scaled(const DyadicSignal& signal, double factor) {
    DyadicSignal out = signal;
    if (factor != 1.0) {
        for (double& v : out.values) v *= factor;
    }
    return out;
}

Pyramid scaled(const Pyramid& pyramid, double factor) {
    Pyramid out = pyramid;
    for (double& v : out.scaling) v *= factor;
    for (auto& level : out.details) {
        for (auto& band : level) {
            for (double& v : band) v *= factor;
        }
    }
    return out;
}

void check_1d(const DyadicSignal& x) {
    if (x.dim != 1) throw DimensionError("convolution operators act on 1D signals");
}

std::size_t wrap(std::int64_t i, std::size_t n) {
    const auto m = static_cast<std::int64_t>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
}

}  // namespace

DenoiseConfig DenoiseConfig::fixed(double beta, BaseDensity density) {
    DenoiseConfig c;
    c.mode = BetaMode::Fixed;
    c.beta = BetaSchedule::uniform(beta);
    c.density = density;
    return c;
}

DenoiseConfig DenoiseConfig::automatic(double a, BaseDensity density) {
    DenoiseConfig c;
    c.mode = BetaMode::Automatic;
    c.hyper = Hyperprior{a};
    c.density = density;
    return c;
}

void DenoiseConfig::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("scale factor must be positive");
    density.validate();
    if (mode == BetaMode::Automatic) {
        hyper.validate();
        if (density.kind == BaseKind::Gaussian && density.kappa != 1.0) {
            throw ParameterError("automatic Gaussian pruning uses kappa = 1");
        }
    }
}

PruneResult prune_pyramid(const Pyramid& pyramid, const DenoiseConfig& config, double noise_sigma) {
    config.validate();
    if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) throw ParameterError("noise sigma must be positive");
    if (config.mode == BetaMode::Fixed) return prune_fixed_beta(pyramid, config.beta, config.density, noise_sigma);

    // Automatic modes assume unit noise: normalise, prune, and map the estimate back.
    const Pyramid unit = noise_sigma == 1.0 ? pyramid : scaled(pyramid, 1.0 / noise_sigma);
    PruneResult result = config.density.kind == BaseKind::Gaussian
                             ? auto_prune_gaussian(unit, config.hyper)
                             : auto_prune_laplace(unit, config.hyper, config.density.kappa);
    if (noise_sigma != 1.0) {
        result.coefficients = scaled(result.coefficients, noise_sigma);
        result.coefficients.scaling = pyramid.scaling;
    }
    return result;
}

DenoiseOutput denoise(const DyadicSignal& signal, const DenoiseConfig& config) {
    signal.validate();
    config.validate();
    const Pyramid pyramid = forward_dwt(scaled(signal, config.scale), WaveletBasis::make(config.wavelet));
    DenoiseOutput out;
    if (config.noise == NoiseMode::Estimate) {
        out.noise_sigma = estimate_noise_sigma(pyramid);
        if (!(out.noise_sigma > 0.0)) throw ParameterError("estimated noise level is zero");
    }
    out.prune = prune_pyramid(pyramid, config, out.noise_sigma);
    out.signal = scaled(inverse_dwt(out.prune.coefficients), 1.0 / config.scale);
    return out;
}

double default_image_scale(double noise_pct) {
    if (!(noise_pct > 0.0)) throw ParameterError("noise percentage must be positive");
    return 250.0 / noise_pct;
}

ConvOp ConvOp::gaussian(double sigma, int radius) {
    if (!(sigma > 0.0)) throw ParameterError("kernel width must be positive");
    if (radius < 0) throw ParameterError("kernel radius must be nonnegative");
    ConvOp op;
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        op.kernel.push_back(std::exp(-0.5 * i * i / (sigma * sigma)));
        total += op.kernel.back();
    }
    for (double& v : op.kernel) v /= total;
    return op;
}

void ConvOp::validate() const {
    if (kernel.empty() || kernel.size() % 2 == 0) throw ParameterError("kernel length must be odd");
    bool nonzero = false;
    for (double v : kernel) {
        if (!std::isfinite(v)) throw ParameterError("kernel entries must be finite");
        nonzero = nonzero || v != 0.0;
    }
    if (!nonzero) throw ParameterError("kernel must not be identically zero");
}

DyadicSignal convolve(const DyadicSignal& x, const ConvOp& op) {
    check_1d(x);
    op.validate();
    const std::size_t n = x.values.size();
    const auto c = static_cast<std::int64_t>(op.kernel.size() / 2);
    DyadicSignal y = DyadicSignal::zeros(1, x.depth);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < op.kernel.size(); ++k) {
            acc += op.kernel[k] * x.values[wrap(static_cast<std::int64_t>(i) - (static_cast<std::int64_t>(k) - c), n)];
        }
        y.values[i] = acc;
    }
    return y;
}

DyadicSignal adjoint(const DyadicSignal& y, const ConvOp& op) {
    check_1d(y);
    op.validate();
    const std::size_t n = y.values.size();
    const auto c = static_cast<std::int64_t>(op.kernel.size() / 2);
    DyadicSignal x = DyadicSignal::zeros(1, y.depth);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < op.kernel.size(); ++k) {
            acc += op.kernel[k] * y.values[wrap(static_cast<std::int64_t>(i) + (static_cast<std::int64_t>(k) - c), n)];
        }
        x.values[i] = acc;
    }
    return x;
}

double operator_norm_sq(const ConvOp& op, std::size_t n, int iterations) {
    op.validate();
    DyadicSignal x = DyadicSignal::zeros(1, dyadic_depth(n));
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    for (double& v : x.values) v = normal(rng);
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const double nx = norm2(x.values);
        for (double& v : x.values) v /= nx;
        DyadicSignal y = adjoint(convolve(x, op), op);
        estimate = 0.0;
        for (std::size_t i = 0; i < n; ++i) estimate += x.values[i] * y.values[i];
        x = std::move(y);
        if (norm2(x.values) == 0.0) break;
    }
    return estimate;
}

void PnPConfig::validate() const {
    if (tau && (!(*tau > 0.0) || !std::isfinite(*tau))) throw ParameterError("step size must be positive");
    if (iterations < 1) throw ParameterError("iteration count must be positive");
    if (!(tolerance >= 0.0)) throw ParameterError("tolerance must be nonnegative");
    denoiser.validate();
}

PnPResult pnp_deconvolve(const DyadicSignal& measurement, const ConvOp& op, const PnPConfig& config,
                         const PnPObserver& observer) {
    measurement.validate();
    check_1d(measurement);
    op.validate();
    config.validate();
    const double lip = operator_norm_sq(op, measurement.values.size());
    PnPResult result;
    result.tau = config.tau.value_or(1.0 / lip);
    if (!(result.tau * lip < 2.0)) {
        throw ParameterError("step size violates tau * ||A||^2 < 2 (tau=" + std::to_string(result.tau) +
                             ", ||A||^2=" + std::to_string(lip) + ")");
    }
    const double limit = 1e3 * norm2(measurement.values);
    DyadicSignal f = DyadicSignal::zeros(1, measurement.depth);
    for (int t = 1; t <= config.iterations; ++t) {
        DyadicSignal residual = convolve(f, op);
        for (std::size_t i = 0; i < residual.values.size(); ++i) residual.values[i] -= measurement.values[i];
        const DyadicSignal grad = adjoint(residual, op);
        DyadicSignal step = f;
        for (std::size_t i = 0; i < step.values.size(); ++i) step.values[i] -= result.tau * grad.values[i];
        DyadicSignal next = denoise(step, config.denoiser).signal;

        const double size = norm2(next.values);
        if (size > limit) {
            throw DivergenceError("iterate norm " + std::to_string(size) + " exceeds 1e3 times the data norm");
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < next.values.size(); ++i) {
            diff += (next.values[i] - f.values[i]) * (next.values[i] - f.values[i]);
        }
        diff = std::sqrt(diff);
        const double base = norm2(f.values);
        const double change = base > 0.0 ? diff / base : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        result.relative_change.push_back(change);
        f = std::move(next);
        result.iterations = t;
        if (observer) observer(t, f);
        if (change < config.tolerance) break;
    }
    result.signal = std::move(f);
    return result;
}

Pyramid threshold_pyramid(const Pyramid& pyramid, ThresholdMode mode, double t) {
    if (!(t >= 0.0)) throw ParameterError("threshold must be nonnegative");
    Pyramid out = pyramid;
    for (auto& level : out.details) {
        for (auto& band : level) {
            for (double& v : band) {
                if (mode == ThresholdMode::Soft) {
                    v = soft_threshold(v, t);
                } else if (!(std::abs(v) > t)) {
                    v = 0.0;
                }
            }
        }
    }
    return out;
}

DyadicSignal threshold_reconstruct(const Pyramid& pyramid, ThresholdMode mode, double t) {
    return inverse_dwt(threshold_pyramid(pyramid, mode, t));
}

ThresholdSweep threshold_sweep(const Pyramid& pyramid, ThresholdMode mode, std::span<const double> thresholds,
                               const DyadicSignal& reference, double scale) {
    if (thresholds.empty()) throw ParameterError("threshold sweep needs at least one threshold");
    ThresholdSweep sweep;
    bool first = true;
    for (double t : thresholds) {
        DyadicSignal rec = scaled(threshold_reconstruct(pyramid, mode, t), 1.0 / scale);
        const double score = reference.dim == 2 ? ssim(rec, reference) : -rel_error(rec, reference);
        sweep.thresholds.push_back(t);
        sweep.scores.push_back(score);
        if (first || score > sweep.best_score) {
            sweep.best_score = score;
            sweep.best_threshold = t;
            sweep.signal = std::move(rec);
            first = false;
        }
    }
    return sweep;
}

std::vector<double> beta_grid(int n, int refine) {
    if (n < 1) throw ParameterError("beta grid needs at least one point");
    if (refine < 0) throw ParameterError("refinement count must be nonnegative");
    std::vector<double> grid;
    const double lo = std::log10(1e-6);
    const double hi = std::log10(0.49);
    if (n == 1) {
        grid.push_back(0.49);
    } else {
        for (int i = 0; i < n; ++i) grid.push_back(i + 1 == n ? 0.49 : std::pow(10.0, lo + (hi - lo) * i / (n - 1)));
    }
    for (int i = 0; i < refine; ++i) grid.push_back(0.5 - std::pow(10.0, -(3 + i)));
    return grid;
}

BetaSweep sweep_beta(const DyadicSignal& noisy, const DyadicSignal& reference, const DenoiseConfig& base,
                     std::span<const double> grid, SweepMetric metric) {
    if (grid.empty()) throw ParameterError("beta sweep needs at least one grid point");
    if (metric == SweepMetric::Auto) metric = reference.dim == 2 ? SweepMetric::Ssim : SweepMetric::RelError;
    BetaSweep sweep;
    bool first = true;
    for (double b : grid) {
        DenoiseConfig config = base;
        config.mode = BetaMode::Fixed;
        config.beta = BetaSchedule::uniform(b);
        DenoiseOutput out = denoise(noisy, config);
        const double score =
            metric == SweepMetric::Ssim ? ssim(out.signal, reference) : -rel_error(out.signal, reference);
        sweep.betas.push_back(b);
        sweep.scores.push_back(score);
        if (first || score > sweep.best_score || (score == sweep.best_score && b > sweep.best_beta)) {
            sweep.best_score = score;
            sweep.best_beta = b;
            sweep.best = std::move(out);
            first = false;
        }
    }
    return sweep;
}

std::vector<BenchmarkRow> run_benchmark(const DyadicSignal& clean, const DyadicSignal& noisy,
                                        const BenchmarkConfig& config) {
    if (clean.dim != noisy.dim || clean.values.size() != noisy.values.size()) {
        throw DimensionError("clean and noisy inputs differ in shape");
    }
    const std::vector<double> grid = config.beta_grid.empty() ? beta_grid(25, 4) : config.beta_grid;
    std::vector<double> factors = config.threshold_factors;
    if (factors.empty()) {
        for (int i = 0; i <= 60; ++i) factors.push_back(0.1 * i);
    }

    std::vector<BenchmarkRow> rows;
    auto add = [&](std::string method, const DyadicSignal& est) {
        BenchmarkRow row;
        row.method = std::move(method);
        row.metrics = evaluate(est, clean);
        row.metrics.label = row.method;
        rows.push_back(std::move(row));
        return &rows.back();
    };

    add("noisy", noisy);

    const BaseDensity laplace = BaseDensity::laplace(config.kappa_laplace);
    for (const BaseDensity& density : {BaseDensity::gaussian(), laplace}) {
        const std::string name = density.kind == BaseKind::Gaussian ? "gaussian" : "laplace";
        DenoiseConfig base;
        base.wavelet = config.wavelet;
        base.density = density;
        base.scale = config.scale;

        BetaSweep sweep = sweep_beta(noisy, clean, base, grid);
        add("tree-fixed-" + name, sweep.best.signal)->beta = sweep.best_beta;

        DenoiseConfig automatic = base;
        automatic.mode = BetaMode::Automatic;
        automatic.hyper = Hyperprior{density.kind == BaseKind::Gaussian ? config.a_gaussian : config.a_laplace};
        DenoiseOutput out = denoise(noisy, automatic);
        add("tree-auto-" + name, out.signal)->metrics.beta_hat = out.prune.beta_hat;
    }

    const Pyramid pyramid = forward_dwt(scaled(noisy, config.scale), WaveletBasis::make(config.wavelet));
    const double sigma = estimate_noise_sigma(pyramid);
    std::vector<double> thresholds;
    for (double f : factors) thresholds.push_back(f * sigma);
    for (ThresholdMode mode : {ThresholdMode::Soft, ThresholdMode::Hard}) {
        ThresholdSweep sweep = threshold_sweep(pyramid, mode, thresholds, clean, config.scale);
        add(mode == ThresholdMode::Soft ? "soft-threshold" : "hard-threshold", sweep.signal)->threshold =
            sweep.best_threshold / config.scale;
    }
    return rows;
}

DyadicSignal blocks_signal(int depth) {
    static constexpr double pos[] = {0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81};
    static constexpr double hgt[] = {4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2};
    DyadicSignal out = DyadicSignal::zeros(1, depth);
    const auto n = static_cast<double>(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = (static_cast<double>(i) + 1.0) / n;
        double v = 0.0;
        for (std::size_t b = 0; b < std::size(pos); ++b) {
            const double d = t - pos[b];
            const double sgn = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
            v += hgt[b] * (1.0 + sgn) / 2.0;
        }
        out.values[i] = v;
    }
    return out;
}

DyadicSignal synthetic_image(int depth) {
    DyadicSignal img = DyadicSignal::zeros(2, depth);
    const std::size_t side = img.side();
    const double pi = std::numbers::pi;
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const double u = (static_cast<double>(c) + 0.5) / static_cast<double>(side);
            const double v = (static_cast<double>(r) + 0.5) / static_cast<double>(side);
            double value = 0.35 + 0.2 * u - 0.1 * v + 0.05 * std::sin(2.0 * pi * v);

            const double dd = ((u - 0.3) * (u - 0.3) + (v - 0.35) * (v - 0.35)) / (0.18 * 0.18);
            if (dd < 1.0) value = 0.85 - 0.2 * dd;

            if (u > 0.55 && u < 0.9 && v > 0.15 && v < 0.45) value = 0.12 + 0.1 * u;

            // triangle (0.55, 0.6), (0.92, 0.92), (0.5, 0.95) in (u, v)
            auto edge = [&](double ax, double ay, double bx, double by) {
                return (bx - ax) * (v - ay) - (by - ay) * (u - ax);
            };
            const double e1 = edge(0.55, 0.6, 0.92, 0.92);
            const double e2 = edge(0.92, 0.92, 0.5, 0.95);
            const double e3 = edge(0.5, 0.95, 0.55, 0.6);
            if ((e1 > 0 && e2 > 0 && e3 > 0) || (e1 < 0 && e2 < 0 && e3 < 0)) value = 0.62 + 0.15 * v;

            const double rr = std::hypot(u - 0.25, v - 0.75);
            if (rr > 0.08 && rr < 0.14) value = 0.08;

            img.values[r * side + c] = std::clamp(value, 0.0, 1.0);
        }
    }
    return img;
}

double signal_sd(const DyadicSignal& signal) {
    const auto n = static_cast<double>(signal.values.size());
    double mean = 0.0;
    for (double v : signal.values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : signal.values) var += (v - mean) * (v - mean);
    return std::sqrt(var / n);
}

double noise_sigma_for_snr(const DyadicSignal& signal, double snr) {
    if (!(snr > 0.0)) throw ParameterError("SNR must be positive");
    return signal_sd(signal) / snr;
}

double noise_sigma_for_pct(const DyadicSignal& signal, double pct) {
    if (!(pct > 0.0)) throw ParameterError("noise percentage must be positive");
    double peak = 0.0;
    for (double v : signal.values) peak = std::max(peak, std::abs(v));
    return pct / 100.0 * peak;
}

DyadicSignal add_gaussian_noise(const DyadicSignal& signal, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ParameterError("noise sd must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DyadicSignal out = signal;
    for (double& v : out.values) v += sigma * normal(rng);
    return out;
}

}  // namespace besovtree

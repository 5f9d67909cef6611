#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "besovtree/grid_wavelet.hpp"

namespace besovtree {

/// ||est - ref||_2 / ||ref||_2. Throws ParameterError for a zero reference.
double rel_error(std::span<const double> est, std::span<const double> ref);
double rel_error(const DyadicSignal& est, const DyadicSignal& ref);

/// 10 log10(||ref||^2 / ||est - ref||^2) = -20 log10(rel_error); +inf when est == ref.
double snr_db(std::span<const double> est, std::span<const double> ref);
double snr_db(const DyadicSignal& est, const DyadicSignal& ref);

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// Mean SSIM over every fully contained Gaussian window (valid mode).
double ssim(std::span<const double> est, std::span<const double> ref, std::size_t rows, std::size_t cols,
            const SsimParams& params = {});
/// 2D signals only.
double ssim(const DyadicSignal& est, const DyadicSignal& ref, const SsimParams& params = {});

struct MetricsReport {
    double snr_db = 0.0;
    std::optional<double> ssim;  // 2D only
    double rel_error = 0.0;
    std::optional<std::vector<double>> beta_hat;
    double runtime_ms = 0.0;
    std::string label;
};

/// rel_error, snr_db and (for 2D) ssim of an estimate against its reference.
MetricsReport evaluate(const DyadicSignal& est, const DyadicSignal& ref);

}  // namespace besovtree

#include "besovtree/quality.hpp"

#include <cmath>
#include <limits>

#include "besovtree/errors.hpp"

namespace besovtree {

namespace {

void check_shapes(const DyadicSignal& est, const DyadicSignal& ref) {
    if (est.dim != ref.dim || est.values.size() != ref.values.size()) {
        throw DimensionError("estimate and reference differ in shape");
    }
}

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> w(static_cast<std::size_t>(size));
    const double c = (size - 1) / 2.0;
    double total = 0.0;
    for (int i = 0; i < size; ++i) {
        w[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
        total += w[i];
    }
    for (double& v : w) v /= total;
    return w;
}

// Separable valid-mode filtering of a rows x cols image.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t rows, std::size_t cols,
                                 const std::vector<double>& w) {
    const std::size_t n = w.size();
    const std::size_t out_cols = cols - n + 1;
    const std::size_t out_rows = rows - n + 1;
    std::vector<double> tmp(rows * out_cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < out_cols; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += w[i] * img[r * cols + c + i];
            tmp[r * out_cols + c] = acc;
        }
    }
    std::vector<double> out(out_rows * out_cols, 0.0);
    for (std::size_t r = 0; r < out_rows; ++r) {
        for (std::size_t c = 0; c < out_cols; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += w[i] * tmp[(r + i) * out_cols + c];
            out[r * out_cols + c] = acc;
        }
    }
    return out;
}

}  // namespace

double rel_error(std::span<const double> est, std::span<const double> ref) {
    if (est.size() != ref.size()) throw DimensionError("estimate and reference differ in length");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += (est[i] - ref[i]) * (est[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    if (!(den > 0.0)) throw ParameterError("relative error is undefined for a zero reference");
    return std::sqrt(num / den);
}

double rel_error(const DyadicSignal& est, const DyadicSignal& ref) {
    check_shapes(est, ref);
    return rel_error(std::span<const double>(est.values), std::span<const double>(ref.values));
}

double snr_db(std::span<const double> est, std::span<const double> ref) {
    const double e = rel_error(est, ref);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return -20.0 * std::log10(e);
}

double snr_db(const DyadicSignal& est, const DyadicSignal& ref) {
    check_shapes(est, ref);
    return snr_db(std::span<const double>(est.values), std::span<const double>(ref.values));
}

double ssim(std::span<const double> est, std::span<const double> ref, std::size_t rows, std::size_t cols,
            const SsimParams& params) {
    if (est.size() != rows * cols || ref.size() != rows * cols) throw DimensionError("ssim: shape mismatch");
    if (params.window < 1 || params.window % 2 == 0) throw ParameterError("ssim window must be odd");
    const auto win = static_cast<std::size_t>(params.window);
    if (rows < win || cols < win) throw DimensionError("ssim: image smaller than the window");
    const auto w = gaussian_window(params.window, params.sigma);
    const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
    const double c2 = std::pow(params.k2 * params.dynamic_range, 2);

    const std::vector<double> x(est.begin(), est.end());
    const std::vector<double> y(ref.begin(), ref.end());
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, rows, cols, w);
    const auto my = filter_valid(y, rows, cols, w);
    const auto sxx = filter_valid(xx, rows, cols, w);
    const auto syy = filter_valid(yy, rows, cols, w);
    const auto sxy = filter_valid(xy, rows, cols, w);

    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cov = sxy[i] - mx[i] * my[i];
        total += (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2) /
                 ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    return total / static_cast<double>(mx.size());
}

double ssim(const DyadicSignal& est, const DyadicSignal& ref, const SsimParams& params) {
    check_shapes(est, ref);
    if (est.dim != 2) throw DimensionError("ssim needs 2D signals");
    return ssim(est.values, ref.values, est.side(), est.side(), params);
}

MetricsReport evaluate(const DyadicSignal& est, const DyadicSignal& ref) {
    MetricsReport report;
    report.rel_error = rel_error(est, ref);
    report.snr_db = report.rel_error == 0.0 ? std::numeric_limits<double>::infinity()
                                            : -20.0 * std::log10(report.rel_error);
    if (est.dim == 2) report.ssim = ssim(est, ref);
    return report;
}

}  // namespace besovtree

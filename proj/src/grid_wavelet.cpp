#include "besovtree/grid_wavelet.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "besovtree/errors.hpp"

namespace besovtree {

namespace {

// One periodic analysis step: in has even length n, approx/detail have n/2 entries.
void analysis_step(std::span<const double> in, std::span<double> approx, std::span<double> detail,
                   const WaveletBasis& basis) {
    const std::size_t n = in.size();
    const std::size_t taps = basis.lowpass.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        double a = 0.0;
        double d = 0.0;
        for (std::size_t k = 0; k < taps; ++k) {
            const double x = in[(2 * i + k) % n];
            a += basis.lowpass[k] * x;
            d += basis.highpass[k] * x;
        }
        approx[i] = a;
        detail[i] = d;
    }
}

// Adjoint of analysis_step; out has length 2 * approx.size().
void synthesis_step(std::span<const double> approx, std::span<const double> detail,
                    std::span<double> out, const WaveletBasis& basis) {
    const std::size_t n = out.size();
    const std::size_t taps = basis.lowpass.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n / 2; ++i) {
        for (std::size_t k = 0; k < taps; ++k) {
            out[(2 * i + k) % n] += basis.lowpass[k] * approx[i] + basis.highpass[k] * detail[i];
        }
    }
}

void analyse_line(std::span<double> line, std::vector<double>& scratch, const WaveletBasis& basis) {
    const std::size_t half = line.size() / 2;
    scratch.assign(line.begin(), line.end());
    std::vector<double> a(half), d(half);
    analysis_step(scratch, a, d, basis);
    std::copy(a.begin(), a.end(), line.begin());
    std::copy(d.begin(), d.end(), line.begin() + static_cast<std::ptrdiff_t>(half));
}

void synthesise_line(std::span<double> line, std::vector<double>& scratch, const WaveletBasis& basis) {
    const std::size_t half = line.size() / 2;
    std::vector<double> a(line.begin(), line.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<double> d(line.begin() + static_cast<std::ptrdiff_t>(half), line.end());
    scratch.resize(line.size());
    synthesis_step(a, d, scratch, basis);
    std::copy(scratch.begin(), scratch.end(), line.begin());
}

Pyramid forward_1d(const DyadicSignal& signal, const WaveletBasis& basis) {
    Pyramid out = Pyramid::zeros(1, signal.depth, basis.family);
    std::vector<double> buffer = signal.values;
    for (int j = signal.depth; j >= 0; --j) {
        const std::size_t len = std::size_t{2} << j;
        std::vector<double> approx(len / 2);
        analysis_step(std::span<const double>(buffer.data(), len), approx, out.details[j][0], basis);
        std::copy(approx.begin(), approx.end(), buffer.begin());
    }
    out.scaling[0] = buffer[0];
    return out;
}

DyadicSignal inverse_1d(const Pyramid& pyramid, const WaveletBasis& basis) {
    DyadicSignal out = DyadicSignal::zeros(1, pyramid.depth);
    std::vector<double> approx = pyramid.scaling;
    for (int j = 0; j <= pyramid.depth; ++j) {
        std::vector<double> next(std::size_t{2} << j);
        synthesis_step(approx, pyramid.details[j][0], next, basis);
        approx = std::move(next);
    }
    out.values = std::move(approx);
    return out;
}

Pyramid forward_2d(const DyadicSignal& signal, const WaveletBasis& basis) {
    Pyramid out = Pyramid::zeros(2, signal.depth, basis.family);
    const std::size_t side = signal.side();
    std::vector<double> buffer = signal.values;
    std::vector<double> scratch;
    std::vector<double> column;
    for (int j = signal.depth; j >= 0; --j) {
        const std::size_t len = std::size_t{2} << j;
        const std::size_t half = len / 2;
        for (std::size_t r = 0; r < len; ++r) {
            analyse_line(std::span<double>(buffer.data() + r * side, len), scratch, basis);
        }
        column.resize(len);
        for (std::size_t c = 0; c < len; ++c) {
            for (std::size_t r = 0; r < len; ++r) column[r] = buffer[r * side + c];
            analyse_line(column, scratch, basis);
            for (std::size_t r = 0; r < len; ++r) buffer[r * side + c] = column[r];
        }
        auto& bands = out.details[j];
        for (std::size_t r = 0; r < half; ++r) {
            for (std::size_t c = 0; c < half; ++c) {
                bands[0][r * half + c] = buffer[(r + half) * side + c];
                bands[1][r * half + c] = buffer[r * side + c + half];
                bands[2][r * half + c] = buffer[(r + half) * side + c + half];
            }
        }
    }
    out.scaling[0] = buffer[0];
    return out;
}

DyadicSignal inverse_2d(const Pyramid& pyramid, const WaveletBasis& basis) {
    DyadicSignal out = DyadicSignal::zeros(2, pyramid.depth);
    const std::size_t side = out.side();
    std::vector<double>& buffer = out.values;
    std::vector<double> scratch;
    std::vector<double> column;
    buffer[0] = pyramid.scaling[0];
    for (int j = 0; j <= pyramid.depth; ++j) {
        const std::size_t len = std::size_t{2} << j;
        const std::size_t half = len / 2;
        const auto& bands = pyramid.details[j];
        for (std::size_t r = 0; r < half; ++r) {
            for (std::size_t c = 0; c < half; ++c) {
                buffer[(r + half) * side + c] = bands[0][r * half + c];
                buffer[r * side + c + half] = bands[1][r * half + c];
                buffer[(r + half) * side + c + half] = bands[2][r * half + c];
            }
        }
        column.resize(len);
        for (std::size_t c = 0; c < len; ++c) {
            for (std::size_t r = 0; r < len; ++r) column[r] = buffer[r * side + c];
            synthesise_line(column, scratch, basis);
            for (std::size_t r = 0; r < len; ++r) buffer[r * side + c] = column[r];
        }
        for (std::size_t r = 0; r < len; ++r) {
            synthesise_line(std::span<double>(buffer.data() + r * side, len), scratch, basis);
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(WaveletFamily family) {
    switch (family) {
        case WaveletFamily::Haar: return "haar";
        case WaveletFamily::Daubechies2: return "db2";
    }
    return "unknown";
}

WaveletFamily parse_wavelet_family(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "haar" || lower == "db1") return WaveletFamily::Haar;
    if (lower == "db2" || lower == "daubechies2") return WaveletFamily::Daubechies2;
    throw ParameterError("unknown wavelet family: " + std::string(name));
}

WaveletBasis WaveletBasis::make(WaveletFamily family) {
    WaveletBasis basis;
    basis.family = family;
    switch (family) {
        case WaveletFamily::Haar: {
            const double h = 1.0 / std::sqrt(2.0);
            basis.lowpass = {h, h};
            basis.regularity = 1;
            break;
        }
        case WaveletFamily::Daubechies2: {
            const double s3 = std::sqrt(3.0);
            const double norm = 4.0 * std::sqrt(2.0);
            basis.lowpass = {(1 + s3) / norm, (3 + s3) / norm, (3 - s3) / norm, (1 - s3) / norm};
            basis.regularity = 2;
            break;
        }
    }
    // Quadrature mirror: g[k] = (-1)^k h[L-1-k].
    const std::size_t taps = basis.lowpass.size();
    basis.highpass.resize(taps);
    for (std::size_t k = 0; k < taps; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        basis.highpass[k] = sign * basis.lowpass[taps - 1 - k];
    }
    return basis;
}

int dyadic_depth(std::size_t n) {
    if (n < 2 || (n & (n - 1)) != 0) {
        throw DimensionError("length " + std::to_string(n) + " is not a power of two >= 2");
    }
    int depth = -1;
    while (n > 1) {
        n >>= 1;
        ++depth;
    }
    return depth;
}

DyadicSignal DyadicSignal::from_1d(std::vector<double> values) {
    DyadicSignal s;
    s.dim = 1;
    s.depth = dyadic_depth(values.size());
    s.values = std::move(values);
    s.validate();
    return s;
}

DyadicSignal DyadicSignal::from_2d(std::size_t side, std::vector<double> values) {
    if (values.size() != side * side) {
        throw DimensionError("2D signal expects side*side values");
    }
    DyadicSignal s;
    s.dim = 2;
    s.depth = dyadic_depth(side);
    s.values = std::move(values);
    s.validate();
    return s;
}

DyadicSignal DyadicSignal::zeros(int dim, int depth) {
    if ((dim != 1 && dim != 2) || depth < 0) throw DimensionError("invalid signal shape");
    DyadicSignal s;
    s.dim = dim;
    s.depth = depth;
    s.values.assign(s.size(), 0.0);
    return s;
}

void DyadicSignal::validate() const {
    if ((dim != 1 && dim != 2) || depth < 0 || depth > 30) throw DimensionError("invalid signal shape");
    if (values.size() != size()) {
        throw DimensionError("signal holds " + std::to_string(values.size()) + " values, expected " +
                             std::to_string(size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ParameterError("signal contains non-finite values");
    }
}

Pyramid Pyramid::zeros(int dim, int depth, WaveletFamily family) {
    if ((dim != 1 && dim != 2) || depth < 0) throw DimensionError("invalid pyramid shape");
    Pyramid p;
    p.dim = dim;
    p.depth = depth;
    p.family = family;
    p.scaling.assign(1, 0.0);
    p.details.resize(static_cast<std::size_t>(depth) + 1);
    for (int j = 0; j <= depth; ++j) {
        p.details[j].assign(static_cast<std::size_t>(p.bands()), std::vector<double>(p.level_size(j), 0.0));
    }
    return p;
}

std::size_t Pyramid::coefficient_count() const {
    std::size_t n = scaling.size();
    for (const auto& level : details) {
        for (const auto& band : level) n += band.size();
    }
    return n;
}

void Pyramid::validate() const {
    if ((dim != 1 && dim != 2) || depth < 0) throw DimensionError("invalid pyramid shape");
    if (scaling.size() != 1) throw DimensionError("pyramid must carry exactly one scaling coefficient");
    if (details.size() != static_cast<std::size_t>(depth) + 1) {
        throw DimensionError("pyramid level count does not match its depth");
    }
    for (int j = 0; j <= depth; ++j) {
        if (details[j].size() != static_cast<std::size_t>(bands())) {
            throw DimensionError("pyramid level " + std::to_string(j) + " has the wrong band count");
        }
        for (const auto& band : details[j]) {
            if (band.size() != level_size(j)) {
                throw DimensionError("pyramid level " + std::to_string(j) + " has the wrong size");
            }
        }
    }
}

Pyramid forward_dwt(const DyadicSignal& signal, const WaveletBasis& basis) {
    signal.validate();
    return signal.dim == 1 ? forward_1d(signal, basis) : forward_2d(signal, basis);
}

DyadicSignal inverse_dwt(const Pyramid& pyramid) {
    pyramid.validate();
    const WaveletBasis basis = WaveletBasis::make(pyramid.family);
    return pyramid.dim == 1 ? inverse_1d(pyramid, basis) : inverse_2d(pyramid, basis);
}

double pyramid_energy(const Pyramid& pyramid) {
    double total = 0.0;
    for (double v : pyramid.scaling) total += v * v;
    for (const auto& level : pyramid.details) {
        for (const auto& band : level) {
            for (double v : band) total += v * v;
        }
    }
    return total;
}

Pyramid axpby(double a, const Pyramid& x, double b, const Pyramid& y) {
    if (x.dim != y.dim || x.depth != y.depth) throw DimensionError("pyramid shapes differ");
    Pyramid out = x;
    for (std::size_t i = 0; i < out.scaling.size(); ++i) out.scaling[i] = a * x.scaling[i] + b * y.scaling[i];
    for (std::size_t j = 0; j < out.details.size(); ++j) {
        for (std::size_t l = 0; l < out.details[j].size(); ++l) {
            auto& band = out.details[j][l];
            for (std::size_t k = 0; k < band.size(); ++k) {
                band[k] = a * x.details[j][l][k] + b * y.details[j][l][k];
            }
        }
    }
    return out;
}

}  // namespace besovtree

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace besovtree {

enum class WaveletFamily { Haar, Daubechies2 };

std::string_view to_string(WaveletFamily family);
/// Accepts "haar", "db2" and "daubechies2" (case-insensitive).
WaveletFamily parse_wavelet_family(std::string_view name);

/// Orthonormal compactly supported filter pair with periodic boundary handling.
struct WaveletBasis {
    WaveletFamily family = WaveletFamily::Haar;
    std::vector<double> lowpass;
    std::vector<double> highpass;
    int regularity = 1;  // nominal, only used to validate prior smoothness

    static WaveletBasis make(WaveletFamily family);
};

/// Samples on a regular dyadic grid: 2^(J+1) points in 1D, 2^(J+1) x 2^(J+1) in 2D.
/// 2D values are stored row-major.
struct DyadicSignal {
    int dim = 1;
    int depth = 0;
    std::vector<double> values;

    std::size_t side() const { return std::size_t{1} << (depth + 1); }
    std::size_t size() const { return dim == 1 ? side() : side() * side(); }

    static DyadicSignal from_1d(std::vector<double> values);
    static DyadicSignal from_2d(std::size_t side, std::vector<double> values);
    static DyadicSignal zeros(int dim, int depth);

    /// Throws DimensionError / ParameterError when the invariants do not hold.
    void validate() const;
};

/// Wavelet coefficients of a full-depth decomposition.
///
/// details[j][band] holds the level-j coefficients of one band: 2^j entries in 1D,
/// 2^j x 2^j (row-major) in 2D. Band order in 2D is horizontal, vertical, diagonal.
/// The coarse block `scaling` always has a single entry.
struct Pyramid {
    int dim = 1;
    int depth = 0;
    WaveletFamily family = WaveletFamily::Haar;
    std::vector<double> scaling;
    std::vector<std::vector<std::vector<double>>> details;

    static Pyramid zeros(int dim, int depth, WaveletFamily family = WaveletFamily::Haar);

    int bands() const { return dim == 1 ? 1 : 3; }
    std::size_t level_width(int level) const { return std::size_t{1} << level; }
    std::size_t level_size(int level) const {
        return dim == 1 ? level_width(level) : level_width(level) * level_width(level);
    }
    std::size_t coefficient_count() const;

    double& at(int level, int band, std::size_t k) { return details[level][band][k]; }
    double at(int level, int band, std::size_t k) const { return details[level][band][k]; }

    void validate() const;
};

Pyramid forward_dwt(const DyadicSignal& signal, const WaveletBasis& basis);
DyadicSignal inverse_dwt(const Pyramid& pyramid);

/// Sum of squares over every coefficient, scaling block included.
double pyramid_energy(const Pyramid& pyramid);

/// Linear combination a*x + b*y of two structurally identical pyramids.
Pyramid axpby(double a, const Pyramid& x, double b, const Pyramid& y);

/// Smallest J with 2^(J+1) == n; throws DimensionError otherwise.
int dyadic_depth(std::size_t n);

}  // namespace besovtree

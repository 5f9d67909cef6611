#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "besovtree/grid_wavelet.hpp"

namespace testutil {

// Mixed magnitudes: mostly small noise-like values plus a few large ones, so that
// pruning decisions are neither all-in nor all-out.
inline besovtree::Pyramid random_pyramid(int dim, int depth, std::mt19937_64& rng, double spread = 3.0) {
    auto p = besovtree::Pyramid::zeros(dim, depth);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    p.scaling[0] = n01(rng);
    for (int j = 0; j <= depth; ++j) {
        for (auto& band : p.details[j]) {
            for (double& v : band) v = u(rng) < 0.3 ? spread * 2.0 * n01(rng) : n01(rng);
        }
    }
    return p;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = n01(rng);
    return v;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sum_sq(const std::vector<double>& a) { return dot(a, a); }

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("besovtree-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testutil

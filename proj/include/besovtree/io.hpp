#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "besovtree/dyadic_tree.hpp"
#include "besovtree/grid_wavelet.hpp"
#include "besovtree/map_prune.hpp"
#include "besovtree/quality.hpp"

namespace besovtree::io {

/// One value per line (or a single row) is 1D; a square block of comma-separated rows is 2D.
DyadicSignal read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const DyadicSignal& signal);

/// P2 or P5, maxval up to 65535, mapped to [0, 1]. The image must be square and dyadic.
DyadicSignal read_pgm(const std::filesystem::path& path);
/// Values are clipped to [0, 1] and quantised; P5 unless `ascii`.
void write_pgm(const std::filesystem::path& path, const DyadicSignal& signal, int maxval = 255, bool ascii = false);

/// Dispatch on the extension: .pgm is an image, anything else is CSV.
DyadicSignal read_signal(const std::filesystem::path& path);
void write_signal(const std::filesystem::path& path, const DyadicSignal& signal);

nlohmann::json to_json(const TreeMask& mask);
TreeMask mask_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Pyramid& pyramid);
Pyramid pyramid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PruneResult& result);
nlohmann::json to_json(const MetricsReport& report);

/// Canonical text form: two-space indent and a trailing newline.
std::string dump(const nlohmann::json& j);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace besovtree::io

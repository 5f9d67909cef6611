#include "besovtree/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "besovtree/errors.hpp"

namespace besovtree::io {

using nlohmann::json;

namespace {

std::string lower_ext(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Next header token of a PNM file, skipping whitespace and # comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            if (!tok.empty()) break;
        } else {
            tok.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    if (tok.empty()) throw IoError("truncated PGM header");
    return tok;
}

long parse_long(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw IoError("bad " + what + ": " + s);
        return v;
    } catch (const std::logic_error&) {
        throw IoError("bad " + what + ": " + s);
    }
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

DyadicSignal read_csv(const std::filesystem::path& path) {
    auto in = open_in(path, false);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::logic_error&) {
                throw IoError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path.string() + " contains no data");
    const std::size_t cols = rows.front().size();
    if (rows.size() == 1 || cols == 1) {
        std::vector<double> values;
        for (const auto& r : rows) {
            if (r.size() != cols) throw IoError(path.string() + ": ragged rows");
            values.insert(values.end(), r.begin(), r.end());
        }
        return DyadicSignal::from_1d(std::move(values));
    }
    if (rows.size() != cols) throw DimensionError(path.string() + ": 2D data must be square");
    std::vector<double> values;
    for (const auto& r : rows) {
        if (r.size() != cols) throw IoError(path.string() + ": ragged rows");
        values.insert(values.end(), r.begin(), r.end());
    }
    return DyadicSignal::from_2d(cols, std::move(values));
}

void write_csv(const std::filesystem::path& path, const DyadicSignal& signal) {
    signal.validate();
    auto out = open_out(path, false);
    if (signal.dim == 1) {
        for (double v : signal.values) out << format_value(v) << '\n';
    } else {
        const std::size_t side = signal.side();
        for (std::size_t r = 0; r < side; ++r) {
            for (std::size_t c = 0; c < side; ++c) {
                if (c) out << ',';
                out << format_value(signal.values[r * side + c]);
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("failed writing " + path.string());
}

DyadicSignal read_pgm(const std::filesystem::path& path) {
    auto in = open_in(path, true);
    const std::string magic = pnm_token(in);
    if (magic != "P2" && magic != "P5") throw IoError(path.string() + ": not a PGM file (magic " + magic + ")");
    const long width = parse_long(pnm_token(in), "width");
    const long height = parse_long(pnm_token(in), "height");
    const long maxval = parse_long(pnm_token(in), "maxval");
    if (width <= 0 || height <= 0) throw IoError(path.string() + ": bad image size");
    if (maxval <= 0 || maxval > 65535) throw IoError(path.string() + ": maxval must be in 1..65535");
    if (width != height) throw DimensionError(path.string() + ": image must be square");
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> values(n);
    if (magic == "P2") {
        for (std::size_t i = 0; i < n; ++i) {
            const long v = parse_long(pnm_token(in), "pixel");
            if (v < 0 || v > maxval) throw IoError(path.string() + ": pixel out of range");
            values[i] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    } else {
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(n * bytes);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw IoError(path.string() + ": truncated pixel data");
        for (std::size_t i = 0; i < n; ++i) {
            const long v = bytes == 1 ? raw[i] : (static_cast<long>(raw[2 * i]) << 8) | raw[2 * i + 1];
            if (v > maxval) throw IoError(path.string() + ": pixel out of range");
            values[i] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    }
    return DyadicSignal::from_2d(static_cast<std::size_t>(width), std::move(values));
}

void write_pgm(const std::filesystem::path& path, const DyadicSignal& signal, int maxval, bool ascii) {
    signal.validate();
    if (signal.dim != 2) throw DimensionError("PGM output needs a 2D signal");
    if (maxval <= 0 || maxval > 65535) throw ParameterError("maxval must be in 1..65535");
    const std::size_t side = signal.side();
    auto out = open_out(path, true);
    out << (ascii ? "P2" : "P5") << '\n' << side << ' ' << side << '\n' << maxval << '\n';
    auto quantise = [&](double v) {
        return static_cast<long>(std::lround(std::clamp(v, 0.0, 1.0) * static_cast<double>(maxval)));
    };
    if (ascii) {
        for (std::size_t r = 0; r < side; ++r) {
            for (std::size_t c = 0; c < side; ++c) out << (c ? " " : "") << quantise(signal.values[r * side + c]);
            out << '\n';
        }
    } else {
        std::vector<unsigned char> raw;
        raw.reserve(signal.values.size() * 2);
        for (double v : signal.values) {
            const long q = quantise(v);
            if (maxval > 255) raw.push_back(static_cast<unsigned char>(q >> 8));
            raw.push_back(static_cast<unsigned char>(q & 0xff));
        }
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    }
    if (!out) throw IoError("failed writing " + path.string());
}

DyadicSignal read_signal(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    return lower_ext(path) == ".pgm" ? read_pgm(path) : read_csv(path);
}

void write_signal(const std::filesystem::path& path, const DyadicSignal& signal) {
    if (lower_ext(path) == ".pgm") {
        write_pgm(path, signal);
    } else {
        write_csv(path, signal);
    }
}

json to_json(const TreeMask& mask) {
    json levels = json::array();
    for (const auto& level : mask.levels()) {
        json row = json::array();
        for (auto bit : level) row.push_back(static_cast<int>(bit));
        levels.push_back(std::move(row));
    }
    return json{{"J", mask.depth()}, {"dim", mask.dim()}, {"levels", std::move(levels)}};
}

TreeMask mask_from_json(const json& j) {
    try {
        const int depth = j.at("J").get<int>();
        const int dim = j.at("dim").get<int>();
        if (dim != 1 && dim != 2) throw ParameterError("mask dim must be 1 or 2");
        if (depth < 0) throw ParameterError("mask depth must be nonnegative");
        TreeMask mask(dim, depth, false);
        const auto& levels = j.at("levels");
        if (levels.size() != static_cast<std::size_t>(depth) + 1) throw DimensionError("mask has the wrong number of levels");
        for (int l = 0; l <= depth; ++l) {
            const auto& row = levels.at(static_cast<std::size_t>(l));
            if (row.size() != mask.level_size(l)) throw DimensionError("mask level " + std::to_string(l) + " has the wrong size");
            for (std::size_t k = 0; k < row.size(); ++k) mask.set(l, k, row[k].get<int>() != 0);
        }
        return mask;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed mask JSON: ") + e.what());
    }
}

json to_json(const Pyramid& pyramid) {
    return json{{"J", pyramid.depth},
                {"dim", pyramid.dim},
                {"wavelet", std::string(to_string(pyramid.family))},
                {"scaling", pyramid.scaling},
                {"details", pyramid.details}};
}

Pyramid pyramid_from_json(const json& j) {
    try {
        Pyramid p = Pyramid::zeros(j.at("dim").get<int>(), j.at("J").get<int>(),
                                   parse_wavelet_family(j.at("wavelet").get<std::string>()));
        p.scaling = j.at("scaling").get<std::vector<double>>();
        p.details = j.at("details").get<std::vector<std::vector<std::vector<double>>>>();
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed pyramid JSON: ") + e.what());
    }
}

json to_json(const PruneResult& result) {
    json out;
    out["mask"] = to_json(result.mask);
    out["raw_mask"] = to_json(result.raw_mask);
    out["kept_nodes"] = result.mask.count();
    out["total_cost"] = finite_or_null(result.total_cost);
    json lam = json::array();
    for (double v : result.level_log_odds) lam.push_back(finite_or_null(v));
    out["level_log_odds"] = std::move(lam);
    out["beta_hat"] = result.beta_hat ? json(*result.beta_hat) : json(nullptr);
    json diags = json::array();
    for (const auto& d : result.diagnostics) {
        diags.push_back({{"level", d.level},
                         {"grid_size", d.grid_size},
                         {"chosen_index", d.chosen_index},
                         {"beta", d.beta},
                         {"log_odds", finite_or_null(d.log_odds)},
                         {"included", d.included}});
    }
    out["diagnostics"] = std::move(diags);
    return out;
}

json to_json(const MetricsReport& report) {
    json out{{"snr_db", finite_or_null(report.snr_db)},
             {"ssim", report.ssim ? json(*report.ssim) : json(nullptr)},
             {"rel_error", report.rel_error},
             {"beta_hat", report.beta_hat ? json(*report.beta_hat) : json(nullptr)},
             {"runtime_ms", report.runtime_ms}};
    if (!report.label.empty()) out["label"] = report.label;
    return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const json& j) {
    auto out = open_out(path, false);
    out << dump(j);
    if (!out) throw IoError("failed writing " + path.string());
}

json read_json(const std::filesystem::path& path) {
    auto in = open_in(path, false);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace besovtree::io

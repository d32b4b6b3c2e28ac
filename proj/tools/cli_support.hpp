#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "photocal/calibration.hpp"
#include "photocal/serialization.hpp"

namespace photocal::cli {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline Vec3 parse_vec3(const std::string& text, const std::string& what) {
    const auto parts = split(text, ',');
    require(parts.size() == 3, ErrorKind::BadInput, what + ": expected three comma-separated numbers");
    Vec3 v;
    for (int c = 0; c < 3; ++c) {
        const auto d = parse_double(parts[c]);
        require(d.has_value(), ErrorKind::BadInput, what + ": '" + parts[c] + "' is not a number");
        v[c] = *d;
    }
    return v;
}

// "lo:hi"
inline std::pair<double, double> parse_range(const std::string& text, const std::string& what) {
    const auto parts = split(text, ':');
    require(parts.size() == 2, ErrorKind::BadInput, what + ": expected lo:hi");
    const auto lo = parse_double(parts[0]), hi = parse_double(parts[1]);
    require(lo && hi, ErrorKind::BadInput, what + ": expected two numbers");
    return {*lo, *hi};
}

// Names ("equirect", "hemisphere", "orthographic", "perspective:<fov>"),
// inline JSON, or a path to a JSON file.
inline Projection parse_projection(const std::string& text) {
    if (!text.empty() && text.front() == '{') {
        try {
            return projection_from_json(json::parse(text));
        } catch (const json::exception& e) {
            fail(ErrorKind::BadInput, std::string("projection JSON: ") + e.what());
        }
    }
    if (text == "equirect") return EquirectFull{};
    if (text == "hemisphere") return EquirectHemisphere{};
    if (text == "orthographic") return Orthographic{};
    if (text.rfind("perspective", 0) == 0) {
        const auto colon = text.find(':');
        double fov = 90.0;
        if (colon != std::string::npos) {
            const auto v = parse_double(text.substr(colon + 1));
            require(v.has_value(), ErrorKind::BadInput, "perspective fov must be a number");
            fov = *v;
        }
        return Perspective{fov};
    }
    if (text.size() > 5 && text.substr(text.size() - 5) == ".json") {
        std::ifstream in(text);
        require(static_cast<bool>(in), ErrorKind::BadInput, "cannot open projection file '" + text + "'");
        try {
            return projection_from_json(json::parse(in));
        } catch (const json::exception& e) {
            fail(ErrorKind::BadInput, std::string("projection JSON: ") + e.what());
        }
    }
    fail(ErrorKind::BadInput, "unknown projection '" + text + "'");
}

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    require(ctx != nullptr, ErrorKind::Internal, "sha256: out of memory");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 && EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    require(ok, ErrorKind::Internal, "sha256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

// config_id, Er, Eg, Eb, Ev_lux, x, y. A first row whose numeric columns do
// not parse is taken as a header. Row numbers in errors are 1-based file lines.
inline std::vector<CalibrationSample> parse_samples_csv(const std::string& text) {
    std::vector<CalibrationSample> out;
    std::istringstream in(text);
    std::string line;
    int row = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        const auto f = split(line, ',');
        std::vector<std::optional<double>> nums;
        for (std::size_t c = 1; c < f.size(); ++c) nums.push_back(parse_double(f[c]));
        const bool numeric = f.size() == 7 && std::all_of(nums.begin(), nums.end(), [](auto& v) { return v.has_value(); });
        if (first && !numeric && f.size() == 7 && !parse_double(f[1])) {
            first = false;
            continue;  // header
        }
        first = false;
        require(f.size() == 7, ErrorKind::BadInput,
                "samples row " + std::to_string(row) + ": expected 7 columns, got " + std::to_string(f.size()));
        require(numeric, ErrorKind::BadInput, "samples row " + std::to_string(row) + ": non-numeric field");
        require(!f[0].empty(), ErrorKind::BadInput, "samples row " + std::to_string(row) + ": empty config_id");
        CalibrationSample s;
        s.config_id = f[0];
        s.uncalibrated_illuminance = Rgb(*nums[0], *nums[1], *nums[2]);
        s.reading.illuminance_lux = *nums[3];
        s.reading.chroma = Chromaticity{*nums[4], *nums[5]};
        require(s.uncalibrated_illuminance.minCoeff() >= 0.0 && s.reading.illuminance_lux >= 0.0, ErrorKind::BadInput,
                "samples row " + std::to_string(row) + ": negative illuminance");
        require(s.reading.chroma.valid(), ErrorKind::BadInput,
                "samples row " + std::to_string(row) + ": invalid chromaticity");
        out.push_back(std::move(s));
    }
    return out;
}

// Two numeric columns (pred, gt); optional header.
inline std::pair<std::vector<double>, std::vector<double>> parse_pairs_csv(const std::string& text) {
    std::vector<double> pred, gt;
    std::istringstream in(text);
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        require(f.size() == 2, ErrorKind::BadInput, "scalars row " + std::to_string(row) + ": expected 2 columns");
        const auto p = parse_double(f[0]), g = parse_double(f[1]);
        if (!p || !g) {
            require(pred.empty() && row == 1, ErrorKind::BadInput,
                    "scalars row " + std::to_string(row) + ": non-numeric field");
            continue;
        }
        pred.push_back(*p);
        gt.push_back(*g);
    }
    return {pred, gt};
}

}  // namespace photocal::cli

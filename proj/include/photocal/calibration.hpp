#pragma once

// Absolute photometric calibration: per-configuration, per-channel slopes
// mapping integrated (relative) illuminance onto chroma-meter readings.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "photocal/color.hpp"
#include "photocal/error.hpp"
#include "photocal/image.hpp"

namespace photocal {

struct ChromaReading {
    double illuminance_lux = 0.0;  // Ev
    Chromaticity chroma;
};

struct CalibrationSample {
    std::string config_id;
    Rgb uncalibrated_illuminance = Rgb::Zero();  // relative units, per channel
    ChromaReading reading;
};

struct ChannelFit {
    Rgb k = Rgb::Ones();   // lux per relative unit
    Rgb r2 = Rgb::Ones();  // coefficient of determination per channel
    std::size_t samples = 0;
};

struct CalibrationProfile {
    static constexpr int kVersion = 1;
    int version = kVersion;
    std::map<std::string, ChannelFit> configs;
    std::string timestamp;  // optional, ISO-8601

    const ChannelFit& at(const std::string& config_id) const {
        const auto it = configs.find(config_id);
        require(it != configs.end(), ErrorKind::BadInput, "calibration profile has no configuration '" + config_id + "'");
        return it->second;
    }
};

// Per-channel illuminance targets: the reading's xyY converted to linear RGB.
// Returns nullopt when the chromaticity is outside the RGB gamut.
inline std::optional<Rgb> try_channel_targets(const ChromaReading& reading) {
    require(reading.illuminance_lux >= 0.0 && std::isfinite(reading.illuminance_lux), ErrorKind::BadInput,
            "chroma reading: illuminance must be finite and non-negative");
    require(reading.chroma.valid(), ErrorKind::BadInput, "chroma reading: invalid chromaticity");
    const Rgb rgb = xyy_to_rgb(reading.chroma, reading.illuminance_lux);
    if (rgb.minCoeff() < 0.0) return std::nullopt;
    return rgb;
}

inline Rgb reading_to_channel_targets(const ChromaReading& reading) {
    const auto t = try_channel_targets(reading);
    require(t.has_value(), ErrorKind::BadInput, "chroma reading converts to a negative channel (out of gamut)");
    return *t;
}

struct ExcludedSample {
    std::size_t index;
    std::string config_id;
    std::string reason;
};

struct FitReport {
    CalibrationProfile profile;
    std::vector<ExcludedSample> excluded;
};

// Least-squares slope through the origin, y = k x.
struct OriginFit {
    double slope = 0.0;
    double r2 = 0.0;
};

// R^2 = 1 - SS_res / SS_tot with SS_tot about the mean of y, clamped to
// [0, 1]. A perfect fit has R^2 = 1 even when y has no spread.
inline OriginFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), ErrorKind::Internal, "fit: size mismatch");
    require(x.size() >= 2, ErrorKind::InsufficientData, "fit: at least two samples are required");
    double sxx = 0.0, sxy = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        mean_y += y[i];
    }
    require(sxx > 0.0, ErrorKind::InsufficientData, "fit: all uncalibrated illuminances are zero");
    mean_y /= static_cast<double>(y.size());
    const double k = sxy / sxx;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ss_res += (y[i] - k * x[i]) * (y[i] - k * x[i]);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    double r2;
    if (ss_res == 0.0)
        r2 = 1.0;
    else if (ss_tot == 0.0)
        r2 = 0.0;
    else
        r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    return {k, r2};
}

// Fits every configuration independently. Samples whose reading maps to a
// negative channel target are excluded and listed in the report.
inline FitReport fit_profile(const std::vector<CalibrationSample>& samples) {
    FitReport report;
    struct Columns {
        std::vector<double> x[3], y[3];
    };
    std::map<std::string, Columns> by_config;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        require(!s.config_id.empty(), ErrorKind::BadInput, "sample " + std::to_string(i) + ": empty config_id");
        require(s.uncalibrated_illuminance.allFinite() && s.uncalibrated_illuminance.minCoeff() >= 0.0,
                ErrorKind::BadInput, "sample " + std::to_string(i) + ": uncalibrated illuminance must be >= 0");
        auto& cols = by_config[s.config_id];
        const auto targets = try_channel_targets(s.reading);
        if (!targets) {
            report.excluded.push_back({i, s.config_id, "reading converts to a negative channel target"});
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            cols.x[c].push_back(s.uncalibrated_illuminance[c]);
            cols.y[c].push_back((*targets)[c]);
        }
    }
    require(!by_config.empty(), ErrorKind::InsufficientData, "fit: no calibration samples");
    for (const auto& [id, cols] : by_config) {
        require(cols.x[0].size() >= 2, ErrorKind::InsufficientData,
                "fit: configuration '" + id + "' has fewer than two usable samples");
        ChannelFit fit;
        fit.samples = cols.x[0].size();
        for (int c = 0; c < 3; ++c) {
            const OriginFit f = fit_through_origin(cols.x[c], cols.y[c]);
            require(f.slope > 0.0, ErrorKind::InsufficientData, "fit: non-positive slope for configuration '" + id + "'");
            fit.k[c] = f.slope;
            fit.r2[c] = f.r2;
        }
        report.profile.configs[id] = fit;
    }
    return report;
}

inline RadianceMap apply_profile(const RadianceMap& map, const CalibrationProfile& profile,
                                 const std::string& config_id) {
    require(!map.calibrated(), ErrorKind::BadInput, "apply: map is already calibrated");
    const ChannelFit& fit = profile.at(config_id);
    RadianceMap out = map;
    for (std::size_t k = 0; k < map.pixel_count(); ++k) out.set(k, map.at(k).cwiseProduct(fit.k));
    out.set_calibrated(true);
    out.set_exposure_scale(1.0);
    return out;
}

}  // namespace photocal

#pragma once

// Exposure-bracket merging and vignetting correction for linear (RAW-like)
// frames normalized to [0, 1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "photocal/error.hpp"
#include "photocal/image.hpp"

namespace photocal {

struct ExposureSettings {
    double exposure_time_s = 1.0;
    double aperture_f = 1.0;
    double iso = 100.0;
};

// e = t * iso / N^2
inline double relative_exposure(const ExposureSettings& s) {
    require(s.exposure_time_s > 0 && s.aperture_f > 0 && s.iso > 0, ErrorKind::BadInput,
            "exposure metadata must be positive");
    return s.exposure_time_s * s.iso / (s.aperture_f * s.aperture_f);
}

// Radial falloff 1 + a1 r^2 + a2 r^4 + ..., where r is the distance to the
// principal point divided by the distance from the principal point to the
// farthest image corner.
struct VignetteModel {
    std::vector<double> even_coeffs;
    std::optional<Vec2> principal_point;  // pixel coordinates; image centre when unset

    double operator()(double r) const {
        const double r2 = r * r;
        double p = 1.0, v = 1.0;
        for (double a : even_coeffs) {
            p *= r2;
            v += a * p;
        }
        return v;
    }
};

inline RadianceMap correct_vignette(const RadianceMap& image, const VignetteModel& model) {
    const double W = image.width(), H = image.height();
    const Vec2 pp = model.principal_point.value_or(Vec2{W / 2, H / 2});
    double r_norm = 0.0;
    for (const Vec2& corner : {Vec2{0, 0}, Vec2{W, 0}, Vec2{0, H}, Vec2{W, H}})
        r_norm = std::max(r_norm, (corner - pp).norm());
    require(r_norm > 0.0, ErrorKind::BadInput, "vignette: degenerate image geometry");

    for (int s = 0; s <= 1024; ++s)
        require(model(s / 1024.0) > 0.0, ErrorKind::BadInput, "vignette: polynomial is not positive on [0, 1]");

    RadianceMap out = image;
    for (int i = 0; i < image.height(); ++i)
        for (int j = 0; j < image.width(); ++j) {
            const double r = (Vec2{j + 0.5, i + 0.5} - pp).norm() / r_norm;
            const double falloff = model(r);
            require(falloff > 0.0, ErrorKind::BadInput, "vignette: polynomial is not positive inside the image");
            out.set(i, j, image.at(i, j) / falloff);
        }
    return out;
}

struct BracketFrame {
    RadianceMap image;
    ExposureSettings settings;
};

struct ExposureBracket {
    std::vector<BracketFrame> frames;
    std::string config_id;
    std::optional<VignetteModel> vignette;
};

inline constexpr double kUnderexposedLevel = 0.005;
inline constexpr double kSaturatedLevel = 0.995;

struct MergeResult {
    RadianceMap map;
    // Pixels with any channel >= the saturation level in the longest exposure.
    std::vector<std::uint8_t> saturation_mask;
    // Pixels with a channel saturated in every frame; their value is only a
    // lower bound taken from the shortest exposure.
    std::vector<std::uint8_t> unrecovered_mask;
};

inline double merge_weight(double v) {
    if (v <= kUnderexposedLevel || v >= kSaturatedLevel) return 0.0;
    return std::min(v - kUnderexposedLevel, kSaturatedLevel - v);
}

// Merges linear frames into a relative-radiance map in units of
// value / relative_exposure, using a tent weight over each frame's value.
inline MergeResult merge_bracket(const ExposureBracket& bracket) {
    const auto& frames = bracket.frames;
    require(!frames.empty(), ErrorKind::InsufficientData, "merge: empty bracket");
    require(!bracket.config_id.empty(), ErrorKind::BadInput, "merge: bracket config_id is empty");

    std::vector<double> exposure(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        exposure[f] = relative_exposure(frames[f].settings);
        require(frames[f].image.same_shape(frames.front().image), ErrorKind::BadInput,
                "merge: frames have different dimensions");
        frames[f].image.check_values();
    }
    bool increasing = true, decreasing = true;
    for (std::size_t f = 1; f < frames.size(); ++f) {
        increasing = increasing && exposure[f] > exposure[f - 1];
        decreasing = decreasing && exposure[f] < exposure[f - 1];
    }
    require(increasing || decreasing, ErrorKind::BadInput, "merge: exposures must be strictly ordered");
    const std::size_t longest =
        static_cast<std::size_t>(std::max_element(exposure.begin(), exposure.end()) - exposure.begin());

    const RadianceMap& first = frames.front().image;
    MergeResult out{first.like(first.width(), first.height(), first.projection()),
                    std::vector<std::uint8_t>(first.pixel_count(), 0),
                    std::vector<std::uint8_t>(first.pixel_count(), 0)};
    out.map.set_calibrated(false);
    out.map.set_exposure_scale(1.0);

    for (std::size_t k = 0; k < first.pixel_count(); ++k) {
        Rgb merged;
        const Rgb longest_value = frames[longest].image.at(k);
        out.saturation_mask[k] = longest_value.maxCoeff() >= kSaturatedLevel;
        for (int c = 0; c < 3; ++c) {
            std::optional<double> ref;
            double acc = 0.0, total = 0.0;
            for (std::size_t f = 0; f < frames.size(); ++f) {
                const double v = frames[f].image.at(k)[c];
                const double w = merge_weight(v);
                if (w <= 0.0) continue;
                const double estimate = v / exposure[f];
                if (!ref) ref = estimate;
                acc += w * (estimate - *ref);
                total += w;
            }
            if (ref) {
                merged[c] = *ref + acc / total;
                continue;
            }
            // No well-exposed sample: longest unsaturated frame, else the
            // shortest exposure's lower bound.
            std::optional<std::size_t> best;
            for (std::size_t f = 0; f < frames.size(); ++f)
                if (frames[f].image.at(k)[c] < kSaturatedLevel && (!best || exposure[f] > exposure[*best])) best = f;
            if (best) {
                merged[c] = frames[*best].image.at(k)[c] / exposure[*best];
            } else {
                double bound = 0.0;
                for (std::size_t f = 0; f < frames.size(); ++f)
                    bound = std::max(bound, frames[f].image.at(k)[c] / exposure[f]);
                merged[c] = bound;
                out.unrecovered_mask[k] = 1;
            }
        }
        out.map.set(k, merged);
    }
    if (bracket.vignette) out.map = correct_vignette(out.map, *bracket.vignette);
    return out;
}

}  // namespace photocal

#pragma once

// Seedable simulator of LDR input degradations: re-exposure and clipping,
// gamma tonemapping, quantization, additive Gaussian noise and hue shifts.
//
// Random draws use std::mt19937_64 (whose output sequence is fixed by the
// standard) with explicit uniform/normal transforms, so results are
// bit-reproducible across standard libraries for a given seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "photocal/color.hpp"
#include "photocal/error.hpp"
#include "photocal/image.hpp"

namespace photocal {

struct DegradationSpec {
    double reexpose_percentile = 90.0;
    double reexpose_anchor = 0.8;
    double gamma = 2.2;
    int quantize_bits = 8;
    double noise_variance_lo = 0.0;
    double noise_variance_hi = 0.03;
    double hue_shift_variance = 0.03;
    std::uint64_t seed = 0;

    bool apply_gamma = true;
    bool apply_quantize = true;
    bool apply_noise = true;
    bool apply_hue_shift = false;

    void validate() const {
        require(reexpose_percentile > 0 && reexpose_percentile < 100, ErrorKind::BadInput,
                "degradation: percentile must be in (0, 100)");
        require(reexpose_anchor > 0 && reexpose_anchor <= 1, ErrorKind::BadInput,
                "degradation: anchor must be in (0, 1]");
        require(gamma > 0, ErrorKind::BadInput, "degradation: gamma must be positive");
        require(quantize_bits >= 1 && quantize_bits <= 16, ErrorKind::BadInput,
                "degradation: quantization bits must be in [1, 16]");
        require(noise_variance_lo >= 0 && noise_variance_lo <= noise_variance_hi, ErrorKind::BadInput,
                "degradation: noise variance range must satisfy 0 <= lo <= hi");
        require(hue_shift_variance >= 0, ErrorKind::BadInput, "degradation: hue variance must be non-negative");
    }
};

class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Box-Muller; consumes two uniforms per pair of normals.
    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(2.0 * kPi * u2);
        return radius * std::cos(2.0 * kPi * u2);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

// Independent per-stage seeds derived from the user seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Linear interpolation between order statistics.
inline double percentile(std::vector<double> values, double pct) {
    require(!values.empty(), ErrorKind::InsufficientData, "percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return values[lo] + t * (values[hi] - values[lo]);
}

struct ReexposeResult {
    RadianceMap ldr;
    double scale = 1.0;
};

// Scales the map so the given percentile of its luminance equals `anchor`,
// then clips every channel to [0, 1].
inline ReexposeResult reexpose_clip(const RadianceMap& map, double pct = 90.0, double anchor = 0.8) {
    map.check_values();
    const Vec3 w = luminance_weights();
    std::vector<double> lum(map.pixel_count());
    bool any_positive = false;
    for (std::size_t k = 0; k < map.pixel_count(); ++k) {
        lum[k] = w.dot(map.at(k));
        any_positive = any_positive || lum[k] > 0.0;
    }
    require(any_positive, ErrorKind::BadInput, "reexpose: map has no energy");
    const double p = percentile(std::move(lum), pct);
    require(p > 0.0, ErrorKind::BadInput, "reexpose: luminance percentile is zero");
    ReexposeResult out{map, anchor / p};
    for (double& v : out.ldr.data()) v = std::clamp(v * out.scale, 0.0, 1.0);
    out.ldr.set_calibrated(false);
    out.ldr.set_exposure_scale(map.exposure_scale() * out.scale);
    return out;
}

inline void check_unit_range(const RadianceMap& image) {
    for (double v : image.data())
        require(v >= 0.0 && v <= 1.0, ErrorKind::BadInput, "LDR image values must lie in [0, 1]");
}

inline RadianceMap gamma_encode(const RadianceMap& image, double gamma) {
    check_unit_range(image);
    RadianceMap out = image;
    for (double& v : out.data()) v = std::pow(v, 1.0 / gamma);
    return out;
}

inline RadianceMap gamma_decode(const RadianceMap& image, double gamma) {
    check_unit_range(image);
    RadianceMap out = image;
    for (double& v : out.data()) v = std::pow(v, gamma);
    return out;
}

inline RadianceMap quantize(const RadianceMap& image, int bits) {
    check_unit_range(image);
    require(bits >= 1 && bits <= 16, ErrorKind::BadInput, "quantize: bits must be in [1, 16]");
    const double levels = std::ldexp(1.0, bits) - 1.0;
    RadianceMap out = image;
    for (double& v : out.data()) v = std::round(v * levels) / levels;
    return out;
}

struct NoiseResult {
    RadianceMap image;
    double variance = 0.0;
};

// One variance ~ U[lo, hi] per image, then i.i.d. N(0, variance) per value,
// clipped to [0, 1].
inline NoiseResult add_noise(const RadianceMap& image, double variance_lo, double variance_hi, std::uint64_t seed) {
    check_unit_range(image);
    require(variance_lo >= 0 && variance_lo <= variance_hi, ErrorKind::BadInput, "noise: invalid variance range");
    DeterministicRng rng(seed);
    NoiseResult out{image, variance_lo + (variance_hi - variance_lo) * rng.uniform()};
    if (out.variance == 0.0) return out;
    const double sigma = std::sqrt(out.variance);
    for (double& v : out.image.data()) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
    return out;
}

struct Hsv {
    double h;  // turns, [0, 1)
    double s;
    double v;
};

inline Hsv rgb_to_hsv(const Rgb& c) {
    const double mx = c.maxCoeff(), mn = c.minCoeff();
    const double delta = mx - mn;
    Hsv out{0.0, mx > 0.0 ? delta / mx : 0.0, mx};
    if (delta <= 0.0) return out;
    double h;
    if (mx == c[0])
        h = (c[1] - c[2]) / delta;
    else if (mx == c[1])
        h = 2.0 + (c[2] - c[0]) / delta;
    else
        h = 4.0 + (c[0] - c[1]) / delta;
    h /= 6.0;
    out.h = h - std::floor(h);
    return out;
}

inline Rgb hsv_to_rgb(const Hsv& hsv) {
    const double h6 = (hsv.h - std::floor(hsv.h)) * 6.0;
    const int sector = static_cast<int>(std::floor(h6)) % 6;
    const double f = h6 - std::floor(h6);
    const double v = hsv.v;
    const double p = v * (1.0 - hsv.s);
    const double q = v * (1.0 - hsv.s * f);
    const double t = v * (1.0 - hsv.s * (1.0 - f));
    switch (sector) {
        case 0: return {v, t, p};
        case 1: return {q, v, p};
        case 2: return {p, v, t};
        case 3: return {p, q, v};
        case 4: return {t, p, v};
        default: return {v, p, q};
    }
}

// Rotates every pixel's hue by `offset_turns`; value (max channel) and
// saturation are kept, grey pixels are returned untouched.
inline RadianceMap hue_shift(const RadianceMap& image, double offset_turns) {
    check_unit_range(image);
    RadianceMap out = image;
    for (std::size_t k = 0; k < image.pixel_count(); ++k) {
        const Rgb c = image.at(k);
        if (c.maxCoeff() == c.minCoeff()) continue;
        Hsv hsv = rgb_to_hsv(c);
        hsv.h += offset_turns;
        hsv.h -= std::floor(hsv.h);
        out.set(k, hsv_to_rgb(hsv));
    }
    return out;
}

inline double draw_hue_offset(double variance, std::uint64_t seed) {
    DeterministicRng rng(seed);
    return std::sqrt(variance) * rng.normal();
}

struct DegradeResult {
    RadianceMap ldr;
    double scale = 1.0;
    double noise_variance = 0.0;
    double hue_offset = 0.0;
    std::uint64_t seed = 0;
};

enum : std::uint64_t { kNoiseStream = 1, kHueStream = 2 };

// reexpose/clip -> [hue shift] -> gamma -> quantize -> noise
inline DegradeResult degrade_all(const RadianceMap& map, const DegradationSpec& spec) {
    spec.validate();
    auto [ldr, scale] = reexpose_clip(map, spec.reexpose_percentile, spec.reexpose_anchor);
    DegradeResult out{std::move(ldr), scale, 0.0, 0.0, spec.seed};
    if (spec.apply_hue_shift) {
        out.hue_offset = draw_hue_offset(spec.hue_shift_variance, derive_seed(spec.seed, kHueStream));
        out.ldr = hue_shift(out.ldr, out.hue_offset);
    }
    if (spec.apply_gamma) out.ldr = gamma_encode(out.ldr, spec.gamma);
    if (spec.apply_quantize) out.ldr = quantize(out.ldr, spec.quantize_bits);
    if (spec.apply_noise) {
        auto noisy = add_noise(out.ldr, spec.noise_variance_lo, spec.noise_variance_hi,
                               derive_seed(spec.seed, kNoiseStream));
        out.ldr = std::move(noisy.image);
        out.noise_variance = noisy.variance;
    }
    return out;
}

}  // namespace photocal

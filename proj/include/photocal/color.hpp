#pragma once

// Colorimetric conversions and correlated colour temperature.
//
// Linear RGB uses ITU-R BT.709 primaries with a D65 white point. The
// RGB->XYZ matrix is normalized so that RGB (1, 1, 1) maps to the white
// point with Y = 1, i.e. the middle row gives photometric luminance directly.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>

#include "photocal/error.hpp"
#include "photocal/image.hpp"

namespace photocal {

struct Chromaticity {
    double x = 0.0;
    double y = 0.0;

    bool valid() const noexcept { return x > 0 && x < 1 && y > 0 && y < 1 && x + y < 1; }
};

inline constexpr Chromaticity kD65{0.3127, 0.3290};

struct TriStimulus {
    double X = 0.0;
    double Y = 0.0;
    double Z = 0.0;

    Vec3 vec() const { return {X, Y, Z}; }
};

namespace detail {

inline Vec3 xy_to_xyz_unit(double x, double y) { return {x / y, 1.0, (1.0 - x - y) / y}; }

inline Eigen::Matrix3d make_rgb_to_xyz() {
    Eigen::Matrix3d primaries;
    primaries.col(0) = xy_to_xyz_unit(0.64, 0.33);
    primaries.col(1) = xy_to_xyz_unit(0.30, 0.60);
    primaries.col(2) = xy_to_xyz_unit(0.15, 0.06);
    const Vec3 white = xy_to_xyz_unit(kD65.x, kD65.y);
    const Vec3 scale = primaries.partialPivLu().solve(white);
    return primaries * scale.asDiagonal();
}

}  // namespace detail

inline const Eigen::Matrix3d& rgb_to_xyz_matrix() {
    static const Eigen::Matrix3d m = detail::make_rgb_to_xyz();
    return m;
}

inline const Eigen::Matrix3d& xyz_to_rgb_matrix() {
    static const Eigen::Matrix3d m = rgb_to_xyz_matrix().inverse();
    return m;
}

// Weights of the luminance (Y) row.
inline Vec3 luminance_weights() { return rgb_to_xyz_matrix().row(1).transpose(); }

inline TriStimulus rgb_to_xyz(const Rgb& rgb) {
    const Vec3 v = rgb_to_xyz_matrix() * rgb;
    return {v[0], v[1], v[2]};
}

inline Rgb xyz_to_rgb(const TriStimulus& xyz) { return xyz_to_rgb_matrix() * xyz.vec(); }

inline double luminance(const Rgb& rgb) { return luminance_weights().dot(rgb); }

// Returns nullopt when X + Y + Z is not positive.
inline std::optional<Chromaticity> chromaticity_of(const TriStimulus& t) {
    const double sum = t.X + t.Y + t.Z;
    if (!(sum > 0.0) || !std::isfinite(sum)) return std::nullopt;
    return Chromaticity{t.X / sum, t.Y / sum};
}

// Out-of-gamut chromaticities yield negative components; they are kept.
inline Rgb xyy_to_rgb(const Chromaticity& c, double Y) {
    require(c.y != 0.0, ErrorKind::BadInput, "degenerate chromaticity: y = 0");
    require(Y >= 0.0 && std::isfinite(Y), ErrorKind::BadInput, "luminance Y must be finite and non-negative");
    const TriStimulus xyz{c.x * Y / c.y, Y, (1.0 - c.x - c.y) * Y / c.y};
    return xyz_to_rgb(xyz);
}

// CIE 1960 UCS coordinates.
inline Vec2 xy_to_uv(const Chromaticity& c) {
    const double d = -2.0 * c.x + 12.0 * c.y + 3.0;
    return {4.0 * c.x / d, 6.0 * c.y / d};
}

// Rational fit of the Planckian locus in CIE 1960 uv (Krystek), valid for
// 1000 K to 15000 K.
inline Vec2 planckian_locus_uv(double kelvin) {
    const double t = kelvin;
    const double u = (0.860117757 + 1.54118254e-4 * t + 1.28641212e-7 * t * t) /
                     (1.0 + 8.42420235e-4 * t + 7.08145163e-7 * t * t);
    const double v = (0.317398726 + 4.22806245e-5 * t + 4.20481691e-8 * t * t) /
                     (1.0 - 2.89741816e-5 * t + 1.61456053e-7 * t * t);
    return {u, v};
}

inline constexpr double kCctMinKelvin = 2000.0;
inline constexpr double kCctMaxKelvin = 10000.0;
inline constexpr double kCctMaxLocusDistance = 0.05;

// McCamy's cubic. Defined wherever y != 0.1858; no domain checks.
inline double mccamy_cct(const Chromaticity& c) {
    const double n = (c.x - 0.3320) / (0.1858 - c.y);
    return ((449.0 * n + 3525.0) * n + 6823.3) * n + 5520.33;
}

enum class CctStatus { Ok, InvalidChromaticity, OutOfRange, FarFromLocus };

struct CctResult {
    CctStatus status = CctStatus::InvalidChromaticity;
    double kelvin = 0.0;

    bool ok() const noexcept { return status == CctStatus::Ok; }
};

inline CctResult try_cct_from_xy(const Chromaticity& c) {
    if (!c.valid() || c.y == 0.1858) return {CctStatus::InvalidChromaticity, 0.0};
    const double t = mccamy_cct(c);
    if (!std::isfinite(t) || t < kCctMinKelvin || t > kCctMaxKelvin) return {CctStatus::OutOfRange, t};
    if ((xy_to_uv(c) - planckian_locus_uv(t)).norm() >= kCctMaxLocusDistance) return {CctStatus::FarFromLocus, t};
    return {CctStatus::Ok, t};
}

inline double cct_from_xy(const Chromaticity& c) {
    const CctResult r = try_cct_from_xy(c);
    switch (r.status) {
        case CctStatus::Ok:
            return r.kelvin;
        case CctStatus::InvalidChromaticity:
            fail(ErrorKind::BadInput, "cct: invalid chromaticity");
        case CctStatus::OutOfRange:
            fail(ErrorKind::BadInput,
                 "cct: chromaticity outside the 2000-10000 K domain (" + std::to_string(r.kelvin) + " K)");
        case CctStatus::FarFromLocus:
            fail(ErrorKind::BadInput, "cct: chromaticity too far from the Planckian locus");
    }
    fail(ErrorKind::Internal, "cct: unreachable");
}

}  // namespace photocal

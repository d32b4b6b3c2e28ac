#pragma once

// Analytic scenes with closed-form photometric ground truth.

#include <cmath>
#include <optional>
#include <string>

#include "photocal/cie_cmf.hpp"
#include "photocal/color.hpp"
#include "photocal/error.hpp"
#include "photocal/image.hpp"
#include "photocal/projection.hpp"

namespace photocal {

// Planck's law, spectral radiance in W sr^-1 m^-3.
inline double planck_spectral_radiance(double wavelength_nm, double kelvin) {
    constexpr double h = 6.62607015e-34, c = 2.99792458e8, kb = 1.380649e-23;
    const double l = wavelength_nm * 1e-9;
    return 2.0 * h * c * c / (l * l * l * l * l) / std::expm1(h * c / (l * kb * kelvin));
}

// Blackbody tristimulus (arbitrary scale), trapezoidal rule over the CMF table.
inline TriStimulus planckian_xyz(double kelvin) {
    TriStimulus t;
    const auto& table = cie::kCmf1931;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double weight = (i == 0 || i + 1 == table.size()) ? 0.5 : 1.0;
        const double b = weight * planck_spectral_radiance(table[i].wavelength_nm, kelvin);
        t.X += b * table[i].x_bar;
        t.Y += b * table[i].y_bar;
        t.Z += b * table[i].z_bar;
    }
    return t;
}

inline Chromaticity planckian_xy(double kelvin) {
    require(kelvin > 0.0, ErrorKind::BadInput, "blackbody temperature must be positive");
    return *chromaticity_of(planckian_xyz(kelvin));
}

// Linear RGB of a blackbody with luminance Y = 1.
inline Rgb blackbody_rgb(double kelvin) { return xyy_to_rgb(planckian_xy(kelvin), 1.0); }

struct SynthTruth {
    std::string generator;
    std::optional<double> msi;                 // valid for full-sphere maps
    std::optional<Rgb> planar_illuminance;     // plane facing +z
    std::optional<double> source_solid_angle;  // sr
    std::optional<double> kelvin;
    std::optional<double> kelvin_secondary;
};

struct SynthScene {
    RadianceMap map;
    SynthTruth truth;
};

inline SynthScene uniform_sphere(const Rgb& radiance, const PixelGrid& grid) {
    require(radiance.allFinite() && radiance.minCoeff() >= 0.0, ErrorKind::BadInput,
            "uniform radiance must be finite and non-negative");
    SynthScene scene{RadianceMap(grid.width, grid.height, grid.projection), SynthTruth{}};
    scene.truth.generator = "uniform";
    const auto valid = grid.validity_mask();
    for (std::size_t k = 0; k < grid.pixel_count(); ++k)
        if (valid[k]) scene.map.set(k, radiance);
    if (std::holds_alternative<EquirectFull>(grid.projection)) scene.truth.msi = kPi * luminance(radiance);
    if (!std::holds_alternative<Perspective>(grid.projection) && !std::holds_alternative<Fisheye>(grid.projection))
        scene.truth.planar_illuminance = Rgb(kPi * radiance);
    return scene;
}

namespace detail {

// Fraction of the pixel's solid angle whose directions fall inside the cap.
inline double cap_coverage(const PixelGrid& grid, int row, int col, const Vec3& axis, double cos_radius,
                           double radius) {
    const auto centre = grid.direction_at(col + 0.5, row + 0.5);
    if (!centre) return 0.0;
    double spread = 0.0;
    for (const auto& [dx, dy] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}})
        if (const auto corner = grid.direction_at(col + dx, row + dy))
            spread = std::max(spread, std::acos(clamp_unit(corner->dot(*centre))));
    const double dist = std::acos(clamp_unit(centre->dot(axis)));
    if (dist + spread < radius) return 1.0;
    if (dist - spread > radius) return 0.0;

    constexpr int n = 16;
    std::optional<Vec3> corners[n + 1][n + 1];
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) corners[a][b] = grid.direction_at(col + double(b) / n, row + double(a) / n);
    double inside = 0.0, total = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const auto &p00 = corners[a][b], &p01 = corners[a][b + 1], &p10 = corners[a + 1][b],
                       &p11 = corners[a + 1][b + 1];
            if (!p00 || !p01 || !p10 || !p11) continue;
            const double area = spherical_triangle_area(*p00, *p01, *p11) + spherical_triangle_area(*p00, *p11, *p10);
            const Vec3 mid = (*p00 + *p01 + *p10 + *p11).normalized();
            total += area;
            if (mid.dot(axis) >= cos_radius) inside += area;
        }
    return total > 0.0 ? inside / total : 0.0;
}

}  // namespace detail

// Spherical cap of angular radius `radius_rad` around `axis` with radiance
// `source`, over a uniform background. Boundary pixels carry their covered
// fraction of the cap.
inline SynthScene disk_source(const Rgb& source, const Vec3& axis, double radius_rad, const Rgb& background,
                              const PixelGrid& grid) {
    require(radius_rad > 0.0 && radius_rad <= kPi, ErrorKind::BadInput, "disk radius must be in (0, pi]");
    require(axis.norm() > 0.0, ErrorKind::BadInput, "disk axis must be non-zero");
    require(source.minCoeff() >= 0.0 && background.minCoeff() >= 0.0, ErrorKind::BadInput,
            "disk radiance must be non-negative");
    const Vec3 a = axis.normalized();
    const double cos_r = std::cos(radius_rad);
    SynthScene scene{RadianceMap(grid.width, grid.height, grid.projection), SynthTruth{}};
    scene.truth.generator = "disk";
    for (int i = 0; i < grid.height; ++i)
        for (int j = 0; j < grid.width; ++j) {
            if (!grid.valid_pixel(i, j)) continue;
            const double f = detail::cap_coverage(grid, i, j, a, cos_r, radius_rad);
            scene.map.set(i, j, background + f * (source - background));
        }
    const double omega = 2.0 * kPi * (1.0 - cos_r);
    scene.truth.source_solid_angle = omega;
    if (std::holds_alternative<EquirectFull>(grid.projection))
        scene.truth.msi = (luminance(source) - luminance(background)) * omega / 4.0 + kPi * luminance(background);
    return scene;
}

inline void check_blackbody_range(double kelvin) {
    require(kelvin >= kCctMinKelvin && kelvin <= kCctMaxKelvin, ErrorKind::BadInput,
            "blackbody temperature must be within [2000, 10000] K");
}

// Every valid pixel has the chromaticity of a `kelvin` blackbody and
// luminance `magnitude`.
inline SynthScene blackbody_panorama(double kelvin, double magnitude, const PixelGrid& grid) {
    check_blackbody_range(kelvin);
    require(magnitude > 0.0, ErrorKind::BadInput, "blackbody magnitude must be positive");
    SynthScene scene = uniform_sphere(magnitude * blackbody_rgb(kelvin), grid);
    scene.truth.generator = "blackbody";
    scene.truth.kelvin = kelvin;
    return scene;
}

// Upper half of the rows at `upper_kelvin`, lower half at `lower_kelvin`.
inline SynthScene blackbody_two_region(double upper_kelvin, double upper_magnitude, double lower_kelvin,
                                       double lower_magnitude, const PixelGrid& grid) {
    check_blackbody_range(upper_kelvin);
    check_blackbody_range(lower_kelvin);
    require(upper_magnitude > 0.0 && lower_magnitude > 0.0, ErrorKind::BadInput, "magnitudes must be positive");
    SynthScene scene{RadianceMap(grid.width, grid.height, grid.projection), SynthTruth{}};
    scene.truth.generator = "blackbody-split";
    const Rgb upper = upper_magnitude * blackbody_rgb(upper_kelvin);
    const Rgb lower = lower_magnitude * blackbody_rgb(lower_kelvin);
    for (int i = 0; i < grid.height; ++i)
        for (int j = 0; j < grid.width; ++j)
            if (grid.valid_pixel(i, j)) scene.map.set(i, j, i < grid.height / 2 ? upper : lower);
    scene.truth.kelvin = upper_kelvin;
    scene.truth.kelvin_secondary = lower_kelvin;
    return scene;
}

}  // namespace photocal

#pragma once

// Photometric quantities computed from radiance maps: luminance, colour
// temperature maps, illuminance integrals and mean spherical illuminance.

#include <cstdint>
#include <vector>

#include "photocal/color.hpp"
#include "photocal/error.hpp"
#include "photocal/image.hpp"
#include "photocal/projection.hpp"

namespace photocal {

inline ScalarImage luminance_map(const RadianceMap& map) {
    const Vec3 w = luminance_weights();
    ScalarImage out(map.width(), map.height());
    for (std::size_t k = 0; k < map.pixel_count(); ++k) out[k] = std::max(0.0, w.dot(map.at(k)));
    return out;
}

enum class CctPixel : std::uint8_t { Valid = 0, ZeroEnergy = 1, OutOfDomain = 2 };

struct CctMap {
    int width = 0;
    int height = 0;
    std::vector<float> kelvin;     // 0 where the pixel is not Valid
    std::vector<CctPixel> status;

    bool valid(std::size_t k) const noexcept { return status[k] == CctPixel::Valid; }
    std::size_t valid_count() const noexcept {
        std::size_t n = 0;
        for (auto s : status) n += s == CctPixel::Valid;
        return n;
    }
};

inline CctMap cct_map(const RadianceMap& map) {
    CctMap out{map.width(), map.height(), std::vector<float>(map.pixel_count(), 0.0f),
               std::vector<CctPixel>(map.pixel_count(), CctPixel::ZeroEnergy)};
    for (std::size_t k = 0; k < map.pixel_count(); ++k) {
        const auto xy = chromaticity_of(rgb_to_xyz(map.at(k)));
        if (!xy) continue;
        const CctResult r = try_cct_from_xy(*xy);
        if (!r.ok()) {
            out.status[k] = CctPixel::OutOfDomain;
            continue;
        }
        out.status[k] = CctPixel::Valid;
        out.kelvin[k] = static_cast<float>(r.kelvin);
    }
    return out;
}

inline void check_weights(const RadianceMap& map, const SolidAngleMap& weights) {
    require(map.width() == weights.width && map.height() == weights.height &&
                weights.omega.size() == map.pixel_count(),
            ErrorKind::BadInput, "radiance map and solid-angle map dimensions differ");
}

// Solid-angle-weighted sum of XYZ over the pixels selected by `include`.
template <typename Select>
TriStimulus integrated_xyz(const RadianceMap& map, const SolidAngleMap& weights, Select include) {
    Rgb acc = Rgb::Zero();
    for (std::size_t k = 0; k < map.pixel_count(); ++k)
        if (include(k)) acc += weights.omega[k] * map.at(k);
    return rgb_to_xyz(acc);
}

// CCT of the energy-weighted mean chromaticity of the whole map.
inline double scene_temperature(const RadianceMap& map, const SolidAngleMap& weights) {
    check_weights(map, weights);
    const auto xy = chromaticity_of(integrated_xyz(map, weights, [](std::size_t) { return true; }));
    require(xy.has_value(), ErrorKind::BadInput, "scene temperature: map has no energy");
    return cct_from_xy(*xy);
}

// E = pi / N * sum L(i), N = number of pixels inside the image circle.
inline Rgb orthographic_illuminance(const RadianceMap& map) {
    require(std::holds_alternative<Orthographic>(map.projection()), ErrorKind::Coverage,
            "orthographic illuminance requires an orthographic map");
    const PixelGrid grid = PixelGrid::of(map);
    Rgb sum = Rgb::Zero();
    std::size_t n = 0;
    for (int i = 0; i < map.height(); ++i)
        for (int j = 0; j < map.width(); ++j)
            if (grid.valid_pixel(i, j)) {
                sum += map.at(i, j);
                ++n;
            }
    require(n > 0, ErrorKind::InsufficientData, "orthographic illuminance: image circle is empty");
    return kPi / static_cast<double>(n) * sum;
}

// Illuminance on a plane facing +z: sum of L cos(theta) omega over the
// pixels in front of the plane.
inline Rgb planar_illuminance(const RadianceMap& map, const SolidAngleMap& weights) {
    check_weights(map, weights);
    const PixelGrid grid = PixelGrid::of(map);
    Rgb sum = Rgb::Zero();
    for (int i = 0; i < map.height(); ++i)
        for (int j = 0; j < map.width(); ++j) {
            const std::size_t k = map.index(i, j);
            if (weights.omega[k] <= 0.0) continue;
            const auto d = grid.direction_at(j + 0.5, i + 0.5);
            if (!d || d->z() <= 0.0) continue;
            sum += d->z() * weights.omega[k] * map.at(k);
        }
    return sum;
}

// Scalar illuminance E0 = 1/4 * integral of L over the sphere.
inline double mean_spherical_illuminance(const RadianceMap& map, const SolidAngleMap& weights) {
    require(std::holds_alternative<EquirectFull>(map.projection()), ErrorKind::Coverage,
            "mean spherical illuminance requires a full equirect panorama");
    check_weights(map, weights);
    const Vec3 w = luminance_weights();
    double sum = 0.0;
    for (std::size_t k = 0; k < map.pixel_count(); ++k) sum += w.dot(map.at(k)) * weights.omega[k];
    return 0.25 * sum;
}

}  // namespace photocal

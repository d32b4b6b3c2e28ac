#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "photocal/image.hpp"
#include "photocal/projection.hpp"

namespace testing_util {

// Samples a field at every valid pixel centre of `grid`.
template <typename F>
photocal::RadianceMap sample_field(const photocal::PixelGrid& grid, const F& field) {
    photocal::RadianceMap map(grid.width, grid.height, grid.projection);
    for (int i = 0; i < grid.height; ++i)
        for (int j = 0; j < grid.width; ++j) {
            const auto d = grid.direction_at(j + 0.5, i + 0.5);
            if (!d) continue;
            const auto v = field(d->x(), d->y(), d->z());
            map.set(i, j, photocal::Rgb(v[0], v[1], v[2]));
        }
    return map;
}

inline photocal::RadianceMap random_map(int width, int height, photocal::Projection projection, std::uint64_t seed,
                                        double hi = 1.0) {
    photocal::RadianceMap map(width, height, std::move(projection));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, hi);
    for (double& v : map.data()) v = u(rng);
    return map;
}

// PSNR over the pixels selected by `mask` (all when empty), with the peak
// taken from the reference.
inline double psnr(const photocal::RadianceMap& test, const photocal::RadianceMap& ref,
                   const std::vector<std::uint8_t>& mask = {}) {
    double mse = 0.0, peak = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < ref.pixel_count(); ++k) {
        if (!mask.empty() && !mask[k]) continue;
        const photocal::Rgb d = test.at(k) - ref.at(k);
        mse += d.squaredNorm();
        peak = std::max(peak, ref.at(k).maxCoeff());
        n += 3;
    }
    mse /= static_cast<double>(n);
    return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace testing_util

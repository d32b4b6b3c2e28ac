#include <gtest/gtest.h>

#include <random>

#include "photocal/photometry.hpp"
#include "photocal/synth.hpp"
#include "test_helpers.hpp"

using namespace photocal;
using testing_util::random_map;
using testing_util::sample_field;

namespace {

Rgb rgb_of(oracle::Xy xy, double Y) { return xyy_to_rgb({xy.x, xy.y}, Y); }

}  // namespace

TEST(Luminance, WhiteAndBlack) {
    RadianceMap m(16, 8, EquirectFull{});
    m.fill(Rgb(1, 1, 1));
    for (double v : luminance_map(m).values) EXPECT_NEAR(v, 1.0, 1e-12);
    m.fill(Rgb::Zero());
    for (double v : luminance_map(m).values) EXPECT_EQ(v, 0.0);
}

TEST(Luminance, MatchesPerPixelDotProduct) {
    const RadianceMap m = random_map(32, 16, EquirectFull{}, 9, 100.0);
    const auto row = oracle::rec709_rgb_to_xyz()[1];
    const ScalarImage y = luminance_map(m);
    for (std::size_t k = 0; k < m.pixel_count(); ++k) {
        const Rgb v = m.at(k);
        EXPECT_NEAR(y[k], row[0] * v[0] + row[1] * v[1] + row[2] * v[2], 1e-10);
    }
}

TEST(CctMap, GreyMapIsWhitePointTemperature) {
    RadianceMap m(16, 8, EquirectFull{});
    m.fill(Rgb(4.2, 4.2, 4.2));
    const CctMap c = cct_map(m);
    const float expected = static_cast<float>(cct_from_xy(kD65));
    for (std::size_t k = 0; k < m.pixel_count(); ++k) {
        ASSERT_TRUE(c.valid(k));
        EXPECT_EQ(c.kelvin[k], expected);
    }
}

TEST(CctMap, ScaleInvariantPixelExact) {
    RadianceMap m(64, 32, EquirectFull{});
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> t(2500, 9000), mag(0.01, 100.0);
    for (std::size_t k = 0; k < m.pixel_count(); ++k) m.set(k, rgb_of(oracle::planck_xy(t(rng)), mag(rng)));
    const CctMap base = cct_map(m);
    for (double alpha : {3.7, 1e-3, 1234.5, 0.1}) {
        RadianceMap scaled = m;
        for (double& v : scaled.data()) v *= alpha;
        const CctMap c = cct_map(scaled);
        for (std::size_t k = 0; k < m.pixel_count(); ++k) {
            ASSERT_EQ(c.status[k], base.status[k]);
            ASSERT_EQ(c.kelvin[k], base.kelvin[k]) << alpha;
        }
    }
}

TEST(CctMap, TwoBlackbodyRegions) {
    RadianceMap m(64, 32, EquirectFull{});
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 64; ++j)
            m.set(i, j, i < 16 ? rgb_of(oracle::planck_xy(3000), 5.0) : rgb_of(oracle::planck_xy(6500), 0.2));
    const CctMap c = cct_map(m);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 64; ++j) EXPECT_NEAR(c.kelvin[i * 64 + j], i < 16 ? 3000.0 : 6500.0, 30.0);
}

TEST(CctMap, InvalidPixelsFlagged) {
    RadianceMap m(4, 2, EquirectFull{});
    m.fill(Rgb(1, 1, 1));
    m.set(0, 0, Rgb::Zero());
    m.set(0, 1, Rgb(0, 0, 1));
    const CctMap c = cct_map(m);
    EXPECT_EQ(c.status[0], CctPixel::ZeroEnergy);
    EXPECT_EQ(c.status[1], CctPixel::OutOfDomain);
    EXPECT_EQ(c.valid_count(), 6u);
}

TEST(SceneTemperature, UniformAndScaled) {
    RadianceMap m(64, 32, EquirectFull{});
    const Chromaticity c{0.40, 0.39};
    m.fill(xyy_to_rgb(c, 10.0));
    const auto w = solid_angles(m);
    EXPECT_NEAR(scene_temperature(m, w), cct_from_xy(c), 1e-6);
    RadianceMap scaled = m;
    for (double& v : scaled.data()) v *= 17.0;
    EXPECT_NEAR(scene_temperature(scaled, w), scene_temperature(m, w), 1e-6);
}

TEST(SceneTemperature, SameChromaticityDifferentMagnitudes) {
    RadianceMap m(64, 32, EquirectFull{});
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 64; ++j) m.set(i, j, rgb_of(oracle::planck_xy(3000), j < 32 ? 100.0 : 0.5));
    EXPECT_NEAR(scene_temperature(m, solid_angles(m)), 3000.0, 30.0);
}

TEST(SceneTemperature, Errors) {
    RadianceMap m(64, 32, EquirectFull{});
    EXPECT_THROW(scene_temperature(m, solid_angles(m)), Error);
    m.fill(Rgb(1, 1, 1));
    EXPECT_THROW(scene_temperature(m, solid_angles(PixelGrid(EquirectFull{}, 32, 16))), Error);
}

TEST(OrthographicIlluminance, UniformDisk) {
    RadianceMap m(128, 128, Orthographic{});
    m.fill(Rgb(1, 1, 1));
    const Rgb e = orthographic_illuminance(m);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(e[c] / kPi, 1.0, 1e-12);
}

TEST(OrthographicIlluminance, HalfDiskAtTwo) {
    RadianceMap m(128, 128, Orthographic{});
    for (int i = 0; i < 128; ++i)
        for (int j = 0; j < 64; ++j) m.set(i, j, Rgb(2, 2, 2));
    const Rgb e = orthographic_illuminance(m);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(e[c] / kPi, 1.0, 1e-12);
}

TEST(OrthographicIlluminance, MatchesStratifiedIntegration) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto field = oracle::SmoothField::random(seed);
        const RadianceMap m = sample_field(PixelGrid(Orthographic{}, 512, 512), field);
        const Rgb e = orthographic_illuminance(m);
        const auto truth = oracle::hemisphere_cosine_integral(field, 1000);
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(e[c] / truth[c], 1.0, 0.005) << seed;
    }
}

TEST(OrthographicIlluminance, LinearAndProjectionChecked) {
    const RadianceMap m = random_map(64, 64, Orthographic{}, 3, 10.0);
    RadianceMap scaled = m;
    for (double& v : scaled.data()) v *= 2.5;
    const Rgb a = orthographic_illuminance(m), b = orthographic_illuminance(scaled);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(b[c], 2.5 * a[c], 1e-12 * b[c]);
    try {
        orthographic_illuminance(RadianceMap(64, 32, EquirectFull{}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Coverage);
    }
}

TEST(PlanarIlluminance, UniformHemisphere) {
    RadianceMap m(256, 256, EquirectHemisphere{});
    m.fill(Rgb(2, 1, 0.5));
    const Rgb e = planar_illuminance(m, solid_angles(m));
    EXPECT_NEAR(e[0] / (2 * kPi), 1.0, 1e-4);
    EXPECT_NEAR(e[1] / kPi, 1.0, 1e-4);
    EXPECT_NEAR(e[2] / (0.5 * kPi), 1.0, 1e-4);
}

TEST(PlanarIlluminance, SinglePixelOnAxis) {
    RadianceMap m(65, 65, EquirectHemisphere{});
    m.set(32, 32, Rgb(7, 7, 7));
    const auto w = solid_angles(m);
    const Rgb e = planar_illuminance(m, w);
    EXPECT_NEAR(e[1], 7.0 * w.omega[m.index(32, 32)], 1e-15);
}

TEST(PlanarIlluminance, DimensionMismatch) {
    RadianceMap m(64, 64, EquirectHemisphere{});
    EXPECT_THROW(planar_illuminance(m, solid_angles(PixelGrid(EquirectHemisphere{}, 32, 32))), Error);
}

TEST(Msi, UniformFieldIsPiL) {
    for (int h : {64, 128}) {
        RadianceMap m(2 * h, h, EquirectFull{});
        m.fill(Rgb(3, 3, 3));
        EXPECT_NEAR(mean_spherical_illuminance(m, solid_angles(m)) / (3 * kPi), 1.0, 1e-6);
    }
}

TEST(Msi, ZeroAndErrors) {
    RadianceMap m(128, 64, EquirectFull{});
    EXPECT_EQ(mean_spherical_illuminance(m, solid_angles(m)), 0.0);
    EXPECT_THROW(mean_spherical_illuminance(m, solid_angles(PixelGrid(EquirectFull{}, 64, 32))), Error);
    RadianceMap hemi(64, 64, EquirectHemisphere{});
    EXPECT_THROW(mean_spherical_illuminance(hemi, solid_angles(hemi)), Error);
}

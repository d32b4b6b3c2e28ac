#include <gtest/gtest.h>

#include <random>

#include "photocal/photometry.hpp"
#include "photocal/projection.hpp"
#include "test_helpers.hpp"

using namespace photocal;
using testing_util::psnr;
using testing_util::random_map;
using testing_util::sample_field;

namespace {

double angle_between(const Vec3& a, const Vec3& b) { return std::acos(std::clamp(a.dot(b), -1.0, 1.0)); }

Fisheye mei_camera() {
    UnifiedSphereModel m;
    m.xi = 0.9;
    m.fx = m.fy = 200.0;
    m.cx = m.cy = 256.0;
    m.distortion = {-0.05, 0.01, 1e-4, -1e-4};
    return Fisheye{CameraIntrinsics{m, 512, 512}};
}

Fisheye radial_camera() {
    RadialPolyModel m;
    m.focal = 150.0;
    m.cx = m.cy = 256.0;
    m.coeffs = {-0.02};
    return Fisheye{CameraIntrinsics{m, 512, 512}};
}

std::vector<PixelGrid> all_grids() {
    return {PixelGrid(EquirectFull{}, 256, 128), PixelGrid(EquirectHemisphere{}, 128, 128),
            PixelGrid(Perspective{60.0}, 96, 64), PixelGrid(Orthographic{}, 128, 128),
            PixelGrid(mei_camera(), 512, 512), PixelGrid(radial_camera(), 512, 512)};
}

}  // namespace

TEST(Projection, EquirectCentreAndZenith) {
    const PixelGrid g(EquirectFull{}, 256, 128);
    const double half_pixel = 0.5 * std::hypot(2 * kPi / g.width, kPi / g.height);
    EXPECT_LE(angle_between(pixel_to_direction(g, 64, 128), Vec3(0, 0, 1)), half_pixel);
    for (int j = 0; j < g.width; j += 17)
        EXPECT_LE(angle_between(pixel_to_direction(g, 0, j), Vec3(0, 1, 0)), half_pixel);
}

TEST(Projection, HemisphereAxisAtCentre) {
    const PixelGrid g(EquirectHemisphere{}, 128, 64);
    const double half_pixel = 0.5 * std::hypot(kPi / g.width, kPi / g.height);
    EXPECT_LE(angle_between(pixel_to_direction(g, 32, 64), Vec3(0, 0, 1)), half_pixel);
}

TEST(Projection, RoundTripWithinHalfPixel) {
    std::mt19937_64 rng(5);
    for (const auto& g : all_grids()) {
        std::uniform_int_distribution<int> row(0, g.height - 1), col(0, g.width - 1);
        int checked = 0;
        for (int n = 0; n < 10000; ++n) {
            const int i = row(rng), j = col(rng);
            if (!g.valid_pixel(i, j)) continue;
            const auto back = direction_to_pixel(g, pixel_to_direction(g, i, j));
            ASSERT_TRUE(back) << projection_name(g.projection);
            EXPECT_LT((*back - Vec2(j + 0.5, i + 0.5)).norm(), 0.51) << projection_name(g.projection);
            ++checked;
        }
        EXPECT_GT(checked, 1000);
    }
}

TEST(Projection, InvalidPixelsAreRejected) {
    const PixelGrid ortho(Orthographic{}, 64, 64);
    EXPECT_FALSE(ortho.valid_pixel(0, 0));
    try {
        pixel_to_direction(ortho, 0, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Coverage);
    }
    EXPECT_THROW(pixel_to_direction(ortho, 64, 0), Error);
    EXPECT_FALSE(direction_to_pixel(ortho, Vec3(0, 0, -1)).has_value());
    EXPECT_FALSE(direction_to_pixel(PixelGrid(Perspective{60}, 32, 32), Vec3(1, 0, 0.2)).has_value());
}

TEST(Projection, EquirectAspectEnforced) { EXPECT_THROW(RadianceMap(100, 100, EquirectFull{}), Error); }

TEST(SolidAngles, SphereAndHemisphereTotals) {
    for (int h : {8, 33, 64, 256}) {
        EXPECT_NEAR(solid_angles(PixelGrid(EquirectFull{}, 2 * h, h)).total() / (4 * kPi), 1.0, 1e-6) << h;
        EXPECT_NEAR(solid_angles(PixelGrid(EquirectHemisphere{}, 2 * h, h)).total() / (2 * kPi), 1.0, 1e-6) << h;
        EXPECT_NEAR(solid_angles(PixelGrid(EquirectHemisphere{}, h, h)).total() / (2 * kPi), 1.0, 1e-6) << h;
    }
}

TEST(SolidAngles, PerspectivePyramid) {
    for (double fov : {60.0, 90.0, 120.0}) {
        const double half = fov * kPi / 360.0;
        const double expected = 4.0 * std::asin(std::sin(half) * std::sin(half));
        const auto omega = solid_angles(PixelGrid(Perspective{fov}, 128, 128));
        EXPECT_NEAR(omega.total() / expected, 1.0, 1e-4) << fov;
    }
    // 60 degrees: 4 asin(sin^2 30) = 4 asin(1/4)
    EXPECT_NEAR(solid_angles(PixelGrid(Perspective{60.0}, 64, 64)).total(), 4 * std::asin(0.25), 1e-4);
}

TEST(SolidAngles, NumericSubdivisionAgreesWithClosedForms) {
    const PixelGrid persp(Perspective{75.0}, 40, 30);
    const auto exact = solid_angles(persp);
    const auto numeric = numeric_solid_angles(persp, 2);
    for (std::size_t k = 0; k < exact.omega.size(); ++k) EXPECT_NEAR(numeric.omega[k] / exact.omega[k], 1.0, 1e-9);

    const PixelGrid eq(EquirectFull{}, 64, 32);
    const auto eq_exact = solid_angles(eq);
    const auto eq_numeric = numeric_solid_angles(eq, 8);
    for (std::size_t k = 0; k < eq_exact.omega.size(); ++k)
        EXPECT_NEAR(eq_numeric.omega[k] / eq_exact.omega[k], 1.0, 2e-3);
}

TEST(SolidAngles, OrthographicInteriorAndTotal) {
    const PixelGrid g(Orthographic{}, 256, 256);
    const auto omega = solid_angles(g);
    const auto numeric = numeric_solid_angles(g, 8);
    for (int i = 40; i < 216; i += 13)
        for (int j = 40; j < 216; j += 11) {
            const std::size_t k = static_cast<std::size_t>(i) * 256 + j;
            EXPECT_NEAR(omega.omega[k] / numeric.omega[k], 1.0, 1e-3);
        }
    // Pixels whose centre is outside the disk are dropped, so less than the
    // full hemisphere is covered. Valid pixels are compared with a polar
    // integration of the same cell clipped to the disk.
    double oracle_total = 0.0;
    for (int i = 0; i < 256; ++i)
        for (int j = 0; j < 256; ++j) {
            if (!g.valid_pixel(i, j)) continue;
            const double r_px = std::hypot(j + 0.5 - 128, i + 0.5 - 128);
            const double expected =
                oracle::ortho_cell_solid_angle((j - 128) / 128.0, (j - 127) / 128.0, (127 - i) / 128.0, (128 - i) / 128.0, r_px > 124 ? 4000 : 200);
            oracle_total += expected;
            if (r_px > 124) {
                EXPECT_NEAR(omega.omega[i * 256 + j] / expected, 1.0, 1e-4) << i << "," << j;
            }
        }
    EXPECT_NEAR(omega.total() / oracle_total, 1.0, 1e-4);
    EXPECT_LT(omega.total(), 2 * kPi);
    for (std::size_t k = 0; k < omega.omega.size(); ++k)
        if (g.valid_pixel(static_cast<int>(k / 256), static_cast<int>(k % 256))) {
            EXPECT_GT(omega.omega[k], 0.0);
        }
}

TEST(SolidAngles, FisheyePositiveOnValidPixels) {
    const PixelGrid g(mei_camera(), 512, 512);
    const auto omega = solid_angles(g);
    const auto mask = g.validity_mask();
    for (std::size_t k = 0; k < mask.size(); k += 97)
        if (mask[k]) {
            EXPECT_GT(omega.omega[k], 0.0);
        }
}

TEST(Reproject, ConstantFieldIsBitExact) {
    RadianceMap src(256, 128, EquirectFull{});
    const Rgb c(0.3, 1.7, 12.5);
    src.fill(c);
    const ViewFrame frame = ViewFrame::look(Vec3(0.3, 0.2, 1.0), Vec3(0, 1, 0), 90.0);
    for (const Projection& p : {Projection{Perspective{90.0}}, Projection{Orthographic{}},
                                Projection{EquirectHemisphere{}}, Projection{EquirectFull{}}}) {
        const int w = std::holds_alternative<EquirectFull>(p) ? 128 : 64;
        const RadianceMap dst = reproject(src, p, w, 64, frame);
        const PixelGrid g(p, w, 64);
        for (int i = 0; i < dst.height(); ++i)
            for (int j = 0; j < dst.width(); ++j)
                if (g.valid_pixel(i, j)) {
                    ASSERT_EQ(dst.at(i, j), c);
                }
    }
}

TEST(Reproject, EquirectPerspectiveRoundTrip) {
    const auto field = oracle::SmoothField::random(3, 4, 4.0);
    const RadianceMap src = sample_field(PixelGrid(EquirectFull{}, 512, 256), field);
    const RadianceMap view = reproject(src, Perspective{90.0}, 256, 256);
    const auto back = reproject_partial(view, EquirectFull{}, 512, 256);
    EXPECT_GT(psnr(back.map, src, back.covered), 40.0);
}

TEST(Reproject, NestedFovExtractionAgrees) {
    const auto field = oracle::SmoothField::random(8, 4, 4.0);
    const RadianceMap src = sample_field(PixelGrid(EquirectFull{}, 1024, 512), field);
    const ViewFrame wide = ViewFrame::look(Vec3(0.2, 0.1, 1.0), Vec3(0, 1, 0), 120.0);
    ViewFrame narrow = wide;
    narrow.fov_deg = 60.0;
    const RadianceMap via_wide = extract_view(extract_view(src, wide, 512), ViewFrame{Vec3(0, 0, 1), Vec3(0, 1, 0), 60.0}, 128);
    const RadianceMap direct = extract_view(src, narrow, 128);
    EXPECT_GT(psnr(via_wide, direct), 40.0);
}

TEST(Reproject, HemisphereToOrthographicIlluminance) {
    const auto field = oracle::SmoothField::random(21);
    const RadianceMap hemi = sample_field(PixelGrid(EquirectHemisphere{}, 512, 512), field);
    const Rgb planar = planar_illuminance(hemi, solid_angles(hemi));
    const RadianceMap ortho = reproject(hemi, Orthographic{}, 512, 512);
    const Rgb eq1 = orthographic_illuminance(ortho);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(eq1[c] / planar[c], 1.0, 0.01);
}

TEST(Reproject, CoverageErrorWhenViewExceedsSource) {
    RadianceMap narrow(64, 64, Perspective{60.0});
    narrow.fill(Rgb(1, 1, 1));
    try {
        reproject(narrow, Perspective{120.0}, 64, 64);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Coverage);
    }
    const auto partial = reproject_partial(narrow, Perspective{120.0}, 64, 64);
    EXPECT_EQ(partial.covered[0], 0);
    EXPECT_EQ(partial.covered[32 * 64 + 32], 1);
}

TEST(Reproject, ViewFrameValidation) {
    EXPECT_THROW(ViewFrame::look(Vec3(0, 1, 0), Vec3(0, 1, 0), 60.0), Error);
    ViewFrame bad{Vec3(0, 0, 1), Vec3(0, 0.5, 0), 60.0};
    EXPECT_THROW(bad.validate(), Error);
    ViewFrame wide{Vec3(0, 0, 1), Vec3(0, 1, 0), 180.0};
    EXPECT_THROW(wide.validate(), Error);
}

TEST(Downscale, ConstantIsExact) {
    RadianceMap src(1000, 500, EquirectFull{});
    src.fill(Rgb(0.1, 0.7, 3.3));
    const RadianceMap dst = downscale_energy_preserving(src, 128, 64);
    for (std::size_t k = 0; k < dst.pixel_count(); ++k) ASSERT_EQ(dst.at(k), Rgb(0.1, 0.7, 3.3));
}

TEST(Downscale, PreservesFluxAndMsi) {
    const RadianceMap src = random_map(1024, 512, EquirectFull{}, 77, 50.0);
    const RadianceMap dst = downscale_energy_preserving(src, 128, 64);
    const double msi_src = mean_spherical_illuminance(src, solid_angles(src));
    const double msi_dst = mean_spherical_illuminance(dst, solid_angles(dst));
    EXPECT_NEAR(msi_dst / msi_src, 1.0, 1e-6);
}

TEST(Downscale, HotPixelFlux) {
    RadianceMap src(1000, 500, EquirectFull{});
    src.set(123, 456, Rgb(1000, 2000, 500));
    const RadianceMap dst = downscale_energy_preserving(src, 128, 64);
    const Vec3 w = luminance_weights();
    const auto flux = [&](const RadianceMap& m) {
        const auto omega = solid_angles(m);
        double s = 0.0;
        for (std::size_t k = 0; k < m.pixel_count(); ++k) s += w.dot(m.at(k)) * omega.omega[k];
        return s;
    };
    EXPECT_NEAR(flux(dst) / flux(src), 1.0, 1e-6);
}

TEST(Downscale, HemisphereFlux) {
    const RadianceMap src = random_map(300, 300, EquirectHemisphere{}, 4, 2.0);
    const RadianceMap dst = downscale_energy_preserving(src, 64, 64);
    const Rgb a = planar_illuminance(src, solid_angles(src));
    const auto flux = [](const RadianceMap& m) {
        const auto omega = solid_angles(m);
        Rgb s = Rgb::Zero();
        for (std::size_t k = 0; k < m.pixel_count(); ++k) s += omega.omega[k] * m.at(k);
        return s;
    };
    EXPECT_NEAR(flux(dst)[0] / flux(src)[0], 1.0, 1e-9);
    EXPECT_GT(a[0], 0.0);
}

TEST(Downscale, RejectsUpscaleAndUnsupportedProjection) {
    const RadianceMap src(64, 32, EquirectFull{});
    EXPECT_THROW(downscale_energy_preserving(src, 128, 64), Error);
    const RadianceMap persp(64, 64, Perspective{60});
    EXPECT_THROW(downscale_energy_preserving(persp, 32, 32), Error);
}

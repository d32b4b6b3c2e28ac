#pragma once

// Core image containers.
//
// Direction convention used throughout the library: right-handed frame with
// +x right, +y up (zenith), +z forward. Pixel (row i, column j) has its centre
// at continuous image coordinates (x, y) = (j + 0.5, i + 0.5).
//
// Projections:
//   EquirectFull        W = 2H; column -> azimuth in [-pi, pi) around +y with
//                       +z at the image centre, row -> polar angle from +y.
//   EquirectHemisphere  front hemisphere (z >= 0) in longitude/latitude;
//                       column -> longitude in [-pi/2, pi/2], row -> latitude
//                       in [pi/2, -pi/2]. The hemisphere axis (+z) is at the
//                       image centre. Cutting the front half of a W x H full
//                       panorama gives a (W/2) x H block; any aspect is legal.
//   Perspective         pinhole looking down +z; fov_deg is the horizontal
//                       field of view, square pixels.
//   Orthographic        hemisphere around +z; the unit disk is inscribed in
//                       the image and (x, y) on the disk maps to
//                       (x, y, sqrt(1 - x^2 - y^2)).
//   Fisheye             calibrated fisheye camera (unified sphere or radial
//                       polynomial model), camera looking down +z.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "photocal/error.hpp"

namespace photocal {

using Rgb = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

struct UnifiedSphereModel {
    double xi = 0.0;
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    std::array<double, 4> distortion{};  // k1, k2, p1, p2
};

// r_px = focal * (theta + c1 theta^3 + c2 theta^5 + ...)
struct RadialPolyModel {
    double focal = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    std::vector<double> coeffs;
};

struct CameraIntrinsics {
    std::variant<UnifiedSphereModel, RadialPolyModel> model;
    int width = 0;
    int height = 0;

    void validate() const {
        require(width > 0 && height > 0, ErrorKind::BadInput, "intrinsics: image size must be positive");
        const auto check = [&](double fx, double fy, double cx, double cy) {
            require(fx > 0 && fy > 0, ErrorKind::BadInput, "intrinsics: focal length must be positive");
            require(cx >= 0 && cx <= width && cy >= 0 && cy <= height, ErrorKind::BadInput,
                    "intrinsics: principal point outside image");
        };
        if (const auto* u = std::get_if<UnifiedSphereModel>(&model)) {
            check(u->fx, u->fy, u->cx, u->cy);
            require(u->xi >= 0, ErrorKind::BadInput, "intrinsics: xi must be non-negative");
        } else {
            const auto& r = std::get<RadialPolyModel>(model);
            check(r.focal, r.focal, r.cx, r.cy);
        }
    }
};

struct EquirectFull {};
struct EquirectHemisphere {};
struct Perspective {
    double fov_deg = 90.0;
};
struct Orthographic {};
struct Fisheye {
    CameraIntrinsics intrinsics;
};

using Projection = std::variant<EquirectFull, EquirectHemisphere, Perspective, Orthographic, Fisheye>;

inline std::string projection_name(const Projection& p) {
    struct Visitor {
        std::string operator()(const EquirectFull&) const { return "equirect"; }
        std::string operator()(const EquirectHemisphere&) const { return "hemisphere"; }
        std::string operator()(const Perspective&) const { return "perspective"; }
        std::string operator()(const Orthographic&) const { return "orthographic"; }
        std::string operator()(const Fisheye&) const { return "fisheye"; }
    };
    return std::visit(Visitor{}, p);
}

inline void check_projection_size(const Projection& p, int width, int height) {
    require(width > 0 && height > 0, ErrorKind::BadInput, "image dimensions must be positive");
    if (std::holds_alternative<EquirectFull>(p))
        require(width == 2 * height, ErrorKind::BadInput, "equirect panorama must have width = 2 x height");
    if (const auto* persp = std::get_if<Perspective>(&p))
        require(persp->fov_deg > 0 && persp->fov_deg < 180, ErrorKind::BadInput,
                "perspective fov must be in (0, 180) degrees");
    if (const auto* fish = std::get_if<Fisheye>(&p)) {
        fish->intrinsics.validate();
        require(fish->intrinsics.width == width && fish->intrinsics.height == height, ErrorKind::BadInput,
                "fisheye intrinsics do not match image size");
    }
}

class RadianceMap {
public:
    RadianceMap() = default;

    RadianceMap(int width, int height, Projection projection = EquirectFull{})
        : width_(width), height_(height), projection_(std::move(projection)) {
        check_projection_size(projection_, width_, height_);
        pixels_.assign(static_cast<std::size_t>(width_) * height_ * 3, 0.0);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    const Projection& projection() const noexcept { return projection_; }

    bool calibrated() const noexcept { return calibrated_; }
    void set_calibrated(bool c) noexcept { calibrated_ = c; }
    double exposure_scale() const noexcept { return exposure_scale_; }
    void set_exposure_scale(double s) noexcept { exposure_scale_ = s; }

    std::size_t index(int row, int col) const noexcept { return static_cast<std::size_t>(row) * width_ + col; }

    Rgb at(std::size_t pixel) const noexcept {
        const double* p = &pixels_[pixel * 3];
        return {p[0], p[1], p[2]};
    }
    Rgb at(int row, int col) const noexcept { return at(index(row, col)); }

    void set(std::size_t pixel, const Rgb& v) noexcept {
        double* p = &pixels_[pixel * 3];
        p[0] = v[0];
        p[1] = v[1];
        p[2] = v[2];
    }
    void set(int row, int col, const Rgb& v) noexcept { set(index(row, col), v); }

    void fill(const Rgb& v) noexcept {
        for (std::size_t k = 0; k < pixel_count(); ++k) set(k, v);
    }

    std::span<double> data() noexcept { return pixels_; }
    std::span<const double> data() const noexcept { return pixels_; }

    // All values finite and non-negative.
    void check_values() const {
        for (double v : pixels_)
            require(std::isfinite(v) && v >= 0.0, ErrorKind::BadInput,
                    "radiance map contains a negative or non-finite value");
    }

    bool same_shape(const RadianceMap& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    // Copies metadata (projection, calibration) but not pixels.
    RadianceMap like(int width, int height, Projection projection) const {
        RadianceMap out(width, height, std::move(projection));
        out.calibrated_ = calibrated_;
        out.exposure_scale_ = exposure_scale_;
        return out;
    }

private:
    int width_ = 0;
    int height_ = 0;
    Projection projection_ = EquirectFull{};
    bool calibrated_ = false;
    double exposure_scale_ = 1.0;
    std::vector<double> pixels_;
};

struct ScalarImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    ScalarImage() = default;
    ScalarImage(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t k) noexcept { return values[k]; }
    double operator[](std::size_t k) const noexcept { return values[k]; }
};

}  // namespace photocal

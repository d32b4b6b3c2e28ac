#pragma once

// Pixel <-> direction mappings, per-pixel solid angles, reprojection and
// energy-preserving downscaling. See image.hpp for the frame and projection
// conventions.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "photocal/error.hpp"
#include "photocal/image.hpp"

namespace photocal {

struct SolidAngleMap {
    int width = 0;
    int height = 0;
    Projection projection = EquirectFull{};
    std::vector<double> omega;  // steradians; 0 for pixels outside the valid region

    double total() const {
        double s = 0.0;
        for (double w : omega) s += w;
        return s;
    }
};

namespace detail {

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

// Camera frame (y down) <-> world frame (y up).
inline Vec3 camera_to_world(const Vec3& c) { return {c.x(), -c.y(), c.z()}; }
inline Vec3 world_to_camera(const Vec3& w) { return {w.x(), -w.y(), w.z()}; }

inline Vec2 distort_radtan(const UnifiedSphereModel& m, const Vec2& p) {
    const auto& [k1, k2, p1, p2] = m.distortion;
    const double x = p.x(), y = p.y();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + k1 * r2 + k2 * r2 * r2;
    return {x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
            y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y};
}

inline std::optional<Vec2> project_unified(const UnifiedSphereModel& m, const Vec3& world_dir) {
    const Vec3 s = world_to_camera(world_dir).normalized();
    const double limit = m.xi > 1.0 ? -1.0 / m.xi : -m.xi;
    if (!(s.z() > limit)) return std::nullopt;
    const double denom = s.z() + m.xi;
    const Vec2 d = distort_radtan(m, {s.x() / denom, s.y() / denom});
    return Vec2{m.fx * d.x() + m.cx, m.fy * d.y() + m.cy};
}

inline std::optional<Vec3> lift_unified(const UnifiedSphereModel& m, const Vec2& pixel) {
    const Vec2 distorted{(pixel.x() - m.cx) / m.fx, (pixel.y() - m.cy) / m.fy};
    Vec2 u = distorted;
    for (int it = 0; it < 30; ++it) u = u - (distort_radtan(m, u) - distorted);
    const double r2 = u.squaredNorm();
    const double disc = 1.0 + (1.0 - m.xi * m.xi) * r2;
    if (disc < 0.0) return std::nullopt;
    const double factor = (m.xi + std::sqrt(disc)) / (r2 + 1.0);
    const Vec3 dir = camera_to_world(Vec3{factor * u.x(), factor * u.y(), factor - m.xi}.normalized());
    // Reject pixels where undistortion did not converge.
    const auto back = project_unified(m, dir);
    if (!back || (*back - pixel).norm() > 1e-6) return std::nullopt;
    return dir;
}

inline double radial_poly_eval(const RadialPolyModel& m, double theta) {
    double r = theta, p = theta;
    for (double c : m.coeffs) {
        p *= theta * theta;
        r += c * p;
    }
    return r;
}

inline double radial_poly_derivative(const RadialPolyModel& m, double theta) {
    double d = 1.0, p = 1.0;
    int power = 1;
    for (double c : m.coeffs) {
        p *= theta * theta;
        power += 2;
        d += c * power * p;
    }
    return d;
}

inline std::optional<Vec2> project_radial(const RadialPolyModel& m, const Vec3& world_dir) {
    const Vec3 s = world_to_camera(world_dir).normalized();
    const double theta = std::acos(clamp_unit(s.z()));
    if (radial_poly_derivative(m, theta) <= 0.0) return std::nullopt;
    const double r = m.focal * radial_poly_eval(m, theta);
    const double planar = std::hypot(s.x(), s.y());
    if (planar == 0.0) return Vec2{m.cx, m.cy};
    return Vec2{m.cx + r * s.x() / planar, m.cy + r * s.y() / planar};
}

inline std::optional<Vec3> lift_radial(const RadialPolyModel& m, const Vec2& pixel) {
    const Vec2 d{pixel.x() - m.cx, pixel.y() - m.cy};
    const double rn = d.norm() / m.focal;
    if (rn == 0.0) return Vec3{0.0, 0.0, 1.0};
    double theta = rn;
    for (int it = 0; it < 50; ++it) {
        const double deriv = radial_poly_derivative(m, theta);
        if (deriv <= 0.0) return std::nullopt;
        const double step = (radial_poly_eval(m, theta) - rn) / deriv;
        theta -= step;
        if (std::abs(step) < 1e-15) break;
    }
    if (!(theta >= 0.0 && theta <= kPi) || std::abs(radial_poly_eval(m, theta) - rn) > 1e-9) return std::nullopt;
    if (radial_poly_derivative(m, theta) <= 0.0) return std::nullopt;
    const double st = std::sin(theta);
    return camera_to_world({st * d.x() / d.norm(), st * d.y() / d.norm(), std::cos(theta)});
}

}  // namespace detail

// A projection together with an image size.
struct PixelGrid {
    Projection projection = EquirectFull{};
    int width = 0;
    int height = 0;

    PixelGrid() = default;
    PixelGrid(Projection p, int w, int h) : projection(std::move(p)), width(w), height(h) {
        check_projection_size(projection, width, height);
    }
    static PixelGrid of(const RadianceMap& m) { return {m.projection(), m.width(), m.height()}; }

    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width) * height; }

    // Direction through continuous image coordinates (x, y); nullopt outside
    // the valid region.
    std::optional<Vec3> direction_at(double x, double y) const {
        if (!(x >= 0.0 && x <= width && y >= 0.0 && y <= height)) return std::nullopt;
        const double W = width, H = height;
        if (std::holds_alternative<EquirectFull>(projection)) {
            const double phi = (x / W - 0.5) * 2.0 * kPi;
            const double theta = y / H * kPi;
            return Vec3{std::sin(theta) * std::sin(phi), std::cos(theta), std::sin(theta) * std::cos(phi)};
        }
        if (std::holds_alternative<EquirectHemisphere>(projection)) {
            const double lon = (x / W - 0.5) * kPi;
            const double lat = (0.5 - y / H) * kPi;
            return Vec3{std::cos(lat) * std::sin(lon), std::sin(lat), std::cos(lat) * std::cos(lon)};
        }
        if (const auto* p = std::get_if<Perspective>(&projection)) {
            const double f = perspective_focal(*p);
            return Vec3{(x - W / 2) / f, (H / 2 - y) / f, 1.0}.normalized();
        }
        if (std::holds_alternative<Orthographic>(projection)) {
            const double R = ortho_radius();
            const double px = (x - W / 2) / R, py = (H / 2 - y) / R;
            const double r2 = px * px + py * py;
            if (r2 > 1.0) return std::nullopt;
            return Vec3{px, py, std::sqrt(1.0 - r2)};
        }
        const auto& cam = std::get<Fisheye>(projection).intrinsics;
        if (const auto* u = std::get_if<UnifiedSphereModel>(&cam.model)) return detail::lift_unified(*u, {x, y});
        return detail::lift_radial(std::get<RadialPolyModel>(cam.model), {x, y});
    }

    // Continuous image coordinates of a direction; nullopt when the direction
    // is not covered by the image.
    std::optional<Vec2> pixel_of(const Vec3& direction) const {
        const Vec3 d = direction.normalized();
        const double W = width, H = height;
        std::optional<Vec2> out;
        if (std::holds_alternative<EquirectFull>(projection)) {
            const double theta = std::acos(detail::clamp_unit(d.y()));
            const double phi = std::atan2(d.x(), d.z());
            out = Vec2{(phi / (2.0 * kPi) + 0.5) * W, theta / kPi * H};
        } else if (std::holds_alternative<EquirectHemisphere>(projection)) {
            if (d.z() < -1e-12) return std::nullopt;
            const double lat = std::asin(detail::clamp_unit(d.y()));
            const double lon = std::atan2(d.x(), std::max(d.z(), 0.0));
            out = Vec2{(lon / kPi + 0.5) * W, (0.5 - lat / kPi) * H};
        } else if (const auto* p = std::get_if<Perspective>(&projection)) {
            if (d.z() <= 0.0) return std::nullopt;
            const double f = perspective_focal(*p);
            out = Vec2{W / 2 + f * d.x() / d.z(), H / 2 - f * d.y() / d.z()};
        } else if (std::holds_alternative<Orthographic>(projection)) {
            if (d.z() < -1e-12) return std::nullopt;
            const double R = ortho_radius();
            out = Vec2{W / 2 + R * d.x(), H / 2 - R * d.y()};
        } else {
            const auto& cam = std::get<Fisheye>(projection).intrinsics;
            if (const auto* u = std::get_if<UnifiedSphereModel>(&cam.model))
                out = detail::project_unified(*u, d);
            else
                out = detail::project_radial(std::get<RadialPolyModel>(cam.model), d);
        }
        if (!out) return std::nullopt;
        const double eps = 1e-9;
        if (out->x() < -eps || out->x() > W + eps || out->y() < -eps || out->y() > H + eps) return std::nullopt;
        return Vec2{std::clamp(out->x(), 0.0, W), std::clamp(out->y(), 0.0, H)};
    }

    bool valid_pixel(int row, int col) const { return direction_at(col + 0.5, row + 0.5).has_value(); }

    std::vector<std::uint8_t> validity_mask() const {
        std::vector<std::uint8_t> mask(pixel_count());
        for (int i = 0; i < height; ++i)
            for (int j = 0; j < width; ++j) mask[static_cast<std::size_t>(i) * width + j] = valid_pixel(i, j);
        return mask;
    }

    double perspective_focal(const Perspective& p) const {
        return (width / 2.0) / std::tan(p.fov_deg * kPi / 360.0);
    }
    double ortho_radius() const { return std::min(width, height) / 2.0; }
};

// Unit direction through the centre of pixel (row, col).
inline Vec3 pixel_to_direction(const PixelGrid& grid, int row, int col) {
    require(row >= 0 && row < grid.height && col >= 0 && col < grid.width, ErrorKind::BadInput,
            "pixel index outside image");
    const auto d = grid.direction_at(col + 0.5, row + 0.5);
    require(d.has_value(), ErrorKind::Coverage, "pixel outside the projection's valid region");
    return *d;
}

inline std::optional<Vec2> direction_to_pixel(const PixelGrid& grid, const Vec3& direction) {
    return grid.pixel_of(direction);
}

namespace detail {

// Spherical triangle area (Van Oosterom & Strackee).
inline double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double num = std::abs(a.dot(b.cross(c)));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
}

inline double ortho_column_integrand(double x, double y0, double y1) {
    const double a2 = 1.0 - x * x;
    if (a2 <= 0.0) return 0.0;
    const double a = std::sqrt(a2);
    const double lo = std::clamp(y0, -a, a), hi = std::clamp(y1, -a, a);
    return std::asin(clamp_unit(hi / a)) - std::asin(clamp_unit(lo / a));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                               double fb, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

// Solid angle of the disk-coordinate rectangle [x0,x1]x[y0,y1] under the
// orthographic hemisphere mapping: integral of 1/cos(theta) dA.
inline double ortho_rect_solid_angle(double x0, double x1, double y0, double y1, bool interior) {
    x0 = std::max(x0, -1.0);
    x1 = std::min(x1, 1.0);
    if (x1 <= x0) return 0.0;
    const auto g = [&](double x) { return ortho_column_integrand(x, y0, y1); };
    if (interior) {
        static constexpr double nodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                            0.9061798459386640};
        static constexpr double weights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                              0.2369268850561891, 0.2369268850561891};
        const double c = 0.5 * (x0 + x1), h = 0.5 * (x1 - x0);
        double s = 0.0;
        for (int k = 0; k < 5; ++k) s += weights[k] * g(c + h * nodes[k]);
        return s * h;
    }
    const double fa = g(x0), fb = g(x1), fm = g(0.5 * (x0 + x1));
    return adaptive_simpson(g, x0, x1, fa, fm, fb, (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb), 1e-14, 40);
}

inline double perspective_corner(double a, double b) { return std::atan(a * b / std::sqrt(1.0 + a * a + b * b)); }

}  // namespace detail

// Solid angles by subdividing each pixel into subdiv x subdiv spherical
// quads. Sub-quads with a corner outside the valid region are dropped.
inline SolidAngleMap numeric_solid_angles(const PixelGrid& grid, int subdiv = 4) {
    SolidAngleMap out{grid.width, grid.height, grid.projection, std::vector<double>(grid.pixel_count(), 0.0)};
    const int n = std::max(1, subdiv);
    std::vector<std::optional<Vec3>> corners(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int i = 0; i < grid.height; ++i) {
        for (int j = 0; j < grid.width; ++j) {
            if (!grid.valid_pixel(i, j)) continue;
            for (int a = 0; a <= n; ++a)
                for (int b = 0; b <= n; ++b)
                    corners[a * (n + 1) + b] = grid.direction_at(j + double(b) / n, i + double(a) / n);
            double total = 0.0;
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    const auto& p00 = corners[a * (n + 1) + b];
                    const auto& p01 = corners[a * (n + 1) + b + 1];
                    const auto& p10 = corners[(a + 1) * (n + 1) + b];
                    const auto& p11 = corners[(a + 1) * (n + 1) + b + 1];
                    if (!p00 || !p01 || !p10 || !p11) continue;
                    total += detail::spherical_triangle_area(*p00, *p01, *p11) +
                             detail::spherical_triangle_area(*p00, *p11, *p10);
                }
            }
            out.omega[static_cast<std::size_t>(i) * grid.width + j] = total;
        }
    }
    return out;
}

// Per-pixel solid angles. Closed forms for the equirect and perspective
// projections, exact column quadrature for orthographic, and quad
// subdivision for fisheye cameras.
inline SolidAngleMap solid_angles(const PixelGrid& grid) {
    const int W = grid.width, H = grid.height;
    SolidAngleMap out{W, H, grid.projection, std::vector<double>(grid.pixel_count(), 0.0)};
    auto at = [&](int i, int j) -> double& { return out.omega[static_cast<std::size_t>(i) * W + j]; };

    if (std::holds_alternative<EquirectFull>(grid.projection)) {
        const double dphi = 2.0 * kPi / W;
        for (int i = 0; i < H; ++i) {
            const double band = std::cos(kPi * i / H) - std::cos(kPi * (i + 1) / H);
            for (int j = 0; j < W; ++j) at(i, j) = dphi * band;
        }
    } else if (std::holds_alternative<EquirectHemisphere>(grid.projection)) {
        const double dlon = kPi / W;
        for (int i = 0; i < H; ++i) {
            const double band = std::sin((0.5 - double(i) / H) * kPi) - std::sin((0.5 - double(i + 1) / H) * kPi);
            for (int j = 0; j < W; ++j) at(i, j) = dlon * band;
        }
    } else if (const auto* p = std::get_if<Perspective>(&grid.projection)) {
        const double f = grid.perspective_focal(*p);
        for (int i = 0; i < H; ++i) {
            const double y0 = (H / 2.0 - (i + 1)) / f, y1 = (H / 2.0 - i) / f;
            for (int j = 0; j < W; ++j) {
                const double x0 = (j - W / 2.0) / f, x1 = (j + 1 - W / 2.0) / f;
                at(i, j) = std::abs(detail::perspective_corner(x1, y1) - detail::perspective_corner(x0, y1) -
                                    detail::perspective_corner(x1, y0) + detail::perspective_corner(x0, y0));
            }
        }
    } else if (std::holds_alternative<Orthographic>(grid.projection)) {
        const double R = grid.ortho_radius();
        const double margin = 3.0 / R;
        for (int i = 0; i < H; ++i) {
            const double y0 = (H / 2.0 - (i + 1)) / R, y1 = (H / 2.0 - i) / R;
            for (int j = 0; j < W; ++j) {
                if (!grid.valid_pixel(i, j)) continue;
                const double x0 = (j - W / 2.0) / R, x1 = (j + 1 - W / 2.0) / R;
                const double far_x = std::max(std::abs(x0), std::abs(x1));
                const double far_y = std::max(std::abs(y0), std::abs(y1));
                const bool interior = std::hypot(far_x, far_y) < 1.0 - margin;
                at(i, j) = detail::ortho_rect_solid_angle(x0, x1, y0, y1, interior);
            }
        }
    } else {
        return numeric_solid_angles(grid, 4);
    }
    return out;
}

inline SolidAngleMap solid_angles(const RadianceMap& map) { return solid_angles(PixelGrid::of(map)); }

struct ViewFrame {
    Vec3 forward{0.0, 0.0, 1.0};
    Vec3 up{0.0, 1.0, 0.0};
    double fov_deg = 90.0;

    void validate() const {
        require(std::abs(forward.norm() - 1.0) < 1e-9 && std::abs(up.norm() - 1.0) < 1e-9, ErrorKind::BadInput,
                "view frame vectors must be unit length");
        require(std::abs(forward.dot(up)) < 1e-9, ErrorKind::BadInput, "view frame forward and up must be orthogonal");
        require(fov_deg > 0.0 && fov_deg < 180.0, ErrorKind::BadInput, "view fov must be in (0, 180) degrees");
    }

    // Orthonormalizes `up` against `forward`.
    static ViewFrame look(const Vec3& forward, const Vec3& up_hint, double fov_deg) {
        const Vec3 f = forward.normalized();
        Vec3 u = up_hint - up_hint.dot(f) * f;
        require(u.norm() > 1e-9, ErrorKind::BadInput, "view up vector is parallel to forward");
        return {f, u.normalized(), fov_deg};
    }

    // Columns: right, up, forward.
    Eigen::Matrix3d rotation() const {
        Eigen::Matrix3d r;
        r.col(0) = up.cross(forward);
        r.col(1) = up;
        r.col(2) = forward;
        return r;
    }
};

namespace detail {

// Bilinear sample at continuous coordinates. Equirect sources wrap in
// azimuth and clamp at the poles; other sources clamp at the border. Invalid
// neighbours take the value of a valid one so constant fields stay exact.
inline std::optional<Rgb> sample_bilinear(const RadianceMap& src, const std::vector<std::uint8_t>& valid,
                                          const Vec2& pos) {
    const int W = src.width(), H = src.height();
    const bool wrap = std::holds_alternative<EquirectFull>(src.projection());
    const double fx = pos.x() - 0.5, fy = pos.y() - 0.5;
    const int j0 = static_cast<int>(std::floor(fx)), i0 = static_cast<int>(std::floor(fy));
    const double tx = fx - j0, ty = fy - i0;
    auto col = [&](int j) { return wrap ? ((j % W) + W) % W : std::clamp(j, 0, W - 1); };
    auto row = [&](int i) { return std::clamp(i, 0, H - 1); };

    const std::size_t idx[4] = {src.index(row(i0), col(j0)), src.index(row(i0), col(j0 + 1)),
                                src.index(row(i0 + 1), col(j0)), src.index(row(i0 + 1), col(j0 + 1))};
    // Neighbour preference order: nearest first.
    const int nearest = (ty >= 0.5 ? 2 : 0) + (tx >= 0.5 ? 1 : 0);
    int fallback = -1;
    if (valid[idx[nearest]]) fallback = nearest;
    for (int k = 0; k < 4 && fallback < 0; ++k)
        if (valid[idx[k]]) fallback = k;
    if (fallback < 0) return std::nullopt;

    Rgb v[4];
    for (int k = 0; k < 4; ++k) v[k] = src.at(valid[idx[k]] ? idx[k] : idx[fallback]);
    const Rgb top = v[0] + tx * (v[1] - v[0]);
    const Rgb bottom = v[2] + tx * (v[3] - v[2]);
    return Rgb(top + ty * (bottom - top));
}

}  // namespace detail

struct PartialReprojection {
    RadianceMap map;
    std::vector<std::uint8_t> covered;  // 1 where the destination pixel received a value
};

// Resamples `src` into a new grid whose +z axis points along frame.forward.
// Destination pixels whose direction is not covered by the source are left at
// zero and reported in `covered`.
inline PartialReprojection reproject_partial(const RadianceMap& src, const Projection& dst_projection, int dst_width,
                                             int dst_height, const ViewFrame& frame = {}) {
    require(std::abs(frame.forward.norm() - 1.0) < 1e-9 && std::abs(frame.up.norm() - 1.0) < 1e-9 &&
                std::abs(frame.forward.dot(frame.up)) < 1e-9,
            ErrorKind::BadInput, "view frame must be orthonormal");
    const PixelGrid src_grid = PixelGrid::of(src);
    const PixelGrid dst_grid(dst_projection, dst_width, dst_height);
    const auto src_valid = src_grid.validity_mask();
    const Eigen::Matrix3d rot = frame.rotation();

    PartialReprojection out{src.like(dst_width, dst_height, dst_projection),
                            std::vector<std::uint8_t>(dst_grid.pixel_count(), 0)};
    for (int i = 0; i < dst_height; ++i) {
        for (int j = 0; j < dst_width; ++j) {
            const auto local = dst_grid.direction_at(j + 0.5, i + 0.5);
            if (!local) continue;
            const auto pos = src_grid.pixel_of(rot * *local);
            if (!pos) continue;
            const auto value = detail::sample_bilinear(src, src_valid, *pos);
            if (!value) continue;
            const std::size_t k = out.map.index(i, j);
            out.map.set(k, *value);
            out.covered[k] = 1;
        }
    }
    return out;
}

// Strict variant: every valid destination pixel must be covered by the
// source, otherwise a Coverage error is raised.
inline RadianceMap reproject(const RadianceMap& src, const Projection& dst_projection, int dst_width, int dst_height,
                             const ViewFrame& frame = {}) {
    auto result = reproject_partial(src, dst_projection, dst_width, dst_height, frame);
    const PixelGrid dst_grid(dst_projection, dst_width, dst_height);
    for (int i = 0; i < dst_height; ++i)
        for (int j = 0; j < dst_width; ++j)
            if (dst_grid.valid_pixel(i, j) && !result.covered[result.map.index(i, j)])
                fail(ErrorKind::Coverage, "reproject: destination view extends beyond the source coverage");
    return std::move(result.map);
}

// Perspective view of `frame.fov_deg` centred on frame.forward.
inline RadianceMap extract_view(const RadianceMap& src, const ViewFrame& frame, int size) {
    frame.validate();
    return reproject(src, Perspective{frame.fov_deg}, size, size, frame);
}

namespace detail {

struct OverlapTerm {
    int src;
    double weight;
};

// For each destination cell, the source cells it overlaps and the measure of
// each overlap. Cell boundaries are compared in integer units of
// 1/(n_src * n_dst) so the partition is exact.
template <typename Measure>
std::vector<std::vector<OverlapTerm>> overlap_table(int n_src, int n_dst, Measure measure) {
    std::vector<std::vector<OverlapTerm>> table(n_dst);
    const long long scale = static_cast<long long>(n_src) * n_dst;
    for (int d = 0; d < n_dst; ++d) {
        const long long d0 = static_cast<long long>(d) * n_src, d1 = d0 + n_src;
        for (int s = static_cast<int>(d0 / n_dst); s < n_src; ++s) {
            const long long s0 = static_cast<long long>(s) * n_dst, s1 = s0 + n_dst;
            if (s0 >= d1) break;
            const long long lo = std::max(d0, s0), hi = std::min(d1, s1);
            if (hi <= lo) continue;
            const double w = measure(double(lo) / scale, double(hi) / scale);
            if (w > 0.0) table[d].push_back({s, w});
        }
    }
    return table;
}

// Weighted mean written relative to the first term so that equal inputs are
// reproduced bit-exactly.
inline Rgb weighted_mean(const std::vector<OverlapTerm>& terms, const std::function<Rgb(int)>& value) {
    if (terms.empty()) return Rgb::Zero();
    const Rgb ref = value(terms.front().src);
    Rgb acc = Rgb::Zero();
    double total = 0.0;
    for (const auto& t : terms) {
        acc += t.weight * (value(t.src) - ref);
        total += t.weight;
    }
    return ref + acc / total;
}

}  // namespace detail

// Downscales an equirect (full or hemisphere) map so that every destination
// pixel is the solid-angle-weighted mean of the source area it covers.
// Photometric flux (sum of value x solid angle) is preserved.
inline RadianceMap downscale_energy_preserving(const RadianceMap& src, int dst_width, int dst_height) {
    const bool full = std::holds_alternative<EquirectFull>(src.projection());
    const bool hemi = std::holds_alternative<EquirectHemisphere>(src.projection());
    require(full || hemi, ErrorKind::Coverage, "downscale: only equirect and hemisphere maps are supported");
    require(dst_width > 0 && dst_height > 0 && dst_width <= src.width() && dst_height <= src.height(),
            ErrorKind::BadInput, "downscale: destination must not be larger than the source");
    RadianceMap out = src.like(dst_width, dst_height, src.projection());

    const auto columns = detail::overlap_table(src.width(), dst_width, [](double a, double b) { return b - a; });
    const auto rows = detail::overlap_table(src.height(), dst_height, [full](double a, double b) {
        // a, b are normalized row positions in [0, 1] from the top.
        if (full) return std::cos(kPi * a) - std::cos(kPi * b);
        return std::sin((0.5 - a) * kPi) - std::sin((0.5 - b) * kPi);
    });

    // Azimuthal pass: src.height x dst_width.
    std::vector<Rgb> partial(static_cast<std::size_t>(src.height()) * dst_width);
    for (int i = 0; i < src.height(); ++i)
        for (int J = 0; J < dst_width; ++J)
            partial[static_cast<std::size_t>(i) * dst_width + J] =
                detail::weighted_mean(columns[J], [&](int j) { return src.at(i, j); });

    for (int I = 0; I < dst_height; ++I)
        for (int J = 0; J < dst_width; ++J)
            out.set(I, J, detail::weighted_mean(rows[I], [&](int i) {
                        return partial[static_cast<std::size_t>(i) * dst_width + J];
                    }));
    return out;
}

}  // namespace photocal

#pragma once

// Reference computations used by the tests. These deliberately avoid the
// library's own code paths: different quadratures, explicit formulas and
// brute-force searches.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "photocal/cie_cmf.hpp"

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

struct Xy {
    double x, y;
};

// Planck spectrum against the CMF table using the midpoint-free rectangle
// rule (the library uses the trapezoidal rule).
inline std::array<double, 3> planck_xyz(double kelvin) {
    const double h = 6.62607015e-34, c = 2.99792458e8, kb = 1.380649e-23;
    std::array<double, 3> xyz{0, 0, 0};
    for (const auto& s : photocal::cie::kCmf1931) {
        const double l = s.wavelength_nm * 1e-9;
        const double b = 2 * h * c * c / std::pow(l, 5) / (std::exp(h * c / (l * kb * kelvin)) - 1);
        xyz[0] += b * s.x_bar;
        xyz[1] += b * s.y_bar;
        xyz[2] += b * s.z_bar;
    }
    return xyz;
}

inline Xy planck_xy(double kelvin) {
    const auto t = planck_xyz(kelvin);
    const double s = t[0] + t[1] + t[2];
    return {t[0] / s, t[1] / s};
}

inline std::array<double, 2> uv(Xy c) {
    const double d = -2 * c.x + 12 * c.y + 3;
    return {4 * c.x / d, 6 * c.y / d};
}

// Temperature of the nearest blackbody chromaticity (CIE 1960 uv), by
// exhaustive search at 1 K resolution over [2000, 10000] K.
inline double nearest_planckian_temperature(Xy c) {
    static const std::vector<std::array<double, 2>> locus = [] {
        std::vector<std::array<double, 2>> v;
        for (int t = 2000; t <= 10000; ++t) v.push_back(uv(planck_xy(t)));
        return v;
    }();
    const auto p = uv(c);
    double best = 1e30;
    int best_t = 0;
    for (std::size_t i = 0; i < locus.size(); ++i) {
        const double d = std::hypot(locus[i][0] - p[0], locus[i][1] - p[1]);
        if (d < best) {
            best = d;
            best_t = 2000 + static_cast<int>(i);
        }
    }
    return best_t;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

// BT.709 / D65 RGB->XYZ matrix, built by hand with Cramer's rule.
inline Mat3 inverse3(const Mat3& m) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    Mat3 inv;
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return inv;
}

inline Mat3 rec709_rgb_to_xyz() {
    const double px[3] = {0.64, 0.30, 0.15}, py[3] = {0.33, 0.60, 0.06};
    Mat3 p;
    for (int c = 0; c < 3; ++c) {
        p[0][c] = px[c] / py[c];
        p[1][c] = 1.0;
        p[2][c] = (1 - px[c] - py[c]) / py[c];
    }
    const double w[3] = {0.3127 / 0.3290, 1.0, (1 - 0.3127 - 0.3290) / 0.3290};
    const Mat3 pi = inverse3(p);
    double s[3];
    for (int r = 0; r < 3; ++r) s[r] = pi[r][0] * w[0] + pi[r][1] * w[1] + pi[r][2] * w[2];
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m[r][c] = p[r][c] * s[c];
    return m;
}

// Smooth positive radiance field on the sphere: constant plus spherical
// Gaussian lobes, per channel.
struct Lobe {
    std::array<double, 3> axis;
    double sharpness;
    std::array<double, 3> amplitude;
};

struct SmoothField {
    std::array<double, 3> base;
    std::vector<Lobe> lobes;

    std::array<double, 3> operator()(double x, double y, double z) const {
        std::array<double, 3> v = base;
        for (const auto& l : lobes) {
            const double d = x * l.axis[0] + y * l.axis[1] + z * l.axis[2];
            const double g = std::exp(l.sharpness * (d - 1.0));
            for (int c = 0; c < 3; ++c) v[c] += l.amplitude[c] * g;
        }
        return v;
    }

    static SmoothField random(std::uint64_t seed, int lobes = 4, double max_sharpness = 8.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        SmoothField f;
        for (auto& b : f.base) b = 0.1 + u(rng);
        for (int i = 0; i < lobes; ++i) {
            const double z = 2 * u(rng) - 1, phi = 2 * kPi * u(rng), r = std::sqrt(1 - z * z);
            Lobe l{{r * std::cos(phi), z, r * std::sin(phi)}, 1.0 + (max_sharpness - 1.0) * u(rng), {}};
            for (auto& a : l.amplitude) a = 5.0 * u(rng);
            f.lobes.push_back(l);
        }
        return f;
    }
};

// Integral over the +z hemisphere of f * cos(theta) d(omega), midpoint rule
// in (theta, phi) with n x 2n cells.
template <typename F>
std::array<double, 3> hemisphere_cosine_integral(const F& f, int n = 2000) {
    std::array<double, 3> acc{0, 0, 0};
    const double dt = 0.5 * kPi / n, dp = 2 * kPi / (2 * n);
    for (int a = 0; a < n; ++a) {
        const double t = (a + 0.5) * dt;
        const double w = std::cos(t) * std::sin(t) * dt * dp;
        for (int b = 0; b < 2 * n; ++b) {
            const double p = (b + 0.5) * dp;
            const auto v = f(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
            for (int c = 0; c < 3; ++c) acc[c] += w * v[c];
        }
    }
    return acc;
}

// Solid angle of the part of the axis-aligned square [x0,x1]x[y0,y1] (unit
// disk coordinates) inside the orthographic disk. Polar form: along each ray
// the radial integral of r/sqrt(1-r^2) is closed-form, then midpoint rule in
// the ray angle.
inline double ortho_cell_solid_angle(double x0, double x1, double y0, double y1, int n = 400) {
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    const double c0 = std::atan2(cy, cx);
    double lo = 0.0, hi = 0.0;
    const double xs[2] = {x0, x1}, ys[2] = {y0, y1};
    bool contains_origin = x0 <= 0 && x1 >= 0 && y0 <= 0 && y1 >= 0;
    if (contains_origin) {
        lo = -kPi;
        hi = kPi;
    } else {
        lo = 1e9;
        hi = -1e9;
        for (double x : xs)
            for (double y : ys) {
                double a = std::atan2(y, x) - c0;
                while (a > kPi) a -= 2 * kPi;
                while (a < -kPi) a += 2 * kPi;
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
    }
    double acc = 0.0;
    const double dphi = (hi - lo) / n;
    for (int k = 0; k < n; ++k) {
        const double phi = c0 + lo + (k + 0.5) * dphi;
        const double dx = std::cos(phi), dy = std::sin(phi);
        // slab intersection of the ray t*(dx,dy), t >= 0
        double t0 = 0.0, t1 = 1e9;
        const double d[2] = {dx, dy}, a[2] = {x0, y0}, b[2] = {x1, y1};
        for (int ax = 0; ax < 2; ++ax) {
            if (std::abs(d[ax]) < 1e-15) continue;
            double ta = a[ax] / d[ax], tb = b[ax] / d[ax];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
        }
        t1 = std::min(t1, 1.0);
        if (t1 <= t0) continue;
        acc += (std::sqrt(1 - t0 * t0) - std::sqrt(1 - t1 * t1)) * dphi;
    }
    return acc;
}

// Same integral by jittered stratified sampling: n x n strata in the unit
// square, mapped to cosine-distributed directions, so E = pi * mean(f).
template <typename F>
std::array<double, 3> stratified_cosine_integral(const F& f, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::array<double, 3> acc{0, 0, 0};
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double u1 = (a + u(rng)) / n, u2 = (b + u(rng)) / n;
            const double r = std::sqrt(u1), phi = 2 * kPi * u2;
            const auto v = f(r * std::cos(phi), r * std::sin(phi), std::sqrt(1 - u1));
            for (int c = 0; c < 3; ++c) acc[c] += v[c];
        }
    for (auto& v : acc) v *= kPi / (static_cast<double>(n) * n);
    return acc;
}

}  // namespace oracle

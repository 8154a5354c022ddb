#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of them call into the library kernels they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "crsh/geom.hpp"

namespace oracle {

using crsh::Vec3;

inline Vec3 random_unit(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    for (;;) {
        const Vec3 v{n(rng), n(rng), n(rng)};
        const double len = crsh::length(v);
        if (len > 1e-9) {
            return v / len;
        }
    }
}

inline Vec3 random_in_box(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng)};
}

/// Uniform direction inside the cone (axis, angle) by rejection on the sphere.
inline Vec3 random_in_cone(std::mt19937_64& rng, const Vec3& axis, double angle)
{
    // Sample the spherical cap directly: cos(theta) uniform in [cos(angle), 1].
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double cos_t = 1.0 - u(rng) * (1.0 - std::cos(angle));
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = 2.0 * std::numbers::pi * u(rng);
    const Vec3 helper = std::abs(axis.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 b1 = crsh::normalize(crsh::cross(axis, helper));
    const Vec3 b2 = crsh::cross(axis, b1);
    return crsh::normalize(axis * cos_t + b1 * (sin_t * std::cos(phi)) + b2 * (sin_t * std::sin(phi)));
}

/// Directions on the boundary circle of a cone.
inline std::vector<Vec3> cone_boundary(const Vec3& axis, double angle, int samples)
{
    const Vec3 helper = std::abs(axis.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 b1 = crsh::normalize(crsh::cross(axis, helper));
    const Vec3 b2 = crsh::cross(axis, b1);
    std::vector<Vec3> out;
    for (int k = 0; k < samples; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / samples;
        out.push_back(crsh::normalize(axis * std::cos(angle) +
                                      (b1 * std::cos(phi) + b2 * std::sin(phi)) * std::sin(angle)));
    }
    return out;
}

inline double angle(const Vec3& a, const Vec3& b)
{
    return std::acos(std::clamp(crsh::dot(a, b) / (crsh::length(a) * crsh::length(b)), -1.0, 1.0));
}

/// Ray-triangle by solving the plane equation, then signed edge functions.
struct PlaneHit {
    double t = 0.0;
    /// Smallest edge function normalized by edge length (distance to the nearest edge).
    double edge_margin = 0.0;
};

inline std::optional<PlaneHit> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                                            const Vec3& c, double t_min, double t_max)
{
    const Vec3 n = crsh::cross(b - a, c - a);
    const double area2 = crsh::length(n);
    if (area2 < 1e-14) {
        return std::nullopt;
    }
    const Vec3 un = n / area2;
    const double denom = crsh::dot(un, d);
    if (std::abs(denom) < 1e-12) {
        return std::nullopt;
    }
    const double t = crsh::dot(un, a - o) / denom;
    const Vec3 p = o + d * t;
    const auto edge = [&](const Vec3& from, const Vec3& to) {
        return crsh::dot(un, crsh::cross(to - from, p - from)) / crsh::length(to - from);
    };
    const double e0 = edge(a, b);
    const double e1 = edge(b, c);
    const double e2 = edge(c, a);
    const double margin = std::min({e0, e1, e2});
    if (margin < 0.0 || !(t > t_min && t < t_max)) {
        return std::nullopt;
    }
    return PlaneHit{t, margin};
}

/// Same plane/edge solve, reporting the signed edge margin and t even on a miss.
inline std::optional<PlaneHit> ray_plane_margin(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                                                const Vec3& c)
{
    const Vec3 n = crsh::cross(b - a, c - a);
    const double area2 = crsh::length(n);
    if (area2 < 1e-14) {
        return std::nullopt;
    }
    const Vec3 un = n / area2;
    const double denom = crsh::dot(un, d);
    if (std::abs(denom) < 1e-12) {
        return std::nullopt;
    }
    const double t = crsh::dot(un, a - o) / denom;
    const Vec3 p = o + d * t;
    const auto edge = [&](const Vec3& from, const Vec3& to) {
        return crsh::dot(un, crsh::cross(to - from, p - from)) / crsh::length(to - from);
    };
    return PlaneHit{t, std::min({edge(a, b), edge(b, c), edge(c, a)})};
}

/// Analytic ray (t >= 0) versus solid sphere.
inline bool ray_hits_ball(const Vec3& o, const Vec3& d, const Vec3& c, double r)
{
    const Vec3 oc = c - o;
    const double along = crsh::dot(oc, d);
    const double dist2 = crsh::dot(oc, oc) - along * along;
    if (dist2 > r * r) {
        return false;
    }
    return along >= 0.0 || crsh::dot(oc, oc) <= r * r;
}

struct Ball {
    Vec3 center;
    double radius = 0.0;
};

inline bool solve3(const std::array<std::array<double, 3>, 3>& m, const std::array<double, 3>& rhs, Vec3& out)
{
    const auto det3 = [](const std::array<std::array<double, 3>, 3>& a) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    const double det = det3(m);
    if (std::abs(det) < 1e-14) {
        return false;
    }
    double x[3];
    for (int col = 0; col < 3; ++col) {
        auto mc = m;
        for (int row = 0; row < 3; ++row) {
            mc[row][col] = rhs[row];
        }
        x[col] = det3(mc) / det;
    }
    out = {x[0], x[1], x[2]};
    return true;
}

/// Circumscribed ball of 2, 3 or 4 points (smallest ball with all of them on its surface).
inline std::optional<Ball> circumball(const std::vector<Vec3>& pts)
{
    if (pts.size() == 1) {
        return Ball{pts[0], 0.0};
    }
    if (pts.size() == 2) {
        return Ball{(pts[0] + pts[1]) * 0.5, crsh::length(pts[1] - pts[0]) * 0.5};
    }
    if (pts.size() == 3) {
        const Vec3 a = pts[1] - pts[0];
        const Vec3 b = pts[2] - pts[0];
        const Vec3 n = crsh::cross(a, b);
        const double nn = crsh::dot(n, n);
        if (nn < 1e-18) {
            return std::nullopt;
        }
        const Vec3 off = (crsh::cross(n, a) * crsh::dot(b, b) + crsh::cross(b, n) * crsh::dot(a, a)) / (2.0 * nn);
        return Ball{pts[0] + off, crsh::length(off)};
    }
    const Vec3 a = pts[1] - pts[0];
    const Vec3 b = pts[2] - pts[0];
    const Vec3 c = pts[3] - pts[0];
    Vec3 off;
    if (!solve3({{{a.x, a.y, a.z}, {b.x, b.y, b.z}, {c.x, c.y, c.z}}},
                {crsh::dot(a, a) / 2, crsh::dot(b, b) / 2, crsh::dot(c, c) / 2}, off)) {
        return std::nullopt;
    }
    return Ball{pts[0] + off, crsh::length(off)};
}

/// Minimal enclosing ball by enumerating every 1-4 point support set.
/// O(n^5); fine for n <= 50 with the radius-pruned loop below.
inline Ball min_ball_bruteforce(const std::vector<Vec3>& pts)
{
    const double kSlack = 1e-9;
    // Seed with a loose enclosing ball so only smaller candidates get checked.
    Vec3 centroid;
    for (const Vec3& p : pts) {
        centroid += p;
    }
    centroid = centroid / static_cast<double>(pts.size());
    double loose = 0.0;
    for (const Vec3& p : pts) {
        loose = std::max(loose, crsh::length(p - centroid));
    }
    Ball best{centroid, loose * (1.0 + 1e-12) + 1e-12};
    const auto consider = [&](const std::vector<Vec3>& support) {
        const auto ball = circumball(support);
        if (!ball || ball->radius >= best.radius) {
            return;
        }
        for (const Vec3& p : pts) {
            if (crsh::length(p - ball->center) > ball->radius * (1.0 + kSlack) + kSlack) {
                return;
            }
        }
        best = *ball;
    };
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        consider({pts[i]});
        for (std::size_t j = i + 1; j < n; ++j) {
            consider({pts[i], pts[j]});
            for (std::size_t k = j + 1; k < n; ++k) {
                consider({pts[i], pts[j], pts[k]});
                for (std::size_t l = k + 1; l < n; ++l) {
                    consider({pts[i], pts[j], pts[k], pts[l]});
                }
            }
        }
    }
    return best;
}

inline std::vector<std::uint32_t> running_sum(const std::vector<std::uint32_t>& in, bool inclusive)
{
    std::vector<std::uint32_t> out(in.size());
    std::uint32_t acc = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (inclusive) {
            acc += in[i];
            out[i] = acc;
        } else {
            out[i] = acc;
            acc += in[i];
        }
    }
    return out;
}

inline std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
stable_sort_pairs(const std::vector<std::uint32_t>& keys, const std::vector<std::uint32_t>& values)
{
    std::vector<std::size_t> idx(keys.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<std::uint32_t> k;
    std::vector<std::uint32_t> v;
    for (std::size_t i : idx) {
        k.push_back(keys[i]);
        v.push_back(values[i]);
    }
    return {k, v};
}

} // namespace oracle

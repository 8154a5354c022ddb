#pragma once

#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>

#include "crsh/vec3.hpp"

namespace crsh {

/// Minimum parametric distance accepted by every ray-triangle test.
inline constexpr double kRayEpsilon = 1e-4;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Sphere {
    Vec3 center;
    double radius = 0.0;
};

/// Set of directions within `half_angle` radians of `axis`.
/// A half angle of pi covers every direction.
struct Cone {
    Vec3 axis{0.0, 0.0, 1.0};
    double half_angle = 0.0;

    static Cone full() { return {{0.0, 0.0, 1.0}, std::numbers::pi}; }
    bool contains(const Vec3& dir, double tolerance = 0.0) const;
};

struct Triangle {
    Vec3 v0, v1, v2;
    std::uint32_t mesh_id = 0;
    /// Global index of the triangle in its scene.
    std::uint32_t id = 0;

    Vec3 geometric_normal() const { return normalize(cross(v1 - v0, v2 - v0)); }
};

enum class RayKind : std::uint8_t { Primary, Shadow, Reflection, Refraction };

const char* to_string(RayKind kind);

/// A ray plus the provenance needed to route its result back to a pixel.
struct Ray {
    Vec3 origin;
    Vec3 direction;
    RayKind kind = RayKind::Primary;
    std::uint32_t pixel = 0;
    /// Light index, shadow rays only.
    std::uint32_t light = 0;
    /// Shadow rays: distance from the light to the shaded point.
    double max_t = kInfinity;
    /// Index of the generation slot this ray was emitted into.
    std::uint32_t slot = 0;
    Rgb throughput{1.0, 1.0, 1.0};
};

struct TriangleHit {
    double t = kInfinity;
    double u = 0.0;
    double v = 0.0;
};

/// Moller-Trumbore test restricted to t in (kRayEpsilon, ray.max_t).
/// Degenerate triangles never hit.
std::optional<TriangleHit> ray_triangle_intersect(const Ray& ray, const Triangle& tri);

/// Minimal sphere around the three vertices, radius grown by `enlarge`.
Sphere triangle_bounding_sphere(const Triangle& tri, double enlarge = 0.0);

/// Smallest enclosing ball (move-to-front with pivoting). Throws
/// InvalidArgument on empty input.
Sphere minimal_enclosing_sphere(std::span<const Vec3> points);

/// Cone test with trigonometry hoisted out; used in the traversal inner loops.
class PreparedNodeVolume {
public:
    PreparedNodeVolume(const Sphere& node_sphere, const Cone& node_cone);

    /// True unless no ray starting in the node sphere with direction in the
    /// node cone can reach `target`.
    bool may_intersect(const Sphere& target) const;

    /// Literal form `t*tan(a) + (d+r)/cos(a) >= |P-H|`. Kept for comparison runs;
    /// it is not conservative for on-axis targets.
    bool may_intersect_literal(const Sphere& target) const;

private:
    Vec3 apex_;
    Vec3 axis_;
    double sphere_radius_ = 0.0;
    double tan_half_ = 0.0;
    double inv_cos_half_ = 1.0;
    bool everything_ = false;
};

/// Conservative sphere-swept cone versus sphere test.
bool cone_sphere_test(const Sphere& node_sphere, const Cone& node_cone, const Sphere& target);

struct Spherical {
    double theta = 0.0; ///< angle from +z, [0, pi]
    double phi = 0.0;   ///< azimuth from +x towards +y, [-pi, pi]
};

Spherical spherical_from_direction(const Vec3& dir);
Vec3 direction_from_spherical(const Spherical& s);

/// Ray-sphere overlap along the whole ray (t >= 0), used for primary-ray mesh culling.
bool ray_hits_sphere(const Ray& ray, const Sphere& sphere);

} // namespace crsh

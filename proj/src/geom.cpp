#include "crsh/geom.hpp"

#include <array>
#include <cmath>
#include <list>
#include <vector>

#include "crsh/error.hpp"

namespace crsh {

const char* to_string(RayKind kind)
{
    switch (kind) {
    case RayKind::Primary: return "primary";
    case RayKind::Shadow: return "shadow";
    case RayKind::Reflection: return "reflection";
    case RayKind::Refraction: return "refraction";
    }
    return "unknown";
}

bool Cone::contains(const Vec3& dir, double tolerance) const
{
    if (half_angle >= std::numbers::pi) {
        return true;
    }
    return angle_between(axis, dir) <= half_angle + tolerance;
}

std::optional<TriangleHit> ray_triangle_intersect(const Ray& ray, const Triangle& tri)
{
    const Vec3 e1 = tri.v1 - tri.v0;
    const Vec3 e2 = tri.v2 - tri.v0;
    const Vec3 p = cross(ray.direction, e2);
    const double det = dot(e1, p);

    // Relative threshold: rejects zero-area triangles and rays parallel to the plane.
    const double scale = std::sqrt(length_squared(e1) * length_squared(e2));
    if (!(std::abs(det) > 1e-12 * scale)) {
        return std::nullopt;
    }

    const double inv_det = 1.0 / det;
    const Vec3 s = ray.origin - tri.v0;
    const double u = dot(s, p) * inv_det;
    // Slightly widened edges so rays through a shared edge hit at least one neighbour.
    constexpr double kEdgeSlack = 1e-9;
    if (u < -kEdgeSlack || u > 1.0 + kEdgeSlack) {
        return std::nullopt;
    }

    const Vec3 q = cross(s, e1);
    const double v = dot(ray.direction, q) * inv_det;
    if (v < -kEdgeSlack || u + v > 1.0 + kEdgeSlack) {
        return std::nullopt;
    }

    const double t = dot(e2, q) * inv_det;
    if (!(t > kRayEpsilon && t < ray.max_t)) {
        return std::nullopt;
    }
    return TriangleHit{t, u, v};
}

namespace {

Sphere diametral_sphere(const Vec3& a, const Vec3& b)
{
    return {(a + b) * 0.5, 0.5 * distance(a, b)};
}

} // namespace

Sphere triangle_bounding_sphere(const Triangle& tri, double enlarge)
{
    const std::array<Vec3, 3> v{tri.v0, tri.v1, tri.v2};

    // The longest edge's diametral sphere is minimal whenever it contains the
    // opposite vertex (right, obtuse or collinear); otherwise the circumcircle is.
    int longest = 0;
    double longest_len = -1.0;
    for (int i = 0; i < 3; ++i) {
        const double len = length_squared(v[(i + 1) % 3] - v[i]);
        if (len > longest_len) {
            longest_len = len;
            longest = i;
        }
    }
    const Vec3& a = v[longest];
    const Vec3& b = v[(longest + 1) % 3];
    const Vec3& c = v[(longest + 2) % 3];

    Sphere result = diametral_sphere(a, b);
    if (distance(result.center, c) > result.radius) {
        const Vec3 ab = b - a;
        const Vec3 ac = c - a;
        const Vec3 n = cross(ab, ac);
        const double n2 = length_squared(n);
        const Vec3 offset =
            (cross(n, ab) * length_squared(ac) + cross(ac, n) * length_squared(ab)) / (2.0 * n2);
        result.center = a + offset;
        result.radius = std::max({distance(result.center, a), distance(result.center, b),
                                  distance(result.center, c)});
    }
    result.radius += enlarge;
    return result;
}

namespace {

// Smallest enclosing ball, after Gaertner's move-to-front / pivoting scheme.
// The support set is kept as an orthogonalised basis so that each push is
// a constant-time update.
class Miniball {
public:
    explicit Miniball(std::span<const Vec3> points) : points_(points)
    {
        for (std::size_t i = 0; i < points.size(); ++i) {
            order_.push_back(static_cast<std::uint32_t>(i));
        }
        reset();
        pivot(order_.end());
    }

    Vec3 center() const { return current_c_; }
    double squared_radius() const { return current_sqr_r_; }

private:
    using It = std::list<std::uint32_t>::iterator;

    void reset()
    {
        m_ = 0;
        current_c_ = {};
        current_sqr_r_ = -1.0;
    }

    double excess(const Vec3& p) const { return length_squared(p - current_c_) - current_sqr_r_; }

    bool push(const Vec3& p)
    {
        if (m_ == 0) {
            q0_ = p;
            c_[0] = q0_;
            sqr_r_[0] = 0.0;
        } else {
            v_[m_] = p - q0_;
            std::array<double, 4> a{};
            for (int i = 1; i < m_; ++i) {
                a[i] = 2.0 * dot(v_[i], v_[m_]) / z_[i];
            }
            for (int i = 1; i < m_; ++i) {
                v_[m_] -= v_[i] * a[i];
            }
            z_[m_] = 2.0 * length_squared(v_[m_]);
            if (z_[m_] < 1e-32 * current_sqr_r_) {
                return false;
            }
            const double e = length_squared(p - c_[m_ - 1]) - sqr_r_[m_ - 1];
            f_[m_] = e / z_[m_];
            c_[m_] = c_[m_ - 1] + v_[m_] * f_[m_];
            sqr_r_[m_] = sqr_r_[m_ - 1] + e * f_[m_] / 2.0;
        }
        current_c_ = c_[m_];
        current_sqr_r_ = sqr_r_[m_];
        ++m_;
        return true;
    }

    void pop() { --m_; }

    void move_to_front(It j)
    {
        if (support_end_ == j) {
            ++support_end_;
        }
        order_.splice(order_.begin(), order_, j);
    }

    void mtf(It end)
    {
        support_end_ = order_.begin();
        if (m_ == 4) {
            return;
        }
        for (It k = order_.begin(); k != end;) {
            It j = k++;
            if (excess(points_[*j]) > 0.0) {
                if (push(points_[*j])) {
                    mtf(j);
                    pop();
                    move_to_front(j);
                }
            }
        }
    }

    void pivot(It end)
    {
        It t = std::next(order_.begin());
        mtf(t);
        double max_e = 0.0;
        double old_sqr_r = -1.0;
        do {
            It pivot_it = order_.end();
            max_e = 0.0;
            for (It k = t; k != end; ++k) {
                const double e = excess(points_[*k]);
                if (e > max_e) {
                    max_e = e;
                    pivot_it = k;
                }
            }
            if (max_e > 0.0) {
                t = support_end_;
                if (t == pivot_it) {
                    ++t;
                }
                old_sqr_r = current_sqr_r_;
                push(points_[*pivot_it]);
                mtf(support_end_);
                pop();
                move_to_front(pivot_it);
            }
        } while (max_e > 0.0 && current_sqr_r_ > old_sqr_r);
    }

    std::span<const Vec3> points_;
    std::list<std::uint32_t> order_;
    It support_end_;

    int m_ = 0;
    Vec3 q0_;
    std::array<Vec3, 5> v_{};
    std::array<Vec3, 5> c_{};
    std::array<double, 5> z_{};
    std::array<double, 5> f_{};
    std::array<double, 5> sqr_r_{};
    Vec3 current_c_;
    double current_sqr_r_ = -1.0;
};

} // namespace

Sphere minimal_enclosing_sphere(std::span<const Vec3> points)
{
    if (points.empty()) {
        throw InvalidArgument("minimal_enclosing_sphere: no points");
    }
    Sphere result;
    if (points.size() == 1) {
        result.center = points[0];
        return result;
    }
    const Miniball mb(points);
    result.center = mb.center();
    // Close any rounding gap so containment holds exactly as evaluated.
    double r2 = std::max(mb.squared_radius(), 0.0);
    for (const Vec3& p : points) {
        r2 = std::max(r2, length_squared(p - result.center));
    }
    result.radius = std::sqrt(r2);
    return result;
}

PreparedNodeVolume::PreparedNodeVolume(const Sphere& node_sphere, const Cone& node_cone)
    : apex_(node_sphere.center),
      axis_(normalize(node_cone.axis)),
      sphere_radius_(node_sphere.radius)
{
    // Tiny angular pad absorbs rounding in the cone construction.
    const double half = node_cone.half_angle + 1e-9;
    everything_ = !(half < std::numbers::pi / 2.0);
    if (!everything_) {
        tan_half_ = std::tan(half);
        inv_cos_half_ = 1.0 / std::cos(half);
    }
}

bool PreparedNodeVolume::may_intersect(const Sphere& target) const
{
    if (everything_) {
        return true;
    }
    const double reach = sphere_radius_ + target.radius;
    const Vec3 v = target.center - apex_;
    const double along = dot(v, axis_);
    const double slack = 1e-9 * (std::abs(along) + reach) + 1e-12;
    if (along < -reach - slack) {
        return false;
    }
    const double lateral = length(cross(v, axis_));
    const double bound = std::max(along, 0.0) * tan_half_ + reach * inv_cos_half_ + slack;
    return lateral <= bound;
}

bool PreparedNodeVolume::may_intersect_literal(const Sphere& target) const
{
    if (everything_) {
        return true;
    }
    const Vec3 v = target.center - apex_;
    const double along = dot(v, axis_);
    const double reach = sphere_radius_ + target.radius;
    return along * tan_half_ + reach * inv_cos_half_ >= length(v);
}

bool cone_sphere_test(const Sphere& node_sphere, const Cone& node_cone, const Sphere& target)
{
    return PreparedNodeVolume(node_sphere, node_cone).may_intersect(target);
}

Spherical spherical_from_direction(const Vec3& dir)
{
    Spherical s;
    const double planar = std::sqrt(dir.x * dir.x + dir.y * dir.y);
    s.theta = std::atan2(planar, dir.z);
    s.phi = planar > 0.0 ? std::atan2(dir.y, dir.x) : 0.0;
    return s;
}

Vec3 direction_from_spherical(const Spherical& s)
{
    const double st = std::sin(s.theta);
    return {st * std::cos(s.phi), st * std::sin(s.phi), std::cos(s.theta)};
}

bool ray_hits_sphere(const Ray& ray, const Sphere& sphere)
{
    const Vec3 v = sphere.center - ray.origin;
    const double along = dot(v, ray.direction);
    const double r = sphere.radius * (1.0 + 1e-9) + 1e-12;
    if (along < 0.0) {
        return length_squared(v) <= r * r;
    }
    return length(cross(v, ray.direction)) <= r;
}

} // namespace crsh

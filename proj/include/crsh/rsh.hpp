#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "crsh/geom.hpp"
#include "crsh/parallel.hpp"
#include "crsh/prims.hpp"
#include "crsh/scene.hpp"

namespace crsh {

inline constexpr unsigned kNodeIdBits = 18;
inline constexpr unsigned kTriangleIdBits = 14;
inline constexpr std::size_t kMaxNodesPerLevel = std::size_t{1} << kNodeIdBits;
inline constexpr std::size_t kMaxBatchTriangles = std::size_t{1} << kTriangleIdBits;

/// Bounds a group of rays: every origin lies in `sphere`, every direction in `cone`.
struct RshNode {
    Sphere sphere;
    Cone cone;
};

/// Levels of sphere-cone nodes over a ray array; levels[0] groups `branching`
/// consecutive rays, levels[k] groups `branching` nodes of levels[k-1].
struct Hierarchy {
    std::vector<std::vector<RshNode>> levels;
    unsigned branching = 8;
    std::size_t ray_count = 0;

    bool empty() const { return levels.empty(); }
    std::size_t level_count() const { return levels.size(); }
    /// Index range of the children of `node` at `level` (rays when level == 0).
    std::pair<std::size_t, std::size_t> children(std::size_t level, std::size_t node) const;
};

/// Smallest cone containing `cone` and the unit direction `r`.
Cone cone_grow(const Cone& cone, const Vec3& r);

/// Cone around the normalized sum of both axes, opened to contain both inputs.
Cone cone_union(const Cone& a, const Cone& b);

/// Sphere centered between both centers, radius half the distance plus the larger radius.
Sphere sphere_union(const Sphere& a, const Sphere& b);

/// Builds exactly `levels` levels bottom-up. Level 0 uses incremental
/// cone_grow in member order; upper levels fold cone_union left to right.
Hierarchy build_hierarchy(std::span<const Ray> sorted_rays, unsigned branching, unsigned levels,
                          const Executor& ex = {});

/// (node << 14) | triangle. Throws ConfigLimitError when an id overflows its field.
std::uint32_t pack_hit(std::uint32_t node, std::uint32_t triangle);

struct UnpackedHit {
    std::uint32_t node = 0;
    std::uint32_t triangle = 0;
};

constexpr UnpackedHit unpack_hit(std::uint32_t packed)
{
    return {packed >> kTriangleIdBits, packed & ((1u << kTriangleIdBits) - 1)};
}

/// Tests performed at one stage; intersections == misses + hits.
struct LevelCounters {
    std::uint64_t intersections = 0;
    std::uint64_t misses = 0;
    std::uint64_t hits = 0;

    void record(bool hit)
    {
        ++intersections;
        ++(hit ? hits : misses);
    }
    LevelCounters& operator+=(const LevelCounters& o)
    {
        intersections += o.intersections;
        misses += o.misses;
        hits += o.hits;
        return *this;
    }
    friend bool operator==(const LevelCounters&, const LevelCounters&) = default;
};

struct TraversalCounters {
    /// Top-level node versus whole-mesh bounding sphere tests.
    LevelCounters mesh;
    /// Node versus triangle-sphere tests, indexed by hierarchy level.
    std::vector<LevelCounters> levels;

    TraversalCounters& operator+=(const TraversalCounters& o);
};

/// Contiguous triangles of one mesh inside a batch.
struct MeshRange {
    std::uint32_t mesh_id = 0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    Sphere bound;
};

/// Up to 16384 triangles addressed by a 14-bit local id.
struct TriangleBatch {
    /// Global id of the first triangle.
    std::uint32_t first = 0;
    std::vector<Triangle> triangles;
    std::vector<Sphere> bounds;
    std::vector<MeshRange> meshes;
};

/// Enlargement of triangle bounding spheres.
inline constexpr double kTriangleSphereSlack = 1e-6;

/// Splits the scene's triangles, in scene order, into batches. Throws
/// ConfigLimitError when `batch_size` exceeds 16384.
std::vector<TriangleBatch> make_triangle_batches(const Scene& scene, std::size_t batch_size);

/// Single batch from explicit triangles (ids and mesh ids taken as given).
/// `mesh_bounds` is indexed by mesh id.
TriangleBatch make_triangle_batch(std::span<const Triangle> triangles, std::span<const Sphere> mesh_bounds);

struct TraversalOptions {
    /// Cull whole meshes against top-level nodes first.
    bool mesh_culling = true;
    /// Use the literal |P-H| cone formula (comparison only, not conservative).
    bool literal_cone_test = false;
};

/// Top-down traversal. Returns the packed (level-0 node, local triangle)
/// pairs that survive, sorted by node then triangle. `counters.levels` is
/// resized to the hierarchy depth and accumulated into.
U32Array traverse(const Hierarchy& hierarchy, const TriangleBatch& batch, const TraversalOptions& options,
                  TraversalCounters& counters, const Executor& ex = {});

/// CSV rows "level,nodeId,cx,cy,cz,radius,ax,ay,az,halfAngle".
void dump_hierarchy_csv(std::ostream& out, const Hierarchy& hierarchy);

} // namespace crsh

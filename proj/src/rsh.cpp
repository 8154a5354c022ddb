#include "crsh/rsh.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "crsh/error.hpp"

namespace crsh {

namespace {

constexpr double kAntiparallel = 1e-6;

} // namespace

std::pair<std::size_t, std::size_t> Hierarchy::children(std::size_t level, std::size_t node) const
{
    const std::size_t below = level == 0 ? ray_count : levels[level - 1].size();
    const std::size_t lo = node * branching;
    return {lo, std::min(lo + branching, below)};
}

Cone cone_grow(const Cone& cone, const Vec3& r)
{
    const double phi = cone.half_angle;
    if (phi >= std::numbers::pi) {
        return cone;
    }
    const Vec3& x = cone.axis;
    const double theta = angle_between(x, r);
    if (theta <= phi) {
        return cone;
    }
    if (std::numbers::pi - theta < kAntiparallel || phi + theta >= std::numbers::pi) {
        return Cone::full();
    }
    // q: unit component of r orthogonal to the axis; -e: the old boundary
    // direction farthest from r. The new axis bisects -e and r.
    const Vec3 q = normalize(r - x * dot(x, r));
    const Vec3 e = -x * std::cos(phi) + q * std::sin(phi);
    Cone out;
    out.axis = normalize(-e + r);
    out.half_angle = std::max(angle_between(out.axis, r), angle_between(out.axis, x) + phi);
    return out;
}

Cone cone_union(const Cone& a, const Cone& b)
{
    if (a.half_angle >= std::numbers::pi || b.half_angle >= std::numbers::pi) {
        return Cone::full();
    }
    const double between = angle_between(a.axis, b.axis);
    if (std::numbers::pi - between < kAntiparallel) {
        return Cone::full();
    }
    Cone out;
    out.axis = between == 0.0 ? a.axis : normalize(a.axis + b.axis);
    out.half_angle = std::min(std::numbers::pi, between / 2.0 + std::max(a.half_angle, b.half_angle));
    return out;
}

Sphere sphere_union(const Sphere& a, const Sphere& b)
{
    return {(a.center + b.center) / 2.0, distance(a.center, b.center) / 2.0 + std::max(a.radius, b.radius)};
}

Hierarchy build_hierarchy(std::span<const Ray> sorted_rays, unsigned branching, unsigned levels,
                          const Executor& ex)
{
    if (branching < 2) {
        throw InvalidArgument("build_hierarchy: branching must be at least 2");
    }
    if (levels < 1) {
        throw InvalidArgument("build_hierarchy: at least one level is required");
    }
    Hierarchy h;
    h.branching = branching;
    h.ray_count = sorted_rays.size();
    if (sorted_rays.empty()) {
        return h;
    }

    h.levels.resize(levels);
    auto& leaves = h.levels[0];
    leaves.resize((sorted_rays.size() + branching - 1) / branching);
    parallel_for(ex, leaves.size(), [&](std::size_t g) {
        const auto [lo, hi] = h.children(0, g);
        RshNode node{{sorted_rays[lo].origin, 0.0}, {sorted_rays[lo].direction, 0.0}};
        for (std::size_t i = lo + 1; i < hi; ++i) {
            node.sphere = sphere_union(node.sphere, {sorted_rays[i].origin, 0.0});
            node.cone = cone_grow(node.cone, sorted_rays[i].direction);
        }
        leaves[g] = node;
    }, 256);

    for (unsigned k = 1; k < levels; ++k) {
        const auto& below = h.levels[k - 1];
        auto& level = h.levels[k];
        level.resize((below.size() + branching - 1) / branching);
        parallel_for(ex, level.size(), [&](std::size_t g) {
            const auto [lo, hi] = h.children(k, g);
            RshNode node = below[lo];
            for (std::size_t i = lo + 1; i < hi; ++i) {
                node.sphere = sphere_union(node.sphere, below[i].sphere);
                node.cone = cone_union(node.cone, below[i].cone);
            }
            level[g] = node;
        }, 256);
    }
    return h;
}

std::uint32_t pack_hit(std::uint32_t node, std::uint32_t triangle)
{
    if (node >= kMaxNodesPerLevel) {
        throw ConfigLimitError("node id " + std::to_string(node) + " does not fit 18 bits; "
                               "reduce the ray batch or add hierarchy levels");
    }
    if (triangle >= kMaxBatchTriangles) {
        throw ConfigLimitError("triangle id " + std::to_string(triangle) + " does not fit 14 bits; "
                               "process the geometry in triangle batches of at most 16384");
    }
    return (node << kTriangleIdBits) | triangle;
}

TraversalCounters& TraversalCounters::operator+=(const TraversalCounters& o)
{
    mesh += o.mesh;
    if (levels.size() < o.levels.size()) {
        levels.resize(o.levels.size());
    }
    for (std::size_t k = 0; k < o.levels.size(); ++k) {
        levels[k] += o.levels[k];
    }
    return *this;
}

TriangleBatch make_triangle_batch(std::span<const Triangle> triangles, std::span<const Sphere> mesh_bounds)
{
    if (triangles.size() > kMaxBatchTriangles) {
        throw ConfigLimitError("triangle batch of " + std::to_string(triangles.size()) +
                               " exceeds 16384 triangles; subdivide into triangle batches");
    }
    TriangleBatch batch;
    batch.first = triangles.empty() ? 0 : triangles.front().id;
    batch.triangles.assign(triangles.begin(), triangles.end());
    batch.bounds.reserve(triangles.size());
    for (const Triangle& t : triangles) {
        batch.bounds.push_back(triangle_bounding_sphere(t, kTriangleSphereSlack));
    }
    for (std::uint32_t i = 0; i < triangles.size();) {
        const std::uint32_t mesh = triangles[i].mesh_id;
        std::uint32_t j = i;
        while (j < triangles.size() && triangles[j].mesh_id == mesh) {
            ++j;
        }
        if (mesh >= mesh_bounds.size()) {
            throw InvalidArgument("make_triangle_batch: triangle references unknown mesh " + std::to_string(mesh));
        }
        batch.meshes.push_back({mesh, i, j, mesh_bounds[mesh]});
        i = j;
    }
    return batch;
}

std::vector<TriangleBatch> make_triangle_batches(const Scene& scene, std::size_t batch_size)
{
    if (batch_size == 0 || batch_size > kMaxBatchTriangles) {
        throw ConfigLimitError("triangle batch size " + std::to_string(batch_size) +
                               " outside [1, 16384]; hit pairs store 14-bit triangle ids");
    }
    const std::vector<Triangle> all = scene.flattened_triangles();
    std::vector<Sphere> mesh_bounds;
    for (const Mesh& m : scene.meshes) {
        mesh_bounds.push_back(m.bound);
    }
    std::vector<TriangleBatch> batches;
    for (std::size_t lo = 0; lo < all.size(); lo += batch_size) {
        const std::size_t hi = std::min(all.size(), lo + batch_size);
        batches.push_back(make_triangle_batch(std::span(all).subspan(lo, hi - lo), mesh_bounds));
    }
    return batches;
}

namespace {

struct NodeTester {
    std::vector<PreparedNodeVolume> volumes;
    bool literal = false;

    NodeTester(const std::vector<RshNode>& nodes, bool literal_test) : literal(literal_test)
    {
        volumes.reserve(nodes.size());
        for (const RshNode& n : nodes) {
            volumes.emplace_back(n.sphere, n.cone);
        }
    }

    bool operator()(std::size_t node, const Sphere& target) const
    {
        return literal ? volumes[node].may_intersect_literal(target) : volumes[node].may_intersect(target);
    }
};

} // namespace

U32Array traverse(const Hierarchy& hierarchy, const TriangleBatch& batch, const TraversalOptions& options,
                  TraversalCounters& counters, const Executor& ex)
{
    if (batch.triangles.size() > kMaxBatchTriangles) {
        throw ConfigLimitError("triangle batch of " + std::to_string(batch.triangles.size()) +
                               " exceeds 16384 triangles; subdivide into triangle batches");
    }
    if (counters.levels.size() < hierarchy.level_count()) {
        counters.levels.resize(hierarchy.level_count());
    }
    if (hierarchy.empty() || batch.triangles.empty()) {
        return {};
    }
    for (const auto& level : hierarchy.levels) {
        if (level.size() > kMaxNodesPerLevel) {
            throw ConfigLimitError("hierarchy level with " + std::to_string(level.size()) +
                                   " nodes overflows the 18-bit node id; split the ray batch");
        }
    }

    const std::size_t top_level = hierarchy.level_count() - 1;
    const auto& top = hierarchy.levels[top_level];

    // Top level: whole-mesh culling, then node versus triangle spheres.
    U32Array pairs;
    {
        const NodeTester test(top, options.literal_cone_test);
        const std::size_t blocks = block_count(ex, top.size(), 16);
        std::vector<U32Array> block_pairs(blocks);
        std::vector<TraversalCounters> block_counters(blocks);
        for_each_block(ex, top.size(), blocks, [&](std::size_t b, std::size_t lo, std::size_t hi) {
            U32Array& out = block_pairs[b];
            LevelCounters& mesh_counts = block_counters[b].mesh;
            LevelCounters level_counts;
            for (std::size_t node = lo; node < hi; ++node) {
                for (const MeshRange& mesh : batch.meshes) {
                    if (options.mesh_culling) {
                        const bool pass = test(node, mesh.bound);
                        mesh_counts.record(pass);
                        if (!pass) {
                            continue;
                        }
                    }
                    for (std::uint32_t t = mesh.begin; t < mesh.end; ++t) {
                        const bool pass = test(node, batch.bounds[t]);
                        level_counts.record(pass);
                        if (pass) {
                            out.push_back(pack_hit(static_cast<std::uint32_t>(node), t));
                        }
                    }
                }
            }
            block_counters[b].levels.assign(1, level_counts);
        });
        std::size_t total = 0;
        for (const auto& p : block_pairs) {
            total += p.size();
        }
        pairs.reserve(total);
        for (std::size_t b = 0; b < blocks; ++b) {
            pairs.insert(pairs.end(), block_pairs[b].begin(), block_pairs[b].end());
            counters.mesh += block_counters[b].mesh;
            counters.levels[top_level] += block_counters[b].levels[0];
        }
    }

    // Lower levels: expand each surviving pair to the node's children, retest,
    // then trim the misses. Pairs stay sorted by (node, triangle).
    for (std::size_t level = top_level; level-- > 0;) {
        const NodeTester test(hierarchy.levels[level], options.literal_cone_test);

        // Runs of pairs sharing a parent node.
        std::vector<std::uint32_t> run_start;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (i == 0 || unpack_hit(pairs[i]).node != unpack_hit(pairs[i - 1]).node) {
                run_start.push_back(static_cast<std::uint32_t>(i));
            }
        }
        const std::size_t runs = run_start.size();
        run_start.push_back(static_cast<std::uint32_t>(pairs.size()));
        U32Array run_slots(runs);
        for (std::size_t r = 0; r < runs; ++r) {
            const auto [lo, hi] = hierarchy.children(level + 1, unpack_hit(pairs[run_start[r]]).node);
            run_slots[r] = static_cast<std::uint32_t>((hi - lo) * (run_start[r + 1] - run_start[r]));
        }
        const U32Array run_offset = exclusive_scan(run_slots, ex);
        const std::size_t expanded = runs == 0 ? 0 : run_offset.back() + run_slots.back();

        U32Array candidates(expanded);
        U32Array empty(expanded);
        const std::size_t blocks = block_count(ex, runs, 64);
        std::vector<LevelCounters> block_counts(blocks);
        for_each_block(ex, runs, blocks, [&](std::size_t b, std::size_t lo_run, std::size_t hi_run) {
            LevelCounters& counts = block_counts[b];
            for (std::size_t r = lo_run; r < hi_run; ++r) {
                const std::uint32_t parent = unpack_hit(pairs[run_start[r]]).node;
                const auto [c_lo, c_hi] = hierarchy.children(level + 1, parent);
                std::size_t slot = run_offset[r];
                for (std::size_t child = c_lo; child < c_hi; ++child) {
                    for (std::size_t i = run_start[r]; i < run_start[r + 1]; ++i, ++slot) {
                        const std::uint32_t tri = unpack_hit(pairs[i]).triangle;
                        const bool pass = test(child, batch.bounds[tri]);
                        counts.record(pass);
                        candidates[slot] = pack_hit(static_cast<std::uint32_t>(child), tri);
                        empty[slot] = pass ? 0u : 1u;
                    }
                }
            }
        });
        for (const LevelCounters& c : block_counts) {
            counters.levels[level] += c;
        }
        pairs = trim_compact(empty, candidates, ex);
    }
    return pairs;
}

void dump_hierarchy_csv(std::ostream& out, const Hierarchy& hierarchy)
{
    out << "level,nodeId,cx,cy,cz,radius,ax,ay,az,halfAngle\n";
    for (std::size_t level = 0; level < hierarchy.level_count(); ++level) {
        const auto& nodes = hierarchy.levels[level];
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const RshNode& n = nodes[i];
            out << level << ',' << i << ',' << n.sphere.center.x << ',' << n.sphere.center.y << ','
                << n.sphere.center.z << ',' << n.sphere.radius << ',' << n.cone.axis.x << ',' << n.cone.axis.y
                << ',' << n.cone.axis.z << ',' << n.cone.half_angle << '\n';
        }
    }
}

} // namespace crsh

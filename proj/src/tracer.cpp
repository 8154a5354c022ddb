#include "crsh/tracer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "crsh/error.hpp"
#include "crsh/gbuffer.hpp"

namespace crsh {

const char* to_string(Engine engine)
{
    switch (engine) {
    case Engine::Brute: return "brute";
    case Engine::Rah: return "rah";
    case Engine::Crsh: return "crsh";
    }
    return "unknown";
}

Engine parse_engine(std::string_view text)
{
    if (text == "brute") {
        return Engine::Brute;
    }
    if (text == "rah") {
        return Engine::Rah;
    }
    if (text == "crsh") {
        return Engine::Crsh;
    }
    throw InvalidArgument("unknown engine '" + std::string(text) + "' (expected brute, rah or crsh)");
}

namespace {

void fold_hit(RayHitRecord& record, const Ray& ray, const Triangle& tri, const TriangleHit& hit)
{
    if (ray.kind == RayKind::Shadow) {
        if (!record.occluded && hit.t < ray.max_t - kRayEpsilon) {
            record.occluded = true;
            record.t = hit.t;
            record.triangle = tri.id;
        }
        return;
    }
    if (hit.t < record.t || (hit.t == record.t && tri.id < record.triangle)) {
        record.t = hit.t;
        record.triangle = tri.id;
    }
}

} // namespace

bool update_hit(RayHitRecord& record, const Ray& ray, const Triangle& tri, LevelCounters& counters)
{
    if (ray.kind == RayKind::Shadow && record.occluded) {
        return false;
    }
    const auto hit = ray_triangle_intersect(ray, tri);
    counters.record(hit.has_value());
    if (hit) {
        fold_hit(record, ray, tri, *hit);
    }
    return true;
}

void final_intersections(std::span<const std::uint32_t> pairs, const Hierarchy& hierarchy,
                         std::span<const Ray> rays, const TriangleBatch& batch,
                         std::span<RayHitRecord> records, LevelCounters& counters, const Executor& ex)
{
    if (pairs.empty()) {
        return;
    }
    // Pairs are sorted by node; each run of one node owns a disjoint ray range.
    std::vector<std::size_t> run_start;
    run_start.push_back(0);
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        if (unpack_hit(pairs[i]).node != unpack_hit(pairs[i - 1]).node) {
            run_start.push_back(i);
        }
    }
    run_start.push_back(pairs.size());
    const std::size_t runs = run_start.size() - 1;

    const std::size_t blocks = block_count(ex, runs, 64);
    std::vector<LevelCounters> partial(blocks);
    for_each_block(ex, runs, blocks, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        LevelCounters local;
        for (std::size_t r = lo; r < hi; ++r) {
            const std::uint32_t node = unpack_hit(pairs[run_start[r]]).node;
            const auto [first, last] = hierarchy.children(0, node);
            for (std::size_t ray = first; ray < last; ++ray) {
                for (std::size_t p = run_start[r]; p < run_start[r + 1]; ++p) {
                    const Triangle& tri = batch.triangles[unpack_hit(pairs[p]).triangle];
                    update_hit(records[ray], rays[ray], tri, local);
                }
            }
        }
        partial[b] = local;
    });
    for (const LevelCounters& c : partial) {
        counters += c;
    }
}

void brute_force_intersections(std::span<const Ray> rays, const TriangleBatch& batch,
                               std::span<RayHitRecord> records, LevelCounters& counters, const Executor& ex)
{
    const std::size_t blocks = block_count(ex, rays.size(), 256);
    std::vector<LevelCounters> partial(blocks);
    for_each_block(ex, rays.size(), blocks, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        LevelCounters local;
        for (std::size_t i = lo; i < hi; ++i) {
            for (const Triangle& tri : batch.triangles) {
                const auto hit = ray_triangle_intersect(rays[i], tri);
                local.record(hit.has_value());
                if (hit) {
                    fold_hit(records[i], rays[i], tri, *hit);
                }
            }
        }
        partial[b] = local;
    });
    for (const LevelCounters& c : partial) {
        counters += c;
    }
}

std::vector<SurfacePoint> shade_and_spawn(std::span<const SurfacePoint> surfaces, const TracedRays& shadow,
                                          const TracedRays* reflection, const TracedRays* refraction,
                                          const Scene& scene, std::span<const Triangle> triangles,
                                          FrameImage& image)
{
    const std::size_t lights = scene.lights.size();
    for (std::size_t s = 0; s < surfaces.size(); ++s) {
        const SurfacePoint& sp = surfaces[s];
        if (!sp.valid) {
            continue;
        }
        const Material& mat = scene.materials[sp.material_id];
        Rgb local;
        for (std::size_t l = 0; l < lights; ++l) {
            if (shadow.per_slot[l * surfaces.size() + s].occluded) {
                continue;
            }
            const LightSource& light = scene.lights[l];
            const Vec3 to_light = normalize(light.position - sp.position);
            const double n_dot_l = dot(sp.normal, to_light);
            if (!(n_dot_l > 0.0)) {
                continue;
            }
            const Vec3 half = normalize(to_light - sp.incoming);
            const double spec = std::pow(std::max(dot(sp.normal, half), 0.0), mat.shininess);
            local += light.intensity * (mat.diffuse * n_dot_l + mat.specular * spec);
        }
        image.radiance[sp.pixel] += sp.throughput * local;
    }

    std::vector<SurfacePoint> next;
    const auto spawn = [&](const TracedRays* traced) {
        if (traced == nullptr) {
            return;
        }
        for (std::size_t slot = 0; slot < traced->per_slot.size(); ++slot) {
            const RayHitRecord& rec = traced->per_slot[slot];
            if (traced->generated.empty_flags[slot] != 0 || !rec.hit()) {
                continue;
            }
            const Ray& ray = traced->generated.rays[slot];
            const Triangle& tri = triangles[rec.triangle];
            const Vec3 n = tri.geometric_normal();
            SurfacePoint sp;
            sp.valid = true;
            sp.pixel = ray.pixel;
            sp.position = ray.origin + ray.direction * rec.t;
            sp.backface = dot(n, ray.direction) > 0.0;
            sp.normal = sp.backface ? -n : n;
            sp.incoming = ray.direction;
            sp.material_id = scene.meshes[tri.mesh_id].material_id;
            sp.throughput = ray.throughput;
            next.push_back(sp);
        }
    };
    spawn(reflection);
    spawn(refraction);
    return next;
}

HashLayout effective_layout(const Scene& scene, const RenderOptions& options)
{
    if (options.layout) {
        return *options.layout;
    }
    return scene.settings.hash_layout.empty() ? HashLayout{} : HashLayout::parse(scene.settings.hash_layout);
}

void validate_render_config(const Scene& scene, const RenderOptions& options)
{
    const RenderSettings& s = scene.settings;
    const HashLayout layout = effective_layout(scene, options);
    layout.validate();
    if (scene.lights.size() > kMaxLights) {
        throw ConfigLimitError("scene has " + std::to_string(scene.lights.size()) + " lights; at most 16 are supported");
    }
    if (scene.lights.size() > (std::size_t{1} << layout.light_bits)) {
        throw ConfigLimitError("hash layout has " + std::to_string(layout.light_bits) +
                               " light bits, too few for " + std::to_string(scene.lights.size()) + " lights");
    }
    if (s.branching < 2) {
        throw ConfigLimitError("branching factor must be at least 2");
    }
    if (s.hierarchy_levels < 1) {
        throw ConfigLimitError("hierarchy needs at least one level");
    }
    if (s.bounce_depth < 0) {
        throw ConfigLimitError("bounce depth must be non-negative");
    }
    if (s.triangle_batch_size < 1 || static_cast<std::size_t>(s.triangle_batch_size) > kMaxBatchTriangles) {
        throw ConfigLimitError("triangle batch of " + std::to_string(s.triangle_batch_size) +
                               " exceeds 16384 triangles; subdivide into triangle batches");
    }
    if (scene.camera.width < 1 || scene.camera.height < 1) {
        throw ConfigLimitError("image dimensions must be positive");
    }
    const std::uint64_t pixels = static_cast<std::uint64_t>(scene.camera.width) * scene.camera.height;
    if (pixels * std::max<std::size_t>(scene.lights.size(), 1) >= (std::uint64_t{1} << 32)) {
        throw ConfigLimitError("frame too large: ray slots must fit 32-bit indices");
    }
    if (scene.triangle_count() >= kNoTriangle) {
        throw ConfigLimitError("scene has too many triangles for 32-bit triangle ids");
    }
}

namespace {

class StageClock {
public:
    StageClock(StatsReport& stats, const char* stage) : stats_(stats), stage_(stage) {}
    ~StageClock()
    {
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
        stats_.per_stage_millis[stage_] += ms;
    }

private:
    StatsReport& stats_;
    const char* stage_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool logging_enabled()
{
    const char* v = std::getenv("CRSH_LOG");
    return v != nullptr && *v != '\0' && std::string_view(v) != "0";
}

class FrameTracer {
public:
    FrameTracer(const Scene& scene, const RenderOptions& options, StatsReport& stats)
        : scene_(scene), options_(options), stats_(stats), log_(logging_enabled())
    {
        batches_ = make_triangle_batches(scene, static_cast<std::size_t>(scene.settings.triangle_batch_size));
        triangles_ = scene.triangle_count();
        if (options.engine != Engine::Brute) {
            stats_.per_level.resize(static_cast<std::size_t>(scene.settings.hierarchy_levels));
        }
    }

    TracedRays trace(GeneratedRays generated)
    {
        const Executor& ex = options_.executor;
        TracedRays out;
        out.per_slot.resize(generated.rays.size());
        for (std::size_t i = 0; i < out.per_slot.size(); ++i) {
            out.per_slot[i].ray_index = static_cast<std::uint32_t>(i);
        }

        RayBatch batch;
        {
            StageClock clock(stats_, "ray_creation");
            batch = trim_rays(generated, ex);
        }
        const std::string kind = to_string(generated.kind);
        const std::uint64_t count = batch.count();
        stats_.ray_counts[kind] += count;
        stats_.brute_force_equivalent += count * triangles_;
        const std::uint64_t tests_before = stats_.total_tests();
        ++batch_index_;
        if (count > 0) {
            std::vector<Ray> rays = order_rays(batch, kind);
            std::vector<RayHitRecord> records(rays.size());
            intersect(rays, records, kind);
            for (std::size_t i = 0; i < rays.size(); ++i) {
                RayHitRecord rec = records[i];
                rec.ray_index = rays[i].slot;
                out.per_slot[rays[i].slot] = rec;
            }
        }
        if (log_) {
            std::cerr << "crsh: " << to_string(options_.engine) << " batch " << batch_index_ << ' ' << kind << ": "
                      << count << " rays, " << (stats_.total_tests() - tests_before) << " tests\n";
        }
        out.generated = std::move(generated);
        return out;
    }

private:
    std::filesystem::path debug_path(const std::string& kind, const char* what) const
    {
        return options_.debug_dir / ("batch" + std::to_string(batch_index_) + "_" + kind + "_" + what + ".csv");
    }

    std::vector<Ray> order_rays(RayBatch& batch, const std::string& kind)
    {
        const Executor& ex = options_.executor;
        if (options_.engine != Engine::Crsh) {
            return std::move(batch.rays);
        }
        Chunks chunks;
        {
            StageClock clock(stats_, "ray_compression");
            chunks = compress_chunks(batch.keys, ex);
        }
        Chunks sorted;
        {
            StageClock clock(stats_, "ray_sorting");
            sorted = sort_chunks(chunks, ex);
        }
        std::pair<U32Array, U32Array> kv;
        std::vector<Ray> rays;
        {
            StageClock clock(stats_, "ray_decompression");
            kv = decompress_chunks(sorted, batch.values, ex);
            rays = reorder_rays(batch.rays, kv.second, ex);
        }
        if (!options_.debug_dir.empty()) {
            std::ofstream out(debug_path(kind, "pairs"));
            out << "stage,index,key,value\n";
            dump_pairs_csv(out, "generated", batch.keys, batch.values);
            dump_pairs_csv(out, "compressed", chunks.keys, chunks.base);
            dump_pairs_csv(out, "sorted", sorted.keys, sorted.base);
            dump_pairs_csv(out, "decompressed", kv.first, kv.second);
        }
        return rays;
    }

    void intersect(std::span<const Ray> rays, std::span<RayHitRecord> records, const std::string& kind)
    {
        const Executor& ex = options_.executor;
        if (options_.engine == Engine::Brute) {
            StageClock clock(stats_, "final_intersection_tests");
            for (const TriangleBatch& tb : batches_) {
                brute_force_intersections(rays, tb, records, stats_.final_tests, ex);
            }
            return;
        }
        const auto branching = static_cast<unsigned>(scene_.settings.branching);
        const auto levels = static_cast<unsigned>(scene_.settings.hierarchy_levels);
        TraversalOptions topts;
        topts.mesh_culling = options_.engine == Engine::Crsh;
        topts.literal_cone_test = options_.literal_cone_test;

        // Level-0 node ids are 18 bits wide, so very large batches get one hierarchy per slice.
        const std::size_t slice = kMaxNodesPerLevel * branching;
        for (std::size_t lo = 0; lo < rays.size(); lo += slice) {
            const std::size_t n = std::min(slice, rays.size() - lo);
            const auto sub_rays = rays.subspan(lo, n);
            const auto sub_records = records.subspan(lo, n);
            Hierarchy hierarchy;
            {
                StageClock clock(stats_, "hierarchy_creation");
                hierarchy = build_hierarchy(sub_rays, branching, levels, ex);
            }
            if (!options_.debug_dir.empty()) {
                std::ofstream out(debug_path(kind, ("hierarchy" + std::to_string(lo / slice)).c_str()));
                dump_hierarchy_csv(out, hierarchy);
            }
            for (const TriangleBatch& tb : batches_) {
                TraversalCounters counters;
                U32Array pairs;
                {
                    StageClock clock(stats_, "hierarchy_traversal");
                    pairs = traverse(hierarchy, tb, topts, counters, ex);
                }
                stats_.mesh += counters.mesh;
                for (std::size_t k = 0; k < counters.levels.size(); ++k) {
                    stats_.per_level[k] += counters.levels[k];
                }
                StageClock clock(stats_, "final_intersection_tests");
                final_intersections(pairs, hierarchy, sub_rays, tb, sub_records, stats_.final_tests, ex);
            }
        }
    }

    const Scene& scene_;
    const RenderOptions& options_;
    StatsReport& stats_;
    bool log_;
    std::vector<TriangleBatch> batches_;
    std::uint64_t triangles_ = 0;
    std::size_t batch_index_ = 0;
};

} // namespace

RenderResult render(const Scene& scene, const RenderOptions& options)
{
    validate_render_config(scene, options);
    const Executor& ex = options.executor;
    const bool log = logging_enabled();
    const HashLayout layout = effective_layout(scene, options);

    RenderResult result;
    StatsReport& stats = result.stats;
    stats.engine = to_string(options.engine);
    stats.width = scene.camera.width;
    stats.height = scene.camera.height;
    stats.triangles = scene.triangle_count();
    for (RayKind kind : {RayKind::Shadow, RayKind::Reflection, RayKind::Refraction}) {
        stats.ray_counts[to_string(kind)] = 0;
    }
    result.image = FrameImage(scene.camera.width, scene.camera.height);

    GBuffer gbuffer;
    {
        StageClock clock(stats, "primary_pass");
        gbuffer = render_gbuffer(scene, scene.camera, ex);
    }
    if (!options.debug_dir.empty()) {
        std::filesystem::create_directories(options.debug_dir);
        dump_gbuffer(gbuffer, options.debug_dir / "gbuffer");
    }

    FrameTracer tracer(scene, options, stats);
    const std::vector<Triangle> triangles = scene.flattened_triangles();
    const Aabb box = scene.bounds();
    std::vector<SurfacePoint> surfaces = surfaces_from_gbuffer(gbuffer);
    const int depth_limit = scene.settings.bounce_depth;

    for (int depth = 0; depth <= depth_limit && !surfaces.empty(); ++depth) {
        const auto generate = [&](RayKind kind) {
            StageClock clock(stats, "ray_creation");
            return generate_secondary_rays(surfaces, scene, kind, layout, box, ex);
        };
        const TracedRays shadow = tracer.trace(generate(RayKind::Shadow));
        TracedRays reflection;
        TracedRays refraction;
        const bool spawn = depth < depth_limit;
        if (spawn) {
            reflection = tracer.trace(generate(RayKind::Reflection));
            refraction = tracer.trace(generate(RayKind::Refraction));
        }
        StageClock clock(stats, "shading");
        surfaces = shade_and_spawn(surfaces, shadow, spawn ? &reflection : nullptr, spawn ? &refraction : nullptr,
                                   scene, triangles, result.image);
        if (log) {
            std::cerr << "crsh: depth " << depth << " done, " << surfaces.size() << " surfaces spawned\n";
        }
    }
    if (log) {
        for (const auto& [stage, ms] : stats.per_stage_millis) {
            std::cerr << "crsh: stage " << stage << ' ' << ms << " ms\n";
        }
    }
    return result;
}

} // namespace crsh

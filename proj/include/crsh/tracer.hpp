#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "crsh/image.hpp"
#include "crsh/ray_pipeline.hpp"
#include "crsh/rsh.hpp"
#include "crsh/scene.hpp"
#include "crsh/stats.hpp"

namespace crsh {

enum class Engine { Brute, Rah, Crsh };

const char* to_string(Engine engine);
/// Throws InvalidArgument for anything but brute, rah or crsh.
Engine parse_engine(std::string_view text);

inline constexpr std::uint32_t kNoTriangle = std::numeric_limits<std::uint32_t>::max();

/// Nearest accepted intersection of one ray.
struct RayHitRecord {
    std::uint32_t ray_index = 0;
    double t = kInfinity;
    /// Global triangle id, kNoTriangle when nothing was hit.
    std::uint32_t triangle = kNoTriangle;
    /// Shadow rays: some hit lies strictly between the light and the shaded point.
    bool occluded = false;

    bool hit() const { return triangle != kNoTriangle; }
};

/// Folds one ray-triangle candidate into `record`. Shadow rays stop at the
/// first occluder; other rays keep the smallest (t, triangle id).
/// Returns whether a test was performed.
bool update_hit(RayHitRecord& record, const Ray& ray, const Triangle& tri, LevelCounters& counters);

/// Tests every ray of each surviving level-0 node against the node's
/// candidate triangle. `records` is indexed like `rays`.
void final_intersections(std::span<const std::uint32_t> pairs, const Hierarchy& hierarchy,
                         std::span<const Ray> rays, const TriangleBatch& batch,
                         std::span<RayHitRecord> records, LevelCounters& counters, const Executor& ex = {});

/// Every ray against every triangle of the batch, without early exits.
void brute_force_intersections(std::span<const Ray> rays, const TriangleBatch& batch,
                               std::span<RayHitRecord> records, LevelCounters& counters,
                               const Executor& ex = {});

/// Traced rays with one hit record per generation slot.
struct TracedRays {
    GeneratedRays generated;
    std::vector<RayHitRecord> per_slot;
};

/// Adds the direct Blinn-Phong term of every surface into `image` and turns
/// reflection and refraction hits into the next bounce's surfaces
/// (reflection hits first, each in slot order).
std::vector<SurfacePoint> shade_and_spawn(std::span<const SurfacePoint> surfaces, const TracedRays& shadow,
                                          const TracedRays* reflection, const TracedRays* refraction,
                                          const Scene& scene, std::span<const Triangle> triangles,
                                          FrameImage& image);

struct RenderOptions {
    Engine engine = Engine::Crsh;
    /// Overrides the scene's hash layout when set.
    std::optional<HashLayout> layout;
    Executor executor;
    /// Literal |P-H| cone formula; may cull true hits, comparison only.
    bool literal_cone_test = false;
    /// When set, pipeline pairs, hierarchies and G-buffer images are written here.
    std::filesystem::path debug_dir;
};

struct RenderResult {
    FrameImage image;
    StatsReport stats;
};

/// The options' layout, else the scene's, else the default.
HashLayout effective_layout(const Scene& scene, const RenderOptions& options);

/// Throws ConfigLimitError when the settings exceed an encoding limit.
void validate_render_config(const Scene& scene, const RenderOptions& options);

/// One frame: primary pass, then for every bounce shadow rays followed by
/// reflection and refraction rays, each batch traced by the selected engine.
RenderResult render(const Scene& scene, const RenderOptions& options = {});

} // namespace crsh

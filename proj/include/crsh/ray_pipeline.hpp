#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crsh/gbuffer.hpp"
#include "crsh/prims.hpp"
#include "crsh/scene.hpp"

namespace crsh {

/// A shading point secondary rays are spawned from: a G-buffer pixel on the
/// first bounce, a traced hit afterwards.
struct SurfacePoint {
    bool valid = false;
    std::uint32_t pixel = 0;
    Vec3 position;
    /// Unit normal facing the incoming ray.
    Vec3 normal;
    /// True when `normal` is the flipped geometric normal (ray arrived from behind).
    bool backface = false;
    Vec3 incoming;
    std::uint32_t material_id = 0;
    Rgb throughput{1.0, 1.0, 1.0};
};

std::vector<SurfacePoint> surfaces_from_gbuffer(const GBuffer& gbuffer);

/// Mirror direction of `incoming` about `normal`.
Vec3 reflect(const Vec3& incoming, const Vec3& normal);

/// Snell refraction of `incoming` through a surface whose `normal` faces the
/// incoming ray, with relative index `eta` = n_from / n_to. Empty on total
/// internal reflection.
std::optional<Vec3> refract(const Vec3& incoming, const Vec3& normal, double eta);

/// Bit allocation of the two 32-bit ray hashes. Shadow keys are
/// [light | theta | phi]; reflection/refraction keys are
/// [x | y | z | theta | phi], high bits first.
struct HashLayout {
    int light_bits = 4;
    int theta_bits = 14;
    int phi_bits = 14;
    int origin_bits = 5;
    int bounce_theta_bits = 8;
    int bounce_phi_bits = 9;

    /// Throws ConfigLimitError when a layout exceeds 32 bits or has an empty field.
    void validate() const;

    /// "light,theta,phi,origin,btheta,bphi", e.g. "4,14,14,5,8,9".
    static HashLayout parse(std::string_view text);
    std::string to_string() const;
};

/// Throws ConfigLimitError when `light` does not fit the light field.
std::uint32_t hash_shadow_ray(std::uint32_t light, const Vec3& direction, const HashLayout& layout = {});

/// Origins outside `scene_box` are clamped; an axis with zero extent quantizes to 0.
std::uint32_t hash_bounce_ray(const Vec3& origin, const Vec3& direction, const Aabb& scene_box,
                              const HashLayout& layout = {});

/// Output of ray generation: one slot per (surface) or (surface, light).
/// Slots without a ray carry empty_flags = 1.
struct GeneratedRays {
    RayKind kind = RayKind::Shadow;
    std::vector<Ray> rays;
    U32Array keys;
    U32Array empty_flags;
};

/// Shadow slots are laid out light-major: slot = light * surfaces + surface.
GeneratedRays generate_secondary_rays(std::span<const SurfacePoint> surfaces, const Scene& scene,
                                      RayKind kind, const HashLayout& layout, const Aabb& scene_box,
                                      const Executor& ex = {});

GeneratedRays generate_secondary_rays(const GBuffer& gbuffer, const Scene& scene, RayKind kind,
                                      const HashLayout& layout = {}, const Executor& ex = {});

/// Trimmed rays with their keys; values index `rays`.
struct RayBatch {
    RayKind kind = RayKind::Shadow;
    std::vector<Ray> rays;
    U32Array keys;
    U32Array values;

    std::size_t count() const { return rays.size(); }
};

/// Drops empty slots (trim_compact) and gathers the surviving rays.
RayBatch trim_rays(const GeneratedRays& generated, const Executor& ex = {});

/// Runs of equal keys.
struct Chunks {
    U32Array keys;
    U32Array base;
    U32Array size;

    std::size_t count() const { return keys.size(); }
};

Chunks compress_chunks(std::span<const std::uint32_t> keys, const Executor& ex = {});

/// Chunks stably radix-sorted by key.
Chunks sort_chunks(const Chunks& chunks, const Executor& ex = {});

/// Expands sorted chunks: each writes its key `size` times and the values
/// original_values[base .. base+size).
std::pair<U32Array, U32Array> decompress_chunks(const Chunks& sorted,
                                                std::span<const std::uint32_t> original_values,
                                                const Executor& ex = {});

/// sort_chunks followed by decompress_chunks. Equivalent to a stable sort of
/// the original (key, value) pairs.
std::pair<U32Array, U32Array> sort_and_decompress(const Chunks& chunks,
                                                  std::span<const std::uint32_t> original_values,
                                                  const Executor& ex = {});

/// out[i] = rays[sorted_values[i]].
std::vector<Ray> reorder_rays(std::span<const Ray> rays, std::span<const std::uint32_t> sorted_values,
                              const Executor& ex = {});

/// CSV rows "stage,index,key,value".
void dump_pairs_csv(std::ostream& out, std::string_view stage, std::span<const std::uint32_t> keys,
                    std::span<const std::uint32_t> values);

} // namespace crsh

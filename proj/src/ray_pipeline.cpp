#include "crsh/ray_pipeline.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "crsh/error.hpp"

namespace crsh {

std::vector<SurfacePoint> surfaces_from_gbuffer(const GBuffer& gbuffer)
{
    std::vector<SurfacePoint> out(gbuffer.pixels.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const GBufferPixel& px = gbuffer.pixels[i];
        SurfacePoint& s = out[i];
        s.pixel = static_cast<std::uint32_t>(i);
        if (!px.valid) {
            continue;
        }
        s.valid = true;
        s.position = px.position;
        s.normal = px.normal;
        s.backface = px.backface;
        s.incoming = px.view;
        s.material_id = px.material_id;
    }
    return out;
}

Vec3 reflect(const Vec3& incoming, const Vec3& normal)
{
    return normalize(incoming - normal * (2.0 * dot(incoming, normal)));
}

std::optional<Vec3> refract(const Vec3& incoming, const Vec3& normal, double eta)
{
    const double cos_i = -dot(incoming, normal);
    const double k = 1.0 - eta * eta * (1.0 - cos_i * cos_i);
    if (k < 0.0) {
        return std::nullopt;
    }
    return normalize(incoming * eta + normal * (eta * cos_i - std::sqrt(k)));
}

void HashLayout::validate() const
{
    const bool fields_ok = light_bits >= 0 && theta_bits >= 1 && phi_bits >= 1 && origin_bits >= 0 &&
                           bounce_theta_bits >= 1 && bounce_phi_bits >= 1;
    if (!fields_ok) {
        throw ConfigLimitError("hash layout " + to_string() + " has an empty field");
    }
    if (light_bits + theta_bits + phi_bits > 32) {
        throw ConfigLimitError("shadow hash layout " + to_string() + " exceeds 32 bits");
    }
    if (3 * origin_bits + bounce_theta_bits + bounce_phi_bits > 32) {
        throw ConfigLimitError("bounce hash layout " + to_string() + " exceeds 32 bits");
    }
}

HashLayout HashLayout::parse(std::string_view text)
{
    std::vector<int> fields;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view part = text.substr(0, comma);
        int value = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc{} || ptr != part.data() + part.size()) {
            throw InvalidArgument("bad hash layout field '" + std::string(part) + "'");
        }
        fields.push_back(value);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    }
    if (fields.size() != 6) {
        throw InvalidArgument("hash layout needs 6 comma-separated fields: light,theta,phi,origin,btheta,bphi");
    }
    HashLayout layout{fields[0], fields[1], fields[2], fields[3], fields[4], fields[5]};
    layout.validate();
    return layout;
}

std::string HashLayout::to_string() const
{
    return std::to_string(light_bits) + "," + std::to_string(theta_bits) + "," + std::to_string(phi_bits) +
           "," + std::to_string(origin_bits) + "," + std::to_string(bounce_theta_bits) + "," +
           std::to_string(bounce_phi_bits);
}

namespace {

std::uint64_t quantize_unit(double fraction, int bits)
{
    const std::uint64_t top = (std::uint64_t{1} << bits) - 1;
    const double scaled = std::floor(fraction * static_cast<double>(top));
    if (!(scaled > 0.0)) {
        return 0;
    }
    return std::min(top, static_cast<std::uint64_t>(scaled));
}

std::uint64_t angle_bits(const Vec3& direction, int theta_bits, int phi_bits)
{
    const Spherical s = spherical_from_direction(direction);
    const std::uint64_t qt = quantize_unit(s.theta / std::numbers::pi, theta_bits);
    const std::uint64_t qp = quantize_unit((s.phi + std::numbers::pi) / (2.0 * std::numbers::pi), phi_bits);
    return (qt << phi_bits) | qp;
}

} // namespace

std::uint32_t hash_shadow_ray(std::uint32_t light, const Vec3& direction, const HashLayout& layout)
{
    if (light >= (std::uint64_t{1} << layout.light_bits)) {
        throw ConfigLimitError("light index " + std::to_string(light) + " does not fit " +
                               std::to_string(layout.light_bits) + " hash bits");
    }
    const std::uint64_t key = (std::uint64_t{light} << (layout.theta_bits + layout.phi_bits)) |
                              angle_bits(direction, layout.theta_bits, layout.phi_bits);
    return static_cast<std::uint32_t>(key);
}

std::uint32_t hash_bounce_ray(const Vec3& origin, const Vec3& direction, const Aabb& scene_box,
                              const HashLayout& layout)
{
    const int cells_bits = layout.origin_bits;
    const std::uint64_t cells = std::uint64_t{1} << cells_bits;
    const Vec3 extent = scene_box.extent();
    std::uint64_t key = 0;
    for (int axis = 0; axis < 3; ++axis) {
        std::uint64_t q = 0;
        if (extent[axis] > 0.0) {
            const double f = (origin[axis] - scene_box.lo[axis]) / extent[axis];
            const double scaled = std::floor(f * static_cast<double>(cells));
            q = scaled > 0.0 ? std::min(cells - 1, static_cast<std::uint64_t>(scaled)) : 0;
        }
        key = (key << cells_bits) | q;
    }
    key = (key << (layout.bounce_theta_bits + layout.bounce_phi_bits)) |
          angle_bits(direction, layout.bounce_theta_bits, layout.bounce_phi_bits);
    return static_cast<std::uint32_t>(key);
}

GeneratedRays generate_secondary_rays(std::span<const SurfacePoint> surfaces, const Scene& scene,
                                      RayKind kind, const HashLayout& layout, const Aabb& scene_box,
                                      const Executor& ex)
{
    if (kind == RayKind::Primary) {
        throw InvalidArgument("generate_secondary_rays: primary rays are produced by the G-buffer pass");
    }
    layout.validate();
    const std::size_t lights = scene.lights.size();
    const std::size_t per_surface = kind == RayKind::Shadow ? lights : 1;

    GeneratedRays out;
    out.kind = kind;
    out.rays.resize(surfaces.size() * per_surface);
    out.keys.assign(out.rays.size(), 0);
    out.empty_flags.assign(out.rays.size(), 1);

    parallel_for(ex, surfaces.size(), [&](std::size_t s) {
        const SurfacePoint& sp = surfaces[s];
        if (!sp.valid) {
            return;
        }
        const Material& mat = scene.materials[sp.material_id];

        if (kind == RayKind::Shadow) {
            for (std::size_t l = 0; l < lights; ++l) {
                const LightSource& light = scene.lights[l];
                const Vec3 to_point = sp.position - light.position;
                const double dist = length(to_point);
                if (!(dist > 0.0)) {
                    continue;
                }
                const std::size_t slot = l * surfaces.size() + s;
                Ray& ray = out.rays[slot];
                ray.origin = light.position;
                ray.direction = to_point / dist;
                ray.kind = RayKind::Shadow;
                ray.pixel = sp.pixel;
                ray.light = light.index;
                ray.max_t = dist;
                ray.slot = static_cast<std::uint32_t>(slot);
                ray.throughput = sp.throughput;
                out.keys[slot] = hash_shadow_ray(light.index, ray.direction, layout);
                out.empty_flags[slot] = 0;
            }
            return;
        }

        std::optional<Vec3> dir;
        double weight = 0.0;
        if (kind == RayKind::Reflection && mat.reflectivity > 0.0) {
            dir = reflect(sp.incoming, sp.normal);
            weight = mat.reflectivity;
        } else if (kind == RayKind::Refraction && mat.transmissivity > 0.0) {
            // Front faces enter the medium, back faces leave it.
            const double eta = sp.backface ? mat.ior : 1.0 / mat.ior;
            dir = refract(sp.incoming, sp.normal, eta);
            weight = mat.transmissivity;
        }
        if (!dir) {
            return;
        }
        Ray& ray = out.rays[s];
        ray.origin = sp.position;
        ray.direction = *dir;
        ray.kind = kind;
        ray.pixel = sp.pixel;
        ray.slot = static_cast<std::uint32_t>(s);
        ray.throughput = sp.throughput * weight;
        out.keys[s] = hash_bounce_ray(ray.origin, ray.direction, scene_box, layout);
        out.empty_flags[s] = 0;
    }, 256);
    return out;
}

GeneratedRays generate_secondary_rays(const GBuffer& gbuffer, const Scene& scene, RayKind kind,
                                      const HashLayout& layout, const Executor& ex)
{
    const auto surfaces = surfaces_from_gbuffer(gbuffer);
    return generate_secondary_rays(surfaces, scene, kind, layout, scene.bounds(), ex);
}

RayBatch trim_rays(const GeneratedRays& generated, const Executor& ex)
{
    U32Array slots(generated.rays.size());
    std::iota(slots.begin(), slots.end(), 0u);
    auto [keys, kept] = trim_compact(generated.empty_flags, generated.keys, slots, ex);

    RayBatch batch;
    batch.kind = generated.kind;
    batch.rays.resize(kept.size());
    parallel_for(ex, kept.size(), [&](std::size_t i) { batch.rays[i] = generated.rays[kept[i]]; }, 1 << 14);
    batch.keys = std::move(keys);
    batch.values.resize(kept.size());
    std::iota(batch.values.begin(), batch.values.end(), 0u);
    return batch;
}

Chunks compress_chunks(std::span<const std::uint32_t> keys, const Executor& ex)
{
    const std::size_t n = keys.size();
    Chunks chunks;
    if (n == 0) {
        return chunks;
    }
    U32Array head(n);
    parallel_for(ex, n, [&](std::size_t i) { head[i] = (i == 0 || keys[i] != keys[i - 1]) ? 1u : 0u; }, 1 << 14);
    const U32Array chunk_id = inclusive_scan(head, ex);
    const std::size_t count = chunk_id.back();

    chunks.keys.resize(count);
    chunks.base.resize(count);
    chunks.size.resize(count);
    parallel_for(ex, n, [&](std::size_t i) {
        if (head[i] != 0) {
            chunks.keys[chunk_id[i] - 1] = keys[i];
            chunks.base[chunk_id[i] - 1] = static_cast<std::uint32_t>(i);
        }
    }, 1 << 14);
    parallel_for(ex, count, [&](std::size_t c) {
        const std::uint32_t end = c + 1 < count ? chunks.base[c + 1] : static_cast<std::uint32_t>(n);
        chunks.size[c] = end - chunks.base[c];
    }, 1 << 14);
    return chunks;
}

Chunks sort_chunks(const Chunks& chunks, const Executor& ex)
{
    U32Array order(chunks.count());
    std::iota(order.begin(), order.end(), 0u);
    auto [keys, perm] = radix_sort_pairs(chunks.keys, order, ex);

    Chunks sorted;
    sorted.keys = std::move(keys);
    sorted.base.resize(perm.size());
    sorted.size.resize(perm.size());
    parallel_for(ex, perm.size(), [&](std::size_t i) {
        sorted.base[i] = chunks.base[perm[i]];
        sorted.size[i] = chunks.size[perm[i]];
    }, 1 << 14);
    return sorted;
}

std::pair<U32Array, U32Array> decompress_chunks(const Chunks& sorted,
                                                std::span<const std::uint32_t> original_values,
                                                const Executor& ex)
{
    // The skeleton array is the sorted chunk sizes; its exclusive scan gives
    // every chunk's first output position.
    const U32Array start = exclusive_scan(sorted.size, ex);
    const std::size_t total = sorted.count() == 0 ? 0 : start.back() + sorted.size.back();
    if (total != original_values.size()) {
        throw InvalidArgument("decompress_chunks: chunk sizes do not cover the value array");
    }
    U32Array keys(total);
    U32Array values(total);
    parallel_for(ex, sorted.count(), [&](std::size_t c) {
        for (std::uint32_t k = 0; k < sorted.size[c]; ++k) {
            keys[start[c] + k] = sorted.keys[c];
            values[start[c] + k] = original_values[sorted.base[c] + k];
        }
    }, 1 << 12);
    return {std::move(keys), std::move(values)};
}

std::pair<U32Array, U32Array> sort_and_decompress(const Chunks& chunks,
                                                  std::span<const std::uint32_t> original_values,
                                                  const Executor& ex)
{
    return decompress_chunks(sort_chunks(chunks, ex), original_values, ex);
}

std::vector<Ray> reorder_rays(std::span<const Ray> rays, std::span<const std::uint32_t> sorted_values,
                              const Executor& ex)
{
    std::vector<Ray> out(sorted_values.size());
    parallel_for(ex, out.size(), [&](std::size_t i) { out[i] = rays[sorted_values[i]]; }, 1 << 14);
    return out;
}

void dump_pairs_csv(std::ostream& out, std::string_view stage, std::span<const std::uint32_t> keys,
                    std::span<const std::uint32_t> values)
{
    for (std::size_t i = 0; i < keys.size(); ++i) {
        out << stage << ',' << i << ',' << keys[i] << ',' << (i < values.size() ? values[i] : 0u) << '\n';
    }
}

} // namespace crsh

#include "crsh/gbuffer.hpp"

#include <cmath>
#include <numbers>

#include "crsh/image.hpp"

namespace crsh {

Ray primary_ray(const CameraDesc& camera, int x, int y)
{
    const Vec3 forward = normalize(camera.look_at - camera.eye);
    const Vec3 right = normalize(cross(forward, camera.up));
    const Vec3 up = cross(right, forward);
    const double tan_half = std::tan(camera.vfov_deg * std::numbers::pi / 360.0);
    const double aspect = static_cast<double>(camera.width) / camera.height;

    const double sx = (2.0 * (x + 0.5) / camera.width - 1.0) * tan_half * aspect;
    const double sy = (1.0 - 2.0 * (y + 0.5) / camera.height) * tan_half;

    Ray ray;
    ray.origin = camera.eye;
    ray.direction = normalize(forward + right * sx + up * sy);
    ray.kind = RayKind::Primary;
    ray.pixel = static_cast<std::uint32_t>(y * camera.width + x);
    return ray;
}

GBuffer render_gbuffer(const Scene& scene, const CameraDesc& camera, const Executor& ex)
{
    GBuffer gb;
    gb.width = camera.width;
    gb.height = camera.height;
    gb.pixels.resize(static_cast<std::size_t>(camera.width) * camera.height);

    parallel_for(ex, gb.pixels.size(), [&](std::size_t p) {
        const int x = static_cast<int>(p % camera.width);
        const int y = static_cast<int>(p / camera.width);
        const Ray ray = primary_ray(camera, x, y);

        const Triangle* best = nullptr;
        double best_t = kInfinity;
        for (const Mesh& mesh : scene.meshes) {
            if (!ray_hits_sphere(ray, mesh.bound)) {
                continue;
            }
            for (const Triangle& tri : mesh.triangles) {
                const auto hit = ray_triangle_intersect(ray, tri);
                // Meshes are visited in id order, so strict < keeps the lowest id on ties.
                if (hit && hit->t < best_t) {
                    best_t = hit->t;
                    best = &tri;
                }
            }
        }
        if (best == nullptr) {
            return;
        }

        GBufferPixel& px = gb.pixels[p];
        const Material& mat = scene.material_of(*best);
        px.valid = true;
        px.position = ray.origin + ray.direction * best_t;
        px.normal = best->geometric_normal();
        px.backface = dot(px.normal, ray.direction) > 0.0;
        if (px.backface) {
            px.normal = -px.normal;
        }
        px.view = ray.direction;
        px.diffuse = mat.diffuse;
        px.specular = mat.specular;
        px.material_id = scene.meshes[best->mesh_id].material_id;
        px.mesh_id = best->mesh_id;
        px.triangle = best->id;
    });
    return gb;
}

void dump_gbuffer(const GBuffer& gbuffer, const std::filesystem::path& prefix)
{
    Aabb box;
    for (const GBufferPixel& px : gbuffer.pixels) {
        if (px.valid) {
            box.extend(px.position);
        }
    }
    const Vec3 extent = max(box.extent(), Vec3{1e-12, 1e-12, 1e-12});

    FrameImage albedo(gbuffer.width, gbuffer.height);
    FrameImage specular(gbuffer.width, gbuffer.height);
    FrameImage position(gbuffer.width, gbuffer.height);
    FrameImage normal(gbuffer.width, gbuffer.height);
    for (std::size_t i = 0; i < gbuffer.pixels.size(); ++i) {
        const GBufferPixel& px = gbuffer.pixels[i];
        if (!px.valid) {
            continue;
        }
        albedo.radiance[i] = px.diffuse;
        specular.radiance[i] = px.specular;
        const Vec3 rel = px.position - box.lo;
        position.radiance[i] = {rel.x / extent.x, rel.y / extent.y, rel.z / extent.z};
        normal.radiance[i] = {0.5 * (px.normal.x + 1.0), 0.5 * (px.normal.y + 1.0), 0.5 * (px.normal.z + 1.0)};
    }
    const std::string base = prefix.string();
    write_ppm(albedo, base + "_albedo.ppm");
    write_ppm(specular, base + "_specular.ppm");
    write_ppm(position, base + "_position.ppm");
    write_ppm(normal, base + "_normal.ppm");
}

} // namespace crsh

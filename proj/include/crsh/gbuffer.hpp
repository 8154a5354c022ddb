#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "crsh/parallel.hpp"
#include "crsh/scene.hpp"

namespace crsh {

/// First visible surface behind a pixel center.
struct GBufferPixel {
    bool valid = false;
    Vec3 position;
    /// Unit geometric normal flipped to face the camera.
    Vec3 normal;
    /// True when the geometric normal had to be flipped.
    bool backface = false;
    /// Direction of the primary ray.
    Vec3 view;
    Rgb diffuse;
    Rgb specular;
    std::uint32_t material_id = 0;
    std::uint32_t mesh_id = 0;
    std::uint32_t triangle = 0;
};

struct GBuffer {
    int width = 0;
    int height = 0;
    std::vector<GBufferPixel> pixels;

    const GBufferPixel& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Primary ray through the center of pixel (x, y); row 0 is the top row.
Ray primary_ray(const CameraDesc& camera, int x, int y);

/// Nearest hit for each pixel center; ties at equal t go to the lowest triangle id.
GBuffer render_gbuffer(const Scene& scene, const CameraDesc& camera, const Executor& ex = {});

/// Writes albedo, specular, position and normal images as
/// `<prefix>_{albedo,specular,position,normal}.ppm`.
void dump_gbuffer(const GBuffer& gbuffer, const std::filesystem::path& prefix);

} // namespace crsh

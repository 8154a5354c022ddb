#pragma once

#include <filesystem>
#include <vector>

#include "crsh/vec3.hpp"

namespace crsh {

/// Linear radiance per pixel, row-major, top row first.
struct FrameImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> radiance;

    FrameImage() = default;
    FrameImage(int w, int h) : width(w), height(h), radiance(static_cast<std::size_t>(w) * h) {}

    Rgb& at(int x, int y) { return radiance[static_cast<std::size_t>(y) * width + x]; }
    const Rgb& at(int x, int y) const { return radiance[static_cast<std::size_t>(y) * width + x]; }
};

/// 8-bit sample after clamping to [0,1] and applying gamma 2.2.
unsigned char encode_channel(double linear);

/// Binary P6 with header "P6\n<w> <h>\n255\n". Throws IoError.
void write_ppm(const FrameImage& image, const std::filesystem::path& path);

struct PpmData {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> bytes;
};

/// Reads a binary P6 file with maxval 255 (comments allowed in the header).
PpmData read_ppm(const std::filesystem::path& path);

} // namespace crsh

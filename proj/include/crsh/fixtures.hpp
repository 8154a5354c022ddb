#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "crsh/scene.hpp"

namespace crsh {

/// About 2^13 direction cells: at 256x256 a cell holds a few hundred shadow
/// rays, so 8-ray leaves stay inside one cell instead of spanning a whole
/// 14-bit theta band.
inline constexpr const char* kFixtureHashLayout = "4,6,7,4,6,7";

enum class FixtureKind { Box, Rooms, Slab };

const char* to_string(FixtureKind kind);
FixtureKind parse_fixture(std::string_view text);

struct FixtureOptions {
    /// Seeds the placement jitter of interior objects.
    std::uint64_t seed = 7;
    int width = 256;
    int height = 256;
    int bounces = 2;
};

/// One mesh of a fixture, kept in world space with an identity transform.
struct FixturePart {
    std::string name;
    ObjGeometry geometry;
    Material material;
};

/// Procedural scene before it is turned into a Scene or written to disk.
struct FixtureDesc {
    std::string name;
    std::vector<FixturePart> parts;
    std::vector<LightSource> lights;
    CameraDesc camera;
    RenderSettings settings;
};

/// BOX: Cornell-style room with mirror side and back walls, a block and a glossy sphere.
/// ROOMS: four separate furnished rooms, one mesh each, two lights.
/// SLAB: floor and colonnade merged into a single mesh.
FixtureDesc describe_fixture(FixtureKind kind, const FixtureOptions& options = {});

Scene scene_from_fixture(const FixtureDesc& desc);
Scene build_fixture(FixtureKind kind, const FixtureOptions& options = {});

/// Writes `<dir>/<name>.json` plus one OBJ per part; returns the JSON path.
/// Loading the JSON reproduces scene_from_fixture exactly.
std::filesystem::path write_fixture(const FixtureDesc& desc, const std::filesystem::path& dir);

/// All three fixtures; returns their JSON paths.
std::vector<std::filesystem::path> build_fixture_scenes(const std::filesystem::path& dir,
                                                        const FixtureOptions& options = {});

/// Geometry helpers (triangles wound counter-clockwise seen from the outside).
void append_grid(ObjGeometry& g, const Vec3& corner, const Vec3& edge_u, const Vec3& edge_v, int nu, int nv);
void append_box(ObjGeometry& g, const Vec3& lo, const Vec3& hi, int subdivisions = 1);
void append_sphere(ObjGeometry& g, const Vec3& center, double radius, int stacks, int slices);
void append_cylinder(ObjGeometry& g, const Vec3& base, double radius, double height, int slices);

/// Serializes vertices with round-trip precision and "f a b c" faces.
void write_obj(const ObjGeometry& g, const std::filesystem::path& path);

} // namespace crsh

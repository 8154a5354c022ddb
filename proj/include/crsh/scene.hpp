#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crsh/geom.hpp"

namespace crsh {

/// Lights are addressed by a 4-bit field of the shadow ray hash.
inline constexpr std::size_t kMaxLights = 16;

/// Affine transform stored as the top three rows of a row-major 4x4 matrix.
struct Affine {
    std::array<double, 12> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};

    static Affine identity() { return {}; }
    static Affine translation(const Vec3& t);
    static Affine scale(double s);
    static Affine rotation_z(double radians);
    static Affine rotation_y(double radians);
    /// Parses 16 row-major reals; the bottom row must be (0, 0, 0, 1).
    static Affine from_row_major(std::span<const double> values);

    Vec3 apply_point(const Vec3& p) const;
    Vec3 apply_vector(const Vec3& v) const;
    /// Largest singular value of the linear 3x3 part.
    double max_singular_value() const;

    /// (*this) * rhs: rhs is applied first.
    Affine operator*(const Affine& rhs) const;
};

struct Material {
    Rgb diffuse{0.8, 0.8, 0.8};
    Rgb specular{0.0, 0.0, 0.0};
    double shininess = 0.0;
    double reflectivity = 0.0;
    double transmissivity = 0.0;
    double ior = 1.0;
};

struct LightSource {
    Vec3 position;
    Rgb intensity{1.0, 1.0, 1.0};
    std::uint32_t index = 0;
};

struct CameraDesc {
    Vec3 eye{0.0, 0.0, 5.0};
    Vec3 look_at{0.0, 0.0, 0.0};
    Vec3 up{0.0, 1.0, 0.0};
    double vfov_deg = 45.0;
    int width = 256;
    int height = 256;
};

struct Mesh {
    std::string name;
    /// World-space triangles.
    std::vector<Triangle> triangles;
    std::uint32_t material_id = 0;
    Sphere bound;
    Affine transform;
};

struct RenderSettings {
    int bounce_depth = 2;
    int hierarchy_levels = 2;
    int branching = 8;
    int triangle_batch_size = 16384;
    /// Hash bit allocation as "light,theta,phi,origin,btheta,bphi"; empty means the default.
    std::string hash_layout;
};

struct Scene {
    std::vector<Mesh> meshes;
    std::vector<Material> materials;
    std::vector<LightSource> lights;
    CameraDesc camera;
    RenderSettings settings;

    std::size_t triangle_count() const;
    /// All triangles in scene order; Triangle::id is the index into this array.
    std::vector<Triangle> flattened_triangles() const;
    Aabb bounds() const;
    const Material& material_of(const Triangle& tri) const;
};

/// Polygon soup read from an OBJ file; polygons are fan-triangulated.
struct ObjGeometry {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> faces;
    std::size_t polygon_count = 0;
    /// First `mtllib` and `usemtl` names, empty when absent.
    std::string material_library;
    std::string material_name;
};

ObjGeometry parse_obj(std::istream& in, const std::string& source_name = "<stream>");
ObjGeometry load_obj(const std::filesystem::path& path);

/// Reads `name` (or the first material when `name` is empty) from an MTL file.
/// Kd, Ks and Ns map to diffuse, specular and shininess, Ni to ior and
/// d / Tr to transmissivity; everything else keeps its default.
Material parse_mtl(std::istream& in, const std::string& name, const std::string& source_name = "<stream>");
Material load_mtl(const std::filesystem::path& path, const std::string& name);

/// Transforms the center and scales the radius by the largest singular value.
/// Never touches vertices.
Sphere update_mesh_bound(const Sphere& bound, const Affine& transform);

/// Builds a world-space mesh: the object-space minimal sphere is computed once
/// and carried through the transform.
Mesh make_mesh(std::string name, const ObjGeometry& geometry, const Affine& transform,
               std::uint32_t material_id);

/// Appends a light, assigning the next dense index. Throws ConfigLimitError past 16.
void add_light(Scene& scene, const Vec3& position, const Rgb& intensity);

/// Assigns mesh ids and global triangle ids in scene order.
void finalize_scene(Scene& scene);

Scene scene_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
Scene load_scene(const std::filesystem::path& config_path);

} // namespace crsh

#include "crsh/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crsh/error.hpp"

namespace crsh {

Affine Affine::translation(const Vec3& t)
{
    Affine a;
    a.m[3] = t.x;
    a.m[7] = t.y;
    a.m[11] = t.z;
    return a;
}

Affine Affine::scale(double s)
{
    Affine a;
    a.m[0] = a.m[5] = a.m[10] = s;
    return a;
}

Affine Affine::rotation_z(double radians)
{
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    return {{c, -s, 0, 0, s, c, 0, 0, 0, 0, 1, 0}};
}

Affine Affine::rotation_y(double radians)
{
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    return {{c, 0, s, 0, 0, 1, 0, 0, -s, 0, c, 0}};
}

Affine Affine::from_row_major(std::span<const double> values)
{
    if (values.size() != 16) {
        throw InvalidArgument("transform must have 16 entries, got " + std::to_string(values.size()));
    }
    if (values[12] != 0.0 || values[13] != 0.0 || values[14] != 0.0 || values[15] != 1.0) {
        throw InvalidArgument("transform is not affine: bottom row must be 0 0 0 1");
    }
    Affine a;
    std::copy(values.begin(), values.begin() + 12, a.m.begin());
    return a;
}

Vec3 Affine::apply_point(const Vec3& p) const
{
    return {m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3],
            m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7],
            m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11]};
}

Vec3 Affine::apply_vector(const Vec3& v) const
{
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[4] * v.x + m[5] * v.y + m[6] * v.z,
            m[8] * v.x + m[9] * v.y + m[10] * v.z};
}

double Affine::max_singular_value() const
{
    // Largest eigenvalue of the symmetric matrix A^T A, closed form.
    double s[3][3];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            s[i][j] = m[0 * 4 + i] * m[0 * 4 + j] + m[1 * 4 + i] * m[1 * 4 + j] +
                      m[2 * 4 + i] * m[2 * 4 + j];
        }
    }
    const double off = s[0][1] * s[0][1] + s[0][2] * s[0][2] + s[1][2] * s[1][2];
    double eig = 0.0;
    if (off == 0.0) {
        eig = std::max({s[0][0], s[1][1], s[2][2]});
    } else {
        const double q = (s[0][0] + s[1][1] + s[2][2]) / 3.0;
        const double p2 = (s[0][0] - q) * (s[0][0] - q) + (s[1][1] - q) * (s[1][1] - q) +
                          (s[2][2] - q) * (s[2][2] - q) + 2.0 * off;
        const double p = std::sqrt(p2 / 6.0);
        double b[3][3];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                b[i][j] = (s[i][j] - (i == j ? q : 0.0)) / p;
            }
        }
        const double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                           b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                           b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        const double r = std::clamp(det / 2.0, -1.0, 1.0);
        eig = q + 2.0 * p * std::cos(std::acos(r) / 3.0);
    }
    // Rounding in the closed form can undershoot by a few ulps.
    return std::sqrt(std::max(eig, 0.0)) * (1.0 + 1e-12);
}

Affine Affine::operator*(const Affine& rhs) const
{
    Affine out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) {
            double v = (c == 3) ? m[r * 4 + 3] : 0.0;
            for (int k = 0; k < 3; ++k) {
                v += m[r * 4 + k] * rhs.m[k * 4 + c];
            }
            out.m[r * 4 + c] = v;
        }
    }
    return out;
}

std::size_t Scene::triangle_count() const
{
    std::size_t n = 0;
    for (const Mesh& mesh : meshes) {
        n += mesh.triangles.size();
    }
    return n;
}

std::vector<Triangle> Scene::flattened_triangles() const
{
    std::vector<Triangle> out;
    out.reserve(triangle_count());
    for (const Mesh& mesh : meshes) {
        out.insert(out.end(), mesh.triangles.begin(), mesh.triangles.end());
    }
    return out;
}

Aabb Scene::bounds() const
{
    Aabb box;
    for (const Mesh& mesh : meshes) {
        for (const Triangle& t : mesh.triangles) {
            box.extend(t.v0);
            box.extend(t.v1);
            box.extend(t.v2);
        }
    }
    return box;
}

const Material& Scene::material_of(const Triangle& tri) const
{
    return materials[meshes[tri.mesh_id].material_id];
}

ObjGeometry parse_obj(std::istream& in, const std::string& source_name)
{
    ObjGeometry geo;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw IoError(source_name + ":" + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') {
            continue;
        }
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z)) {
                fail("malformed vertex record");
            }
            geo.vertices.push_back(v);
        } else if (tag == "mtllib" && geo.material_library.empty()) {
            std::getline(ls >> std::ws, geo.material_library);
        } else if (tag == "usemtl" && geo.material_name.empty()) {
            std::getline(ls >> std::ws, geo.material_name);
        } else if (tag == "f") {
            std::vector<std::uint32_t> idx;
            std::string token;
            while (ls >> token) {
                long value = 0;
                try {
                    std::size_t used = 0;
                    value = std::stol(token.substr(0, token.find('/')), &used);
                } catch (const std::exception&) {
                    fail("malformed face index '" + token + "'");
                }
                const long count = static_cast<long>(geo.vertices.size());
                const long resolved = value < 0 ? count + value : value - 1;
                if (value == 0 || resolved < 0 || resolved >= count) {
                    fail("face index " + token + " out of range");
                }
                idx.push_back(static_cast<std::uint32_t>(resolved));
            }
            if (idx.size() < 3) {
                fail("face with fewer than 3 vertices");
            }
            ++geo.polygon_count;
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
                geo.faces.push_back({idx[0], idx[k], idx[k + 1]});
            }
        }
    }
    return geo;
}

ObjGeometry load_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open mesh file '" + path.string() + "'");
    }
    return parse_obj(in, path.string());
}

Material parse_mtl(std::istream& in, const std::string& name, const std::string& source_name)
{
    Material m;
    bool found = false;
    bool inside = false;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw IoError(source_name + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') {
            continue;
        }
        if (tag == "newmtl") {
            if (found) {
                break;
            }
            std::string current;
            std::getline(ls >> std::ws, current);
            inside = name.empty() || current == name;
            found = inside;
            continue;
        }
        if (!inside) {
            continue;
        }
        const auto read_rgb = [&](Rgb& c) {
            if (!(ls >> c.r >> c.g >> c.b)) {
                fail("malformed " + tag + " record");
            }
        };
        const auto read_real = [&](double& x) {
            if (!(ls >> x)) {
                fail("malformed " + tag + " record");
            }
        };
        if (tag == "Kd") {
            read_rgb(m.diffuse);
        } else if (tag == "Ks") {
            read_rgb(m.specular);
        } else if (tag == "Ns") {
            read_real(m.shininess);
        } else if (tag == "Ni") {
            read_real(m.ior);
            m.ior = std::max(1.0, m.ior);
        } else if (tag == "d") {
            double d = 1.0;
            read_real(d);
            m.transmissivity = std::clamp(1.0 - d, 0.0, 1.0);
        } else if (tag == "Tr") {
            read_real(m.transmissivity);
            m.transmissivity = std::clamp(m.transmissivity, 0.0, 1.0);
        }
    }
    if (!found) {
        throw IoError(source_name + ": material '" + name + "' not found");
    }
    return m;
}

Material load_mtl(const std::filesystem::path& path, const std::string& name)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open material file '" + path.string() + "'");
    }
    return parse_mtl(in, name, path.string());
}

Sphere update_mesh_bound(const Sphere& bound, const Affine& transform)
{
    return {transform.apply_point(bound.center), bound.radius * transform.max_singular_value()};
}

Mesh make_mesh(std::string name, const ObjGeometry& geometry, const Affine& transform,
               std::uint32_t material_id)
{
    if (geometry.vertices.empty()) {
        throw IoError("mesh '" + name + "' has no vertices");
    }
    Mesh mesh;
    mesh.name = std::move(name);
    mesh.material_id = material_id;
    mesh.transform = transform;
    mesh.bound = update_mesh_bound(minimal_enclosing_sphere(geometry.vertices), transform);
    mesh.triangles.reserve(geometry.faces.size());
    for (const auto& f : geometry.faces) {
        Triangle t;
        t.v0 = transform.apply_point(geometry.vertices[f[0]]);
        t.v1 = transform.apply_point(geometry.vertices[f[1]]);
        t.v2 = transform.apply_point(geometry.vertices[f[2]]);
        mesh.triangles.push_back(t);
    }
    return mesh;
}

void add_light(Scene& scene, const Vec3& position, const Rgb& intensity)
{
    if (scene.lights.size() >= kMaxLights) {
        throw ConfigLimitError("scene has more than 16 lights; the shadow hash reserves 4 bits");
    }
    scene.lights.push_back({position, intensity, static_cast<std::uint32_t>(scene.lights.size())});
}

void finalize_scene(Scene& scene)
{
    std::uint32_t next = 0;
    for (std::size_t m = 0; m < scene.meshes.size(); ++m) {
        for (Triangle& t : scene.meshes[m].triangles) {
            t.mesh_id = static_cast<std::uint32_t>(m);
            t.id = next++;
        }
    }
}

namespace {

using nlohmann::json;

Vec3 read_vec3(const json& j, const char* what)
{
    if (!j.is_array() || j.size() != 3) {
        throw IoError(std::string("'") + what + "' must be an array of 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Rgb read_rgb(const json& j, const char* what)
{
    const Vec3 v = read_vec3(j, what);
    return {v.x, v.y, v.z};
}

bool in_unit_range(const Rgb& c)
{
    auto ok = [](double x) { return x >= 0.0 && x <= 1.0; };
    return ok(c.r) && ok(c.g) && ok(c.b);
}

/// JSON fields override `m` one by one.
Material read_material(const json& j, Material m)
{
    if (j.contains("diffuse")) m.diffuse = read_rgb(j["diffuse"], "diffuse");
    if (j.contains("specular")) m.specular = read_rgb(j["specular"], "specular");
    m.shininess = j.value("shininess", m.shininess);
    m.reflectivity = j.value("reflectivity", m.reflectivity);
    m.transmissivity = j.value("transmissivity", m.transmissivity);
    m.ior = j.value("ior", m.ior);

    if (!in_unit_range(m.diffuse) || !in_unit_range(m.specular)) {
        throw IoError("material colours must lie in [0,1]");
    }
    if (m.shininess < 0.0 || m.reflectivity < 0.0 || m.transmissivity < 0.0 ||
        m.reflectivity + m.transmissivity > 1.0 || m.ior < 1.0) {
        throw IoError("material parameters out of range (shininess >= 0, "
                      "reflectivity + transmissivity <= 1, ior >= 1)");
    }
    return m;
}

void validate_camera(const CameraDesc& c)
{
    if (!(c.vfov_deg > 0.0 && c.vfov_deg < 180.0)) {
        throw IoError("camera vfovDeg must lie in (0, 180)");
    }
    if (c.width <= 0 || c.height <= 0) {
        throw IoError("camera width and height must be positive");
    }
    const Vec3 view = c.look_at - c.eye;
    if (length(view) == 0.0) {
        throw IoError("camera eye and lookAt coincide");
    }
    if (length(cross(normalize(view), normalize(c.up))) < 1e-9) {
        throw IoError("camera up vector is parallel to the view direction");
    }
}

} // namespace

Scene scene_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir)
{
    Scene scene;
    try {
        if (doc.contains("camera")) {
            const json& c = doc["camera"];
            CameraDesc& cam = scene.camera;
            if (c.contains("eye")) cam.eye = read_vec3(c["eye"], "eye");
            if (c.contains("lookAt")) cam.look_at = read_vec3(c["lookAt"], "lookAt");
            if (c.contains("up")) cam.up = read_vec3(c["up"], "up");
            cam.vfov_deg = c.value("vfovDeg", cam.vfov_deg);
            cam.width = c.value("width", cam.width);
            cam.height = c.value("height", cam.height);
        }
        validate_camera(scene.camera);

        for (const json& l : doc.value("lights", json::array())) {
            add_light(scene, read_vec3(l.at("position"), "position"),
                      l.contains("intensity") ? read_rgb(l["intensity"], "intensity") : Rgb{1, 1, 1});
        }

        std::size_t mesh_index = 0;
        for (const json& m : doc.value("meshes", json::array())) {
            const std::filesystem::path obj = base_dir / m.at("objPath").get<std::string>();
            Affine transform;
            if (m.contains("transform")) {
                const auto values = m["transform"].get<std::vector<double>>();
                try {
                    transform = Affine::from_row_major(values);
                } catch (const InvalidArgument& e) {
                    throw IoError(e.what());
                }
            }
            const ObjGeometry geometry = load_obj(obj);
            Material base;
            if (!geometry.material_library.empty()) {
                base = load_mtl(obj.parent_path() / geometry.material_library, geometry.material_name);
            }
            scene.materials.push_back(m.contains("material") ? read_material(m["material"], base)
                                                             : read_material(json::object(), base));
            std::string name = m.value("name", "mesh" + std::to_string(mesh_index));
            scene.meshes.push_back(make_mesh(std::move(name), geometry, transform,
                                             static_cast<std::uint32_t>(scene.materials.size() - 1)));
            ++mesh_index;
        }

        if (doc.contains("settings")) {
            const json& s = doc["settings"];
            RenderSettings& rs = scene.settings;
            rs.bounce_depth = s.value("bounceDepth", rs.bounce_depth);
            rs.hierarchy_levels = s.value("hierarchyLevels", rs.hierarchy_levels);
            rs.branching = s.value("branching", rs.branching);
            rs.triangle_batch_size = s.value("triangleBatchSize", rs.triangle_batch_size);
            rs.hash_layout = s.value("hashLayout", rs.hash_layout);
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed scene config: ") + e.what());
    }
    finalize_scene(scene);
    return scene;
}

Scene load_scene(const std::filesystem::path& config_path)
{
    std::ifstream in(config_path);
    if (!in) {
        throw IoError("cannot open scene config '" + config_path.string() + "'");
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("cannot parse scene config '" + config_path.string() + "': " + e.what());
    }
    return scene_from_json(doc, config_path.parent_path());
}

} // namespace crsh

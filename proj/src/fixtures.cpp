#include "crsh/fixtures.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "crsh/error.hpp"

namespace crsh {

const char* to_string(FixtureKind kind)
{
    switch (kind) {
    case FixtureKind::Box: return "box";
    case FixtureKind::Rooms: return "rooms";
    case FixtureKind::Slab: return "slab";
    }
    return "unknown";
}

FixtureKind parse_fixture(std::string_view text)
{
    if (text == "box") {
        return FixtureKind::Box;
    }
    if (text == "rooms") {
        return FixtureKind::Rooms;
    }
    if (text == "slab") {
        return FixtureKind::Slab;
    }
    throw InvalidArgument("unknown fixture '" + std::string(text) + "' (expected box, rooms or slab)");
}

namespace {

std::uint32_t next_index(const ObjGeometry& g)
{
    return static_cast<std::uint32_t>(g.vertices.size());
}

void add_tri(ObjGeometry& g, std::uint32_t a, std::uint32_t b, std::uint32_t c)
{
    g.faces.push_back({a, b, c});
    ++g.polygon_count;
}

/// Applies `t` to every vertex appended since `first`.
void transform_from(ObjGeometry& g, std::size_t first, const Affine& t)
{
    for (std::size_t i = first; i < g.vertices.size(); ++i) {
        g.vertices[i] = t.apply_point(g.vertices[i]);
    }
}

Material diffuse(double r, double g, double b)
{
    Material m;
    m.diffuse = {r, g, b};
    return m;
}

LightSource light_at(const Vec3& p, double intensity)
{
    LightSource l;
    l.position = p;
    l.intensity = {intensity, intensity, intensity};
    return l;
}

} // namespace

void append_grid(ObjGeometry& g, const Vec3& corner, const Vec3& edge_u, const Vec3& edge_v, int nu, int nv)
{
    const std::uint32_t base = next_index(g);
    for (int j = 0; j <= nv; ++j) {
        for (int i = 0; i <= nu; ++i) {
            g.vertices.push_back(corner + edge_u * (static_cast<double>(i) / nu) + edge_v * (static_cast<double>(j) / nv));
        }
    }
    const auto idx = [&](int i, int j) { return base + static_cast<std::uint32_t>(j * (nu + 1) + i); };
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) {
            add_tri(g, idx(i, j), idx(i + 1, j), idx(i + 1, j + 1));
            add_tri(g, idx(i, j), idx(i + 1, j + 1), idx(i, j + 1));
        }
    }
}

void append_box(ObjGeometry& g, const Vec3& lo, const Vec3& hi, int subdivisions)
{
    const int n = subdivisions;
    const Vec3 dx{hi.x - lo.x, 0, 0};
    const Vec3 dy{0, hi.y - lo.y, 0};
    const Vec3 dz{0, 0, hi.z - lo.z};
    append_grid(g, lo, dz, dy, n, n);
    append_grid(g, {hi.x, lo.y, lo.z}, dy, dz, n, n);
    append_grid(g, lo, dx, dz, n, n);
    append_grid(g, {lo.x, hi.y, lo.z}, dz, dx, n, n);
    append_grid(g, lo, dy, dx, n, n);
    append_grid(g, {lo.x, lo.y, hi.z}, dx, dy, n, n);
}

void append_sphere(ObjGeometry& g, const Vec3& center, double radius, int stacks, int slices)
{
    const double pi = std::numbers::pi;
    const std::uint32_t north = next_index(g);
    g.vertices.push_back(center + Vec3{0, radius, 0});
    for (int s = 1; s < stacks; ++s) {
        const double theta = pi * s / stacks;
        for (int k = 0; k < slices; ++k) {
            const double phi = 2.0 * pi * k / slices;
            g.vertices.push_back(center + Vec3{std::sin(theta) * std::cos(phi), std::cos(theta),
                                               -std::sin(theta) * std::sin(phi)} * radius);
        }
    }
    const std::uint32_t south = next_index(g);
    g.vertices.push_back(center - Vec3{0, radius, 0});

    const auto ring = [&](int s, int k) {
        return north + 1 + static_cast<std::uint32_t>((s - 1) * slices + (k % slices));
    };
    for (int k = 0; k < slices; ++k) {
        add_tri(g, north, ring(1, k), ring(1, k + 1));
    }
    for (int s = 1; s + 1 < stacks; ++s) {
        for (int k = 0; k < slices; ++k) {
            add_tri(g, ring(s, k), ring(s + 1, k), ring(s + 1, k + 1));
            add_tri(g, ring(s, k), ring(s + 1, k + 1), ring(s, k + 1));
        }
    }
    for (int k = 0; k < slices; ++k) {
        add_tri(g, south, ring(stacks - 1, k + 1), ring(stacks - 1, k));
    }
}

void append_cylinder(ObjGeometry& g, const Vec3& base, double radius, double height, int slices)
{
    const std::uint32_t first = next_index(g);
    for (int level = 0; level < 2; ++level) {
        for (int k = 0; k < slices; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / slices;
            g.vertices.push_back(base + Vec3{radius * std::cos(phi), height * level, -radius * std::sin(phi)});
        }
    }
    const std::uint32_t bottom_center = next_index(g);
    g.vertices.push_back(base);
    g.vertices.push_back(base + Vec3{0, height, 0});
    const std::uint32_t top_center = bottom_center + 1;
    const auto at = [&](int level, int k) { return first + static_cast<std::uint32_t>(level * slices + (k % slices)); };
    for (int k = 0; k < slices; ++k) {
        add_tri(g, at(0, k), at(0, k + 1), at(1, k + 1));
        add_tri(g, at(0, k), at(1, k + 1), at(1, k));
        add_tri(g, top_center, at(1, k), at(1, k + 1));
        add_tri(g, bottom_center, at(0, k + 1), at(0, k));
    }
}

void write_obj(const ObjGeometry& g, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write mesh file '" + path.string() + "'");
    }
    out.precision(17);
    for (const Vec3& v : g.vertices) {
        out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    }
    for (const auto& f : g.faces) {
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    if (!out) {
        throw IoError("failed while writing mesh file '" + path.string() + "'");
    }
}

namespace {

FixtureDesc describe_box(const FixtureOptions& o)
{
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);

    FixtureDesc d;
    d.name = "box";
    const auto wall = [&](const char* name, const Vec3& corner, const Vec3& u, const Vec3& v, Material m) {
        FixturePart p{name, {}, m};
        append_grid(p.geometry, corner, u, v, 5, 5);
        d.parts.push_back(std::move(p));
    };
    Material mirror = diffuse(0.08, 0.08, 0.08);
    mirror.reflectivity = 0.85;
    Material left = mirror;
    left.diffuse = {0.12, 0.03, 0.03};
    Material right = mirror;
    right.diffuse = {0.03, 0.12, 0.03};

    wall("floor", {-1, -1, -1}, {0, 0, 2}, {2, 0, 0}, diffuse(0.75, 0.75, 0.75));
    wall("ceiling", {-1, 1, -1}, {2, 0, 0}, {0, 0, 2}, diffuse(0.75, 0.75, 0.75));
    wall("back", {-1, -1, -1}, {2, 0, 0}, {0, 2, 0}, mirror);
    wall("left", {-1, -1, -1}, {0, 2, 0}, {0, 0, 2}, left);
    wall("right", {1, -1, -1}, {0, 0, 2}, {0, 2, 0}, right);

    const Vec3 block_center{-0.4 + jitter(rng), -0.6, -0.2 + jitter(rng)};
    FixturePart block{"block", {}, diffuse(0.7, 0.65, 0.5)};
    append_box(block.geometry, {-0.25, -0.4, -0.25}, {0.25, 0.4, 0.25}, 2);
    transform_from(block.geometry, 0,
                   Affine::translation(block_center) * Affine::rotation_y(0.3 + 4.0 * jitter(rng)));
    d.parts.push_back(std::move(block));

    Material glossy = diffuse(0.2, 0.3, 0.7);
    glossy.specular = {0.5, 0.5, 0.5};
    glossy.shininess = 40.0;
    glossy.reflectivity = 0.25;
    FixturePart ball{"glossy_sphere", {}, glossy};
    append_sphere(ball.geometry, {0.45 + jitter(rng), -0.62, 0.25 + jitter(rng)}, 0.38, 10, 16);
    d.parts.push_back(std::move(ball));

    Material glass = diffuse(0.04, 0.04, 0.04);
    glass.specular = {0.6, 0.6, 0.6};
    glass.shininess = 80.0;
    glass.reflectivity = 0.1;
    glass.transmissivity = 0.8;
    glass.ior = 1.5;
    FixturePart lens{"glass_sphere", {}, glass};
    append_sphere(lens.geometry, block_center + Vec3{0, 0.65, 0}, 0.25, 8, 12);
    d.parts.push_back(std::move(lens));

    d.lights.push_back(light_at({0.0, 0.85, 0.2}, 0.9));
    d.camera.eye = {0, 0, 3.6};
    d.camera.look_at = {0, 0, 0};
    d.camera.vfov_deg = 40.0;
    return d;
}

FixtureDesc describe_rooms(const FixtureOptions& o)
{
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> jitter(-0.15, 0.15);

    FixtureDesc d;
    d.name = "rooms";
    const Material palette[] = {diffuse(0.8, 0.7, 0.6), diffuse(0.6, 0.75, 0.8), diffuse(0.75, 0.8, 0.6),
                                diffuse(0.8, 0.65, 0.75)};
    const double spacing = 3.2;
    int room = 0;
    for (double cz : {-spacing / 2, spacing / 2}) {
        for (double cx : {-spacing / 2, spacing / 2}) {
            const Vec3 c{cx, 0, cz};
            FixturePart p{"room" + std::to_string(room), {}, palette[room]};
            ObjGeometry& g = p.geometry;
            append_grid(g, c + Vec3{-1, 0, -1}, {0, 0, 2}, {2, 0, 0}, 8, 8);
            append_grid(g, c + Vec3{-1, 0, -1}, {2, 0, 0}, {0, 0.6, 0}, 8, 3);
            append_grid(g, c + Vec3{-1, 0, 1}, {0, 0.6, 0}, {2, 0, 0}, 3, 8);
            append_grid(g, c + Vec3{-1, 0, -1}, {0, 0.6, 0}, {0, 0, 2}, 3, 8);
            append_grid(g, c + Vec3{1, 0, -1}, {0, 0, 2}, {0, 0.6, 0}, 8, 3);

            const std::size_t table = g.vertices.size();
            append_box(g, {-0.35, 0.0, -0.25}, {0.35, 0.4, 0.25}, 2);
            transform_from(g, table, Affine::translation(c + Vec3{-0.35 + jitter(rng), 0, 0.3 + jitter(rng)}) *
                                         Affine::rotation_y(2.0 * jitter(rng)));
            const std::size_t cabinet = g.vertices.size();
            append_box(g, {-0.2, 0.0, -0.2}, {0.2, 0.5, 0.2}, 2);
            transform_from(g, cabinet, Affine::translation(c + Vec3{0.55 + jitter(rng), 0, -0.55 + jitter(rng)}));
            append_sphere(g, c + Vec3{0.45 + jitter(rng), 0.25, 0.45 + jitter(rng)}, 0.25, 10, 16);
            append_cylinder(g, c + Vec3{-0.5 + jitter(rng), 0, -0.5 + jitter(rng)}, 0.15, 0.45, 16);
            d.parts.push_back(std::move(p));
            ++room;
        }
    }
    d.lights.push_back(light_at({-1.2, 3.0, 0.4}, 0.6));
    d.lights.push_back(light_at({1.4, 3.2, -0.3}, 0.5));
    d.camera.eye = {0, 7.5, 4.5};
    d.camera.look_at = {0, 0, 0.2};
    d.camera.vfov_deg = 50.0;
    return d;
}

FixtureDesc describe_slab(const FixtureOptions& o)
{
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);

    FixtureDesc d;
    d.name = "slab";
    FixturePart p{"slab", {}, diffuse(0.75, 0.72, 0.65)};
    ObjGeometry& g = p.geometry;
    append_grid(g, {-4, 0, -4}, {0, 0, 8}, {8, 0, 0}, 16, 16);
    append_grid(g, {-4, 0, -4}, {8, 0, 0}, {0, 3, 0}, 16, 6);
    for (double z : {-1.5, 1.5}) {
        for (int k = 0; k < 6; ++k) {
            append_cylinder(g, {-3.0 + 1.2 * k, 0, z}, 0.25, 2.5, 24);
        }
        append_box(g, {-3.4, 2.5, z - 0.35}, {3.4, 2.8, z + 0.35}, 4);
    }
    for (int k = 0; k < 4; ++k) {
        append_sphere(g, {-2.4 + 1.6 * k + jitter(rng), 0.35, jitter(rng)}, 0.35, 12, 16);
    }
    d.parts.push_back(std::move(p));
    d.lights.push_back(light_at({1.5, 6.5, 5.0}, 0.9));
    d.camera.eye = {0, 2.2, 7.0};
    d.camera.look_at = {0, 0.8, 0};
    d.camera.vfov_deg = 55.0;
    return d;
}

} // namespace

FixtureDesc describe_fixture(FixtureKind kind, const FixtureOptions& options)
{
    FixtureDesc d;
    switch (kind) {
    case FixtureKind::Box: d = describe_box(options); break;
    case FixtureKind::Rooms: d = describe_rooms(options); break;
    case FixtureKind::Slab: d = describe_slab(options); break;
    }
    for (std::size_t i = 0; i < d.lights.size(); ++i) {
        d.lights[i].index = static_cast<std::uint32_t>(i);
    }
    d.camera.width = options.width;
    d.camera.height = options.height;
    d.settings.bounce_depth = options.bounces;
    d.settings.hash_layout = kFixtureHashLayout;
    return d;
}

Scene scene_from_fixture(const FixtureDesc& desc)
{
    Scene scene;
    scene.camera = desc.camera;
    scene.settings = desc.settings;
    for (const LightSource& l : desc.lights) {
        add_light(scene, l.position, l.intensity);
    }
    for (const FixturePart& part : desc.parts) {
        scene.materials.push_back(part.material);
        scene.meshes.push_back(make_mesh(part.name, part.geometry, Affine::identity(),
                                         static_cast<std::uint32_t>(scene.materials.size() - 1)));
    }
    finalize_scene(scene);
    return scene;
}

Scene build_fixture(FixtureKind kind, const FixtureOptions& options)
{
    return scene_from_fixture(describe_fixture(kind, options));
}

std::filesystem::path write_fixture(const FixtureDesc& desc, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const auto rgb = [](const Rgb& c) { return nlohmann::json::array({c.r, c.g, c.b}); };
    const auto vec = [](const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); };

    nlohmann::json doc;
    doc["camera"] = {{"eye", vec(desc.camera.eye)},       {"lookAt", vec(desc.camera.look_at)},
                     {"up", vec(desc.camera.up)},         {"vfovDeg", desc.camera.vfov_deg},
                     {"width", desc.camera.width},        {"height", desc.camera.height}};
    doc["lights"] = nlohmann::json::array();
    for (const LightSource& l : desc.lights) {
        doc["lights"].push_back({{"position", vec(l.position)}, {"intensity", rgb(l.intensity)}});
    }
    doc["meshes"] = nlohmann::json::array();
    for (const FixturePart& part : desc.parts) {
        const std::string obj_name = desc.name + "_" + part.name + ".obj";
        write_obj(part.geometry, dir / obj_name);
        const Material& m = part.material;
        doc["meshes"].push_back({{"name", part.name},
                                 {"objPath", obj_name},
                                 {"material",
                                  {{"diffuse", rgb(m.diffuse)},
                                   {"specular", rgb(m.specular)},
                                   {"shininess", m.shininess},
                                   {"reflectivity", m.reflectivity},
                                   {"transmissivity", m.transmissivity},
                                   {"ior", m.ior}}}});
    }
    doc["settings"] = {{"bounceDepth", desc.settings.bounce_depth},
                       {"hierarchyLevels", desc.settings.hierarchy_levels},
                       {"branching", desc.settings.branching},
                       {"triangleBatchSize", desc.settings.triangle_batch_size},
                       {"hashLayout", desc.settings.hash_layout}};

    const auto path = dir / (desc.name + ".json");
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write scene file '" + path.string() + "'");
    }
    out << doc.dump(2) << '\n';
    return path;
}

std::vector<std::filesystem::path> build_fixture_scenes(const std::filesystem::path& dir,
                                                        const FixtureOptions& options)
{
    std::vector<std::filesystem::path> paths;
    for (FixtureKind kind : {FixtureKind::Box, FixtureKind::Rooms, FixtureKind::Slab}) {
        paths.push_back(write_fixture(describe_fixture(kind, options), dir));
    }
    return paths;
}

} // namespace crsh

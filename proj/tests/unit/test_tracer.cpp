#include <doctest.h>

#include <cmath>

#include "crsh/error.hpp"
#include "crsh/fixtures.hpp"
#include "crsh/tracer.hpp"
#include "scenes.hpp"

using namespace crsh;

namespace {

Triangle tri_at(double z, double h = 1.0)
{
    return {{-h, -h, z}, {h, -h, z}, {0, h, z}};
}

Scene one_pixel_scene()
{
    Scene scene = testscene::empty_scene(1, 1);
    scene.settings.bounce_depth = 1;
    return scene;
}

RenderOptions with_engine(Engine e, unsigned threads = 1)
{
    RenderOptions o;
    o.engine = e;
    o.executor.threads = threads;
    return o;
}

double max_abs_diff(const FrameImage& a, const FrameImage& b)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.radiance.size(); ++i) {
        worst = std::max({worst, std::abs(a.radiance[i].r - b.radiance[i].r), std::abs(a.radiance[i].g - b.radiance[i].g),
                          std::abs(a.radiance[i].b - b.radiance[i].b)});
    }
    return worst;
}

} // namespace

TEST_CASE("engine names")
{
    CHECK(parse_engine("rah") == Engine::Rah);
    CHECK(std::string(to_string(Engine::Crsh)) == "crsh");
    CHECK_THROWS_AS(parse_engine("bogus"), InvalidArgument);
}

TEST_CASE("update_hit keeps the nearest hit and stops shadow rays early")
{
    Ray r;
    r.origin = {0, 0, 5};
    r.direction = {0, 0, -1};
    r.kind = RayKind::Reflection;
    Triangle near = tri_at(1);
    near.id = 7;
    Triangle far = tri_at(0);
    far.id = 3;
    Triangle twin = tri_at(1);
    twin.id = 2;
    RayHitRecord rec;
    LevelCounters c;
    update_hit(rec, r, far, c);
    update_hit(rec, r, near, c);
    CHECK(rec.triangle == 7);
    update_hit(rec, r, twin, c);
    CHECK(rec.triangle == 2);
    CHECK(rec.t == doctest::Approx(4.0));
    CHECK(c.intersections == 3);

    Ray s = r;
    s.kind = RayKind::Shadow;
    s.max_t = 5.0;
    RayHitRecord srec;
    LevelCounters sc;
    CHECK(update_hit(srec, s, near, sc));
    CHECK(srec.occluded);
    CHECK_FALSE(update_hit(srec, s, far, sc));
    CHECK(sc.intersections == 1);

    // The shaded surface itself sits at max_t and never occludes.
    RayHitRecord self;
    update_hit(self, s, far, sc);
    CHECK_FALSE(self.occluded);
}

TEST_CASE("mirror hand trace")
{
    Scene scene = one_pixel_scene();
    Material mirror;
    mirror.diffuse = {0.1, 0.0, 0.0};
    mirror.reflectivity = 0.5;
    Material wall;
    wall.diffuse = {0.3, 0.6, 0.9};
    testscene::add_mesh(scene, "mirror", {tri_at(0)}, mirror);
    testscene::add_mesh(scene, "wall", {tri_at(6)}, wall);
    add_light(scene, {0, 0, 5.5}, {1, 1, 1});
    for (Engine e : {Engine::Brute, Engine::Rah, Engine::Crsh}) {
        const RenderResult r = render(scene, with_engine(e));
        const Rgb px = r.image.at(0, 0);
        // Direct term of the mirror plus half of the wall seen head-on.
        CHECK(px.r == doctest::Approx(0.1 + 0.5 * 0.3));
        CHECK(px.g == doctest::Approx(0.5 * 0.6));
        CHECK(px.b == doctest::Approx(0.5 * 0.9));
        CHECK(r.stats.ray_counts.at("reflection") == 1);
        CHECK(r.stats.ray_counts.at("shadow") == 2);
        CHECK(r.stats.ray_counts.at("refraction") == 0);
    }
}

TEST_CASE("glass hand trace")
{
    Scene scene = one_pixel_scene();
    Material glass;
    glass.diffuse = {0, 0, 0};
    glass.transmissivity = 0.9;
    glass.ior = 1.5;
    Material back;
    back.diffuse = {1.0, 0.5, 0.25};
    testscene::add_mesh(scene, "glass", {tri_at(1, 0.5)}, glass);
    testscene::add_mesh(scene, "back", {tri_at(0, 3)}, back);
    add_light(scene, {0, 3, 0.5}, {1, 1, 1});
    const double n_dot_l = 0.5 / std::sqrt(9.25);
    for (Engine e : {Engine::Brute, Engine::Rah, Engine::Crsh}) {
        const RenderResult r = render(scene, with_engine(e));
        const Rgb px = r.image.at(0, 0);
        CHECK(px.r == doctest::Approx(0.9 * 1.0 * n_dot_l));
        CHECK(px.g == doctest::Approx(0.9 * 0.5 * n_dot_l));
        CHECK(px.b == doctest::Approx(0.9 * 0.25 * n_dot_l));
        CHECK(r.stats.ray_counts.at("refraction") == 1);
    }
}

TEST_CASE("lighting edge cases")
{
    SUBCASE("lit plane")
    {
        Scene scene = one_pixel_scene();
        testscene::add_mesh(scene, "plane", {tri_at(0)}, Material{});
        add_light(scene, {0, 0, 3}, {1, 1, 1});
        CHECK(render(scene).image.at(0, 0).r == doctest::Approx(0.8));
    }
    SUBCASE("grazing light contributes nothing")
    {
        Scene scene = one_pixel_scene();
        testscene::add_mesh(scene, "plane", {tri_at(0)}, Material{});
        add_light(scene, {4, 0, 0}, {1, 1, 1});
        CHECK(render(scene).image.at(0, 0) == Rgb{0, 0, 0});
    }
    SUBCASE("occluder casts a shadow")
    {
        Scene scene = one_pixel_scene();
        testscene::add_mesh(scene, "plane", {tri_at(0)}, Material{});
        testscene::add_mesh(scene, "blocker", {tri_at(2, 0.2)}, Material{});
        add_light(scene, {0, 0, 3}, {1, 1, 1});
        // The blocker is what the camera sees; move the camera off axis.
        scene.camera.eye = {0, -3, 4};
        scene.camera.look_at = {0, -0.3, 0};
        for (Engine e : {Engine::Brute, Engine::Rah, Engine::Crsh}) {
            const RenderResult r = render(scene, with_engine(e));
            CHECK(r.image.at(0, 0) == Rgb{0, 0, 0});
        }
    }
    SUBCASE("no lights at depth 0")
    {
        Scene scene = testscene::empty_scene(8, 8);
        scene.settings.bounce_depth = 0;
        testscene::add_mesh(scene, "plane", testscene::square_z(0, 10), Material{});
        const RenderResult r = render(scene);
        for (const Rgb& c : r.image.radiance) {
            CHECK(c == Rgb{0, 0, 0});
        }
        CHECK(r.stats.ray_counts.at("shadow") == 0);
        CHECK(r.stats.total_tests() == 0);
        CHECK(r.stats.relative_percent() == 0.0);
    }
}

TEST_CASE("configuration limits")
{
    Scene scene = build_fixture(FixtureKind::Box, {7, 16, 16, 1});
    Scene bad = scene;
    bad.settings.triangle_batch_size = 20000;
    CHECK_THROWS_WITH_AS(render(bad), doctest::Contains("subdivide into triangle batches"), ConfigLimitError);
    bad = scene;
    bad.settings.branching = 1;
    CHECK_THROWS_AS(render(bad), ConfigLimitError);
    bad = scene;
    bad.settings.hierarchy_levels = 0;
    CHECK_THROWS_AS(render(bad), ConfigLimitError);
    bad = scene;
    bad.settings.bounce_depth = -1;
    CHECK_THROWS_AS(render(bad), ConfigLimitError);
    RenderOptions o;
    o.layout = HashLayout{4, 20, 14, 5, 8, 9};
    CHECK_THROWS_AS(render(scene, o), ConfigLimitError);
    CHECK(effective_layout(scene, {}).to_string() == kFixtureHashLayout);
    CHECK(effective_layout(Scene{}, {}).to_string() == HashLayout{}.to_string());
}

TEST_CASE("engines agree and crsh does the least work")
{
    for (FixtureKind kind : {FixtureKind::Box, FixtureKind::Rooms, FixtureKind::Slab}) {
        CAPTURE(to_string(kind));
        const Scene scene = build_fixture(kind, {7, 96, 96, 2});
        const RenderResult brute = render(scene, with_engine(Engine::Brute));
        const RenderResult rah = render(scene, with_engine(Engine::Rah));
        const RenderResult crsh = render(scene, with_engine(Engine::Crsh));

        CHECK(max_abs_diff(brute.image, rah.image) < 1e-4);
        CHECK(max_abs_diff(brute.image, crsh.image) < 1e-4);
        CHECK(brute.stats.ray_counts == crsh.stats.ray_counts);
        CHECK(brute.stats.ray_counts == rah.stats.ray_counts);

        std::uint64_t rays = 0;
        for (const auto& [kind_name, n] : brute.stats.ray_counts) {
            rays += n;
        }
        CHECK(brute.stats.brute_force_equivalent == rays * scene.triangle_count());
        CHECK(brute.stats.total_tests() == brute.stats.brute_force_equivalent);
        CHECK(brute.stats.relative_percent() == doctest::Approx(100.0));

        CHECK(crsh.stats.total_tests() < rah.stats.total_tests());
        CHECK(rah.stats.total_tests() < brute.stats.total_tests());
        CHECK(rah.stats.mesh.intersections == 0);
        CHECK(crsh.stats.mesh.intersections > 0);
        for (const auto* s : {&rah.stats, &crsh.stats}) {
            CHECK(s->per_level.size() == 2);
            for (const LevelCounters& c : s->per_level) {
                CHECK(c.intersections == c.misses + c.hits);
            }
        }
    }
}

TEST_CASE("rendering is independent of the worker count")
{
    const Scene scene = build_fixture(FixtureKind::Box, {7, 64, 64, 2});
    for (Engine e : {Engine::Brute, Engine::Rah, Engine::Crsh}) {
        const RenderResult one = render(scene, with_engine(e, 1));
        const RenderResult three = render(scene, with_engine(e, 3));
        CHECK(one.image.radiance == three.image.radiance);
        CHECK(to_json(one.stats) == to_json(three.stats));
    }
}

TEST_CASE("small triangle batches give the same image")
{
    Scene scene = build_fixture(FixtureKind::Box, {7, 48, 48, 2});
    const RenderResult whole = render(scene);
    scene.settings.triangle_batch_size = 100;
    const RenderResult split = render(scene);
    CHECK(max_abs_diff(whole.image, split.image) < 1e-12);
    CHECK(whole.stats.brute_force_equivalent == split.stats.brute_force_equivalent);
}

TEST_CASE("work ordering holds at every bounce depth")
{
    for (int bounces : {0, 1, 2}) {
        for (FixtureKind kind : {FixtureKind::Box, FixtureKind::Slab}) {
            const std::string name = to_string(kind);
            CAPTURE(bounces);
            CAPTURE(name);
            const Scene scene = build_fixture(kind, {7, 40, 40, bounces});
            const RenderResult brute = render(scene, with_engine(Engine::Brute));
            const RenderResult rah = render(scene, with_engine(Engine::Rah));
            const RenderResult crsh = render(scene, with_engine(Engine::Crsh));
            CHECK(max_abs_diff(brute.image, crsh.image) < 1e-4);
            CHECK(crsh.stats.total_tests() <= rah.stats.total_tests());
            CHECK(rah.stats.total_tests() <= brute.stats.total_tests());
            if (bounces == 0) {
                CHECK(brute.stats.ray_counts.at("shadow") > 0);
                CHECK(brute.stats.ray_counts.at("reflection") == 0);
                CHECK(brute.stats.ray_counts.at("refraction") == 0);
            }
        }
    }
}

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "crsh/error.hpp"
#include "crsh/ray_pipeline.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace crsh;

namespace {

SurfacePoint surface(const Vec3& p, const Vec3& n, const Vec3& incoming, std::uint32_t material = 0)
{
    SurfacePoint s;
    s.valid = true;
    s.position = p;
    s.normal = n;
    s.incoming = incoming;
    s.material_id = material;
    return s;
}

Aabb unit_box()
{
    Aabb box;
    box.extend({-1, -1, -1});
    box.extend({1, 1, 1});
    return box;
}

} // namespace

TEST_CASE("shadow ray runs from the light to the shaded point")
{
    Scene scene;
    scene.materials.push_back(Material{});
    add_light(scene, {0, 0, 10}, {1, 1, 1});
    const std::vector<SurfacePoint> pts{surface({0, 0, 0}, {0, 0, 1}, {0, 0, -1})};
    const GeneratedRays g = generate_secondary_rays(pts, scene, RayKind::Shadow, HashLayout{}, unit_box());
    REQUIRE(g.rays.size() == 1);
    CHECK(g.empty_flags[0] == 0);
    const Ray& r = g.rays[0];
    CHECK(r.origin == Vec3{0, 0, 10});
    CHECK(length(r.direction - Vec3{0, 0, -1}) < 1e-15);
    CHECK(r.max_t == doctest::Approx(10.0));
    CHECK(r.kind == RayKind::Shadow);
    CHECK(g.keys[0] == hash_shadow_ray(0, {0, 0, -1}));
}

TEST_CASE("shadow slots are light-major and invalid surfaces stay empty")
{
    Scene scene;
    scene.materials.push_back(Material{});
    add_light(scene, {0, 5, 0}, {1, 1, 1});
    add_light(scene, {5, 0, 0}, {1, 1, 1});
    std::vector<SurfacePoint> pts{surface({0, 0, 0}, {0, 1, 0}, {0, -1, 0}), SurfacePoint{},
                                  surface({1, 0, 0}, {0, 1, 0}, {0, -1, 0})};
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
        pts[i].pixel = 10 + i;
    }
    const GeneratedRays g = generate_secondary_rays(pts, scene, RayKind::Shadow, HashLayout{}, unit_box());
    REQUIRE(g.rays.size() == 6);
    CHECK(g.empty_flags == U32Array{0, 1, 0, 0, 1, 0});
    for (std::size_t slot : {0u, 2u, 3u, 5u}) {
        CHECK(g.rays[slot].slot == slot);
        CHECK(g.rays[slot].light == slot / 3);
        CHECK(g.rays[slot].pixel == 10 + slot % 3);
    }
    // A surface sitting on the light yields no ray.
    const std::vector<SurfacePoint> on_light{surface({0, 5, 0}, {0, 1, 0}, {0, -1, 0})};
    const GeneratedRays z = generate_secondary_rays(on_light, scene, RayKind::Shadow, HashLayout{}, unit_box());
    CHECK(z.empty_flags[0] == 1);
    CHECK(z.empty_flags[1] == 0);
}

TEST_CASE("reflection and refraction rays")
{
    Scene scene;
    Material mirror;
    mirror.reflectivity = 0.5;
    Material glass;
    glass.transmissivity = 0.9;
    glass.ior = 1.5;
    scene.materials = {Material{}, mirror, glass};

    const Vec3 in = normalize(Vec3{1, -1, 0});
    const std::vector<SurfacePoint> pts{surface({0, 0, 0}, {0, 1, 0}, in, 0), surface({0, 0, 0}, {0, 1, 0}, in, 1),
                                        surface({0, 0, 0}, {0, 1, 0}, in, 2)};
    const GeneratedRays refl = generate_secondary_rays(pts, scene, RayKind::Reflection, HashLayout{}, unit_box());
    CHECK(refl.empty_flags == U32Array{1, 0, 1});
    CHECK(length(refl.rays[1].direction - normalize(Vec3{1, 1, 0})) < 1e-15);
    CHECK(refl.rays[1].throughput == Rgb{0.5, 0.5, 0.5});
    CHECK(refl.rays[1].origin == Vec3{0, 0, 0});

    const GeneratedRays refr = generate_secondary_rays(pts, scene, RayKind::Refraction, HashLayout{}, unit_box());
    CHECK(refr.empty_flags == U32Array{1, 1, 0});
    const Vec3 t = refr.rays[2].direction;
    // Snell: sin(out) = sin(45 deg) / 1.5.
    CHECK(std::hypot(t.x, t.z) == doctest::Approx(std::sin(std::numbers::pi / 4) / 1.5));
    CHECK(t.y < 0.0);

    CHECK(length(reflect({0, 0, -1}, {0, 0, 1}) - Vec3{0, 0, 1}) < 1e-15);
    // Grazing exit from glass is total internal reflection.
    CHECK_FALSE(refract(normalize(Vec3{1, -0.2, 0}), {0, 1, 0}, 1.5).has_value());
    CHECK_THROWS_AS(generate_secondary_rays(pts, scene, RayKind::Primary, HashLayout{}, unit_box()), InvalidArgument);
}

TEST_CASE("shadow hash fields")
{
    // theta 0 sits in the first band; phi 0 maps to the middle of the phi range.
    CHECK(hash_shadow_ray(0, {0, 0, 1}) == 8191u);
    CHECK(hash_shadow_ray(1, {0, 0, 1}) >= (1u << 28));
    CHECK(hash_shadow_ray(1, {0, 0, 1}) - hash_shadow_ray(0, {0, 0, 1}) == (1u << 28));
    CHECK((hash_shadow_ray(15, {0, 0, -1}) >> 28) == 15u);
    CHECK_THROWS_AS(hash_shadow_ray(16, {0, 0, 1}), ConfigLimitError);

    const Vec3 a = normalize(Vec3{0.3, 0.4, 0.5});
    const Vec3 b = normalize(Vec3{0.3, 0.4, 0.5} + Vec3{1e-9, 0, 0});
    CHECK(hash_shadow_ray(2, a) == hash_shadow_ray(2, b));

    // Keys order by theta band first.
    std::mt19937_64 rng(4);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 d1 = oracle::random_unit(rng);
        const Vec3 d2 = oracle::random_unit(rng);
        const double t1 = std::floor(std::acos(d1.z) / std::numbers::pi * 16383);
        const double t2 = std::floor(std::acos(d2.z) / std::numbers::pi * 16383);
        if (t1 < t2) {
            CHECK(hash_shadow_ray(0, d1) < hash_shadow_ray(0, d2));
        }
    }
}

TEST_CASE("bounce hash quantizes origin then direction")
{
    const Aabb box = unit_box();
    CHECK(hash_bounce_ray({-1, -1, -1}, {0, 0, 1}, box) == 255u);
    const std::uint32_t top = hash_bounce_ray({1, 1, 1}, {0, 0, 1}, box);
    CHECK((top >> 17) == 0x7fffu);
    // Outside the box clamps to the border cell.
    CHECK(hash_bounce_ray({5, 5, 5}, {0, 0, 1}, box) == top);

    Aabb flat;
    flat.extend({0, 0, 0});
    flat.extend({1, 1, 0});
    CHECK((hash_bounce_ray({0.99, 0, 3}, {0, 0, 1}, flat) >> 17) == (31u << 10));
}

TEST_CASE("hash layout parsing")
{
    const HashLayout l = HashLayout::parse("4,6,7,4,6,7");
    CHECK(l.theta_bits == 6);
    CHECK(l.to_string() == "4,6,7,4,6,7");
    CHECK(HashLayout{}.to_string() == "4,14,14,5,8,9");
    CHECK_THROWS_AS(HashLayout::parse("4,20,14,5,8,9"), ConfigLimitError);
    CHECK_THROWS_AS(HashLayout::parse("4,14,14,8,8,9"), ConfigLimitError);
    CHECK_THROWS_AS(HashLayout::parse("4,0,14,5,8,9"), ConfigLimitError);
    CHECK_THROWS_AS(HashLayout::parse("4,14"), InvalidArgument);
    CHECK_THROWS_AS(HashLayout::parse("a,14,14,5,8,9"), InvalidArgument);
}

TEST_CASE("chunk compression example")
{
    const U32Array keys{5, 5, 3, 3, 3, 9};
    const Chunks c = compress_chunks(keys);
    CHECK(c.keys == U32Array{5, 3, 9});
    CHECK(c.base == U32Array{0, 2, 5});
    CHECK(c.size == U32Array{2, 3, 1});

    const Chunks s = sort_chunks(c);
    CHECK(s.keys == U32Array{3, 5, 9});
    CHECK(s.base == U32Array{2, 0, 5});
    CHECK(s.size == U32Array{3, 2, 1});

    const auto [k, v] = decompress_chunks(s, U32Array{0, 1, 2, 3, 4, 5});
    CHECK(k == U32Array{3, 3, 3, 5, 5, 9});
    CHECK(v == U32Array{2, 3, 4, 0, 1, 5});

    CHECK(compress_chunks(U32Array{}).count() == 0);
    CHECK_THROWS_AS(decompress_chunks(s, U32Array{0, 1}), InvalidArgument);
}

TEST_CASE("chunked sort equals a stable sort")
{
    std::mt19937_64 rng(8);
    for (int max : {3, 40, 100000}) {
        std::uniform_int_distribution<std::uint32_t> d(0, static_cast<std::uint32_t>(max));
        // Runs of repeated keys like hashed coherent rays.
        U32Array keys;
        while (keys.size() < 100000) {
            const std::uint32_t k = d(rng);
            const std::size_t run = 1 + rng() % 12;
            keys.insert(keys.end(), run, k);
        }
        keys.resize(100000);
        U32Array values(keys.size());
        std::iota(values.begin(), values.end(), 0u);
        const auto expected = oracle::stable_sort_pairs(keys, values);
        for (unsigned threads : {1u, 4u}) {
            const Executor ex{threads};
            const Chunks c = compress_chunks(keys, ex);
            std::uint64_t covered = 0;
            for (std::size_t i = 0; i < c.count(); ++i) {
                covered += c.size[i];
                CHECK(keys[c.base[i]] == c.keys[i]);
            }
            CHECK(covered == keys.size());
            const auto got = sort_and_decompress(c, values, ex);
            CHECK(got.first == expected.first);
            CHECK(got.second == expected.second);
        }
    }
}

TEST_CASE("reorder_rays")
{
    std::vector<Ray> rays(5);
    for (std::uint32_t i = 0; i < 5; ++i) {
        rays[i].slot = i;
    }
    const auto same = reorder_rays(rays, U32Array{0, 1, 2, 3, 4});
    const auto rev = reorder_rays(rays, U32Array{4, 3, 2, 1, 0});
    for (std::uint32_t i = 0; i < 5; ++i) {
        CHECK(same[i].slot == i);
        CHECK(rev[i].slot == 4 - i);
    }
    // Applying a permutation then its inverse restores the order.
    const U32Array perm{2, 0, 4, 1, 3};
    U32Array inverse(5);
    for (std::uint32_t i = 0; i < 5; ++i) {
        inverse[perm[i]] = i;
    }
    const auto back = reorder_rays(reorder_rays(rays, perm), inverse);
    for (std::uint32_t i = 0; i < 5; ++i) {
        CHECK(back[i].slot == i);
    }
}

TEST_CASE("trim_rays keeps survivors in slot order")
{
    GeneratedRays g;
    g.rays.resize(5);
    for (std::uint32_t i = 0; i < 5; ++i) {
        g.rays[i].slot = i;
    }
    g.keys = {10, 11, 12, 13, 14};
    g.empty_flags = {1, 0, 0, 1, 0};
    const RayBatch b = trim_rays(g);
    REQUIRE(b.count() == 3);
    CHECK(b.keys == U32Array{11, 12, 14});
    CHECK(b.values == U32Array{0, 1, 2});
    CHECK(b.rays[0].slot == 1);
    CHECK(b.rays[2].slot == 4);
}

TEST_CASE("pair dumps are CSV rows")
{
    std::ostringstream out;
    dump_pairs_csv(out, "sorted", U32Array{7, 8}, U32Array{1, 0});
    CHECK(out.str() == "sorted,0,7,1\nsorted,1,8,0\n");
}

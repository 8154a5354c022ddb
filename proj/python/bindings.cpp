#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "crsh/cli.hpp"
#include "crsh/error.hpp"
#include "crsh/fixtures.hpp"
#include "crsh/geom.hpp"
#include "crsh/image.hpp"
#include "crsh/prims.hpp"
#include "crsh/ray_pipeline.hpp"
#include "crsh/rsh.hpp"
#include "crsh/stats.hpp"
#include "crsh/tracer.hpp"

namespace py = pybind11;
using namespace crsh;

namespace {

using Triple = std::array<double, 3>;

Vec3 vec(const Triple& t)
{
    return {t[0], t[1], t[2]};
}

Triple triple(const Vec3& v)
{
    return {v.x, v.y, v.z};
}

py::dict stats_dict(const StatsReport& report)
{
    py::module_ json = py::module_::import("json");
    return json.attr("loads")(to_json(report, true).dump());
}

py::array_t<double> image_array(const FrameImage& image)
{
    py::array_t<double> out({image.height, image.width, 3});
    auto view = out.mutable_unchecked<3>();
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const Rgb& c = image.at(x, y);
            view(y, x, 0) = c.r;
            view(y, x, 1) = c.g;
            view(y, x, 2) = c.b;
        }
    }
    return out;
}

Cone cone_of(const Triple& axis, double half_angle)
{
    return {normalize(vec(axis)), half_angle};
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Coherent ray-space hierarchy ray tracer";

    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<ConfigLimitError>(m, "ConfigLimitError", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    m.def(
        "ray_triangle_intersect",
        [](const Triple& origin, const Triple& direction, const Triple& v0, const Triple& v1, const Triple& v2,
           double max_t) -> std::optional<double> {
            Ray ray;
            ray.origin = vec(origin);
            ray.direction = vec(direction);
            ray.max_t = max_t;
            Triangle tri{vec(v0), vec(v1), vec(v2)};
            const auto hit = ray_triangle_intersect(ray, tri);
            return hit ? std::optional<double>(hit->t) : std::nullopt;
        },
        py::arg("origin"), py::arg("direction"), py::arg("v0"), py::arg("v1"), py::arg("v2"),
        py::arg("max_t") = kInfinity, "Parametric distance of the hit, or None.");

    m.def(
        "minimal_enclosing_sphere",
        [](const std::vector<Triple>& points) {
            std::vector<Vec3> pts;
            for (const Triple& p : points) {
                pts.push_back(vec(p));
            }
            const Sphere s = minimal_enclosing_sphere(pts);
            return py::make_tuple(triple(s.center), s.radius);
        },
        "Returns (center, radius).");

    m.def(
        "cone_grow",
        [](const Triple& axis, double half_angle, const Triple& direction) {
            const Cone c = cone_grow(cone_of(axis, half_angle), normalize(vec(direction)));
            return py::make_tuple(triple(c.axis), c.half_angle);
        },
        "Returns (axis, half_angle) of the grown cone.");

    m.def(
        "cone_union",
        [](const Triple& a_axis, double a_half, const Triple& b_axis, double b_half) {
            const Cone c = cone_union(cone_of(a_axis, a_half), cone_of(b_axis, b_half));
            return py::make_tuple(triple(c.axis), c.half_angle);
        });

    m.def("sphere_union", [](const Triple& a_center, double a_radius, const Triple& b_center, double b_radius) {
        const Sphere s = sphere_union({vec(a_center), a_radius}, {vec(b_center), b_radius});
        return py::make_tuple(triple(s.center), s.radius);
    });

    m.def(
        "cone_sphere_test",
        [](const Triple& center, double radius, const Triple& axis, double half_angle, const Triple& target_center,
           double target_radius) {
            return cone_sphere_test({vec(center), radius}, cone_of(axis, half_angle),
                                    {vec(target_center), target_radius});
        },
        "Conservative node-versus-sphere test.");

    m.def("pack_hit", &pack_hit, py::arg("node"), py::arg("triangle"));
    m.def("unpack_hit", [](std::uint32_t packed) {
        const UnpackedHit h = unpack_hit(packed);
        return py::make_tuple(h.node, h.triangle);
    });

    m.def(
        "hash_shadow_ray",
        [](std::uint32_t light, const Triple& direction, const std::string& layout) {
            return hash_shadow_ray(light, normalize(vec(direction)),
                                   layout.empty() ? HashLayout{} : HashLayout::parse(layout));
        },
        py::arg("light"), py::arg("direction"), py::arg("layout") = "");

    m.def("inclusive_scan", [](const U32Array& in) { return inclusive_scan(in); });
    m.def("exclusive_scan", [](const U32Array& in) { return exclusive_scan(in); });
    m.def("radix_sort_pairs", [](const U32Array& keys, const U32Array& values) {
        auto [k, v] = radix_sort_pairs(keys, values);
        return py::make_tuple(k, v);
    });
    m.def("trim_compact", [](const U32Array& flags, const U32Array& keys, const U32Array& values) {
        auto [k, v] = trim_compact(flags, keys, values);
        return py::make_tuple(k, v);
    });
    m.def(
        "compress_sort_decompress",
        [](const U32Array& keys, const U32Array& values) {
            auto [k, v] = sort_and_decompress(compress_chunks(keys), values);
            return py::make_tuple(k, v);
        },
        "Chunked stable sort of (key, value) pairs.");

    py::class_<Scene>(m, "Scene")
        .def_property_readonly("triangle_count", &Scene::triangle_count)
        .def_property_readonly("mesh_count", [](const Scene& s) { return s.meshes.size(); })
        .def_property_readonly("light_count", [](const Scene& s) { return s.lights.size(); })
        .def_property_readonly("mesh_bounds", [](const Scene& s) {
            std::vector<py::tuple> out;
            for (const Mesh& mesh : s.meshes) {
                out.push_back(py::make_tuple(triple(mesh.bound.center), mesh.bound.radius));
            }
            return out;
        });

    m.def("load_scene", [](const std::string& path) { return load_scene(path); });
    m.def(
        "build_fixture",
        [](const std::string& name, std::uint64_t seed, int width, int height, int bounces) {
            return build_fixture(parse_fixture(name), {seed, width, height, bounces});
        },
        py::arg("name"), py::arg("seed") = FixtureOptions{}.seed, py::arg("width") = 256, py::arg("height") = 256,
        py::arg("bounces") = 2);
    m.def(
        "write_fixtures",
        [](const std::string& dir, std::uint64_t seed) {
            std::vector<std::string> out;
            for (const auto& p : build_fixture_scenes(dir, {seed})) {
                out.push_back(p.string());
            }
            return out;
        },
        py::arg("dir"), py::arg("seed") = FixtureOptions{}.seed);

    m.def(
        "render",
        [](const Scene& scene, const std::string& engine, unsigned threads, const std::string& hash_layout) {
            RenderOptions options;
            options.engine = parse_engine(engine);
            options.executor.threads = std::max(1u, threads);
            if (!hash_layout.empty()) {
                options.layout = HashLayout::parse(hash_layout);
            }
            RenderResult result;
            {
                py::gil_scoped_release release;
                result = render(scene, options);
            }
            return py::make_tuple(image_array(result.image), stats_dict(result.stats));
        },
        py::arg("scene"), py::arg("engine") = "crsh", py::arg("threads") = Executor::default_threads(),
        py::arg("hash_layout") = "", "Returns (image HxWx3 linear radiance, stats dict).");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out;
            std::ostringstream err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        "Returns (exit code, stdout, stderr).");
}

#include "crsh/cli.hpp"

#include <algorithm>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "crsh/error.hpp"
#include "crsh/fixtures.hpp"
#include "crsh/image.hpp"
#include "crsh/tracer.hpp"

namespace crsh {

namespace {

struct CliOptions {
    std::string scene;
    std::string fixture;
    std::string engine = "crsh";
    std::string image;
    std::string stats;
    std::string stats_format;
    std::optional<int> width;
    std::optional<int> height;
    std::optional<int> bounces;
    std::optional<int> levels;
    std::optional<int> branching;
    std::optional<int> triangle_batch;
    unsigned threads = Executor::default_threads();
    std::uint64_t seed = FixtureOptions{}.seed;
    std::string hash_layout;
    std::string make_fixtures;
    std::string debug_dir;
    bool timings = false;
    bool literal_cone_test = false;
};

StatsFormat format_for(const CliOptions& o)
{
    if (!o.stats_format.empty()) {
        return parse_stats_format(o.stats_format);
    }
    const std::string ext = std::filesystem::path(o.stats).extension().string();
    return ext == ".csv" ? StatsFormat::Csv : StatsFormat::Json;
}

int run(const CliOptions& o, std::ostream& out)
{
    FixtureOptions fixture_options;
    fixture_options.seed = o.seed;
    fixture_options.width = o.width.value_or(fixture_options.width);
    fixture_options.height = o.height.value_or(fixture_options.height);
    fixture_options.bounces = o.bounces.value_or(fixture_options.bounces);

    if (!o.make_fixtures.empty()) {
        for (const auto& path : build_fixture_scenes(o.make_fixtures, fixture_options)) {
            out << "wrote " << path.string() << '\n';
        }
        if (o.scene.empty() && o.fixture.empty()) {
            return kExitOk;
        }
    }

    RenderOptions options;
    options.engine = parse_engine(o.engine);
    if (!o.hash_layout.empty()) {
        options.layout = HashLayout::parse(o.hash_layout);
    }
    options.executor.threads = std::max(1u, o.threads);
    options.literal_cone_test = o.literal_cone_test;
    options.debug_dir = o.debug_dir;

    Scene scene = o.scene.empty() ? build_fixture(parse_fixture(o.fixture), fixture_options) : load_scene(o.scene);
    if (o.width) scene.camera.width = *o.width;
    if (o.height) scene.camera.height = *o.height;
    if (o.bounces) scene.settings.bounce_depth = *o.bounces;
    if (o.levels) scene.settings.hierarchy_levels = *o.levels;
    if (o.branching) scene.settings.branching = *o.branching;
    if (o.triangle_batch) scene.settings.triangle_batch_size = *o.triangle_batch;

    const RenderResult result = render(scene, options);
    if (!o.image.empty()) {
        write_ppm(result.image, o.image);
    }
    if (!o.stats.empty()) {
        emit_stats(result.stats, format_for(o), o.stats, o.timings);
    }
    const StatsReport& s = result.stats;
    out << s.engine << ": " << s.total_tests() << " tests of " << s.brute_force_equivalent << " brute force ("
        << s.relative_percent() << "%)\n";
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Whitted ray tracer with brute force, unsorted and sorted ray-hierarchy engines", "crsh_render"};
    CliOptions o;
    app.add_option("--scene", o.scene, "Scene configuration (JSON)");
    app.add_option("--fixture", o.fixture, "Render a built-in fixture instead: box, rooms or slab");
    app.add_option("--engine", o.engine, "brute, rah or crsh")->capture_default_str();
    app.add_option("--image", o.image, "Output image (binary PPM)");
    app.add_option("--stats", o.stats, "Output statistics file");
    app.add_option("--stats-format", o.stats_format, "json or csv (default from the file extension)");
    app.add_option("--width", o.width, "Image width");
    app.add_option("--height", o.height, "Image height");
    app.add_option("--bounces", o.bounces, "Reflection/refraction depth");
    app.add_option("--levels", o.levels, "Hierarchy levels");
    app.add_option("--branching", o.branching, "Hierarchy branching factor");
    app.add_option("--triangle-batch", o.triangle_batch, "Triangles per traversal batch (at most 16384)");
    app.add_option("--threads", o.threads, "Worker threads")->capture_default_str();
    app.add_option("--seed", o.seed, "Seed for procedural fixtures")->capture_default_str();
    app.add_option("--hash-layout", o.hash_layout, "Hash bits: light,theta,phi,origin,btheta,bphi");
    app.add_option("--make-fixtures", o.make_fixtures, "Write the BOX, ROOMS and SLAB fixtures into DIR");
    app.add_option("--debug-dir", o.debug_dir, "Dump G-buffer, sorted pairs and hierarchies into DIR");
    app.add_flag("--timings", o.timings, "Include per-stage milliseconds in the stats");
    app.add_flag("--literal-cone-test", o.literal_cone_test, "Use the literal cone formula (not conservative)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (o.scene.empty() == o.fixture.empty() && o.make_fixtures.empty()) {
        err << "error: give exactly one of --scene or --fixture\n";
        return kExitUsage;
    }
    if (!o.scene.empty() && !o.fixture.empty()) {
        err << "error: --scene and --fixture are mutually exclusive\n";
        return kExitUsage;
    }

    try {
        return run(o, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ConfigLimitError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigLimit;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace crsh

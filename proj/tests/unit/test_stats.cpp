#include <doctest.h>

#include <fstream>
#include <sstream>

#include "crsh/error.hpp"
#include "crsh/stats.hpp"
#include "tmpdir.hpp"

using namespace crsh;

namespace {

StatsReport sample()
{
    StatsReport r;
    r.engine = "crsh";
    r.width = 4;
    r.height = 2;
    r.triangles = 10;
    r.ray_counts = {{"shadow", 8}, {"reflection", 3}, {"refraction", 0}};
    r.per_level = {{40, 30, 10}, {12, 8, 4}};
    r.mesh = {2, 1, 1};
    r.final_tests = {20, 15, 5};
    r.brute_force_equivalent = 110;
    return r;
}

std::size_t count_fields(const std::string& line)
{
    return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

} // namespace

TEST_CASE("relative percent at published magnitudes")
{
    StatsReport r;
    r.final_tests.intersections = 53578192;
    r.brute_force_equivalent = 606911976;
    CHECK(r.relative_percent() == doctest::Approx(8.83).epsilon(5e-4));

    r.final_tests.intersections = 72869648;
    CHECK(r.relative_percent() == doctest::Approx(12.01).epsilon(5e-4));

    // Counts beyond 32 bits survive.
    r.final_tests.intersections = 9133132168ull;
    r.brute_force_equivalent = 9133132168ull * 2;
    CHECK(r.total_tests() == 9133132168ull);
    CHECK(r.relative_percent() == doctest::Approx(50.0));
    const StatsReport back = stats_from_json(to_json(r));
    CHECK(back.final_tests.intersections == 9133132168ull);
}

TEST_CASE("empty frame reports zero percent")
{
    const StatsReport r;
    CHECK(r.total_tests() == 0);
    CHECK(r.relative_percent() == 0.0);
}

TEST_CASE("totals sum every stage")
{
    const StatsReport r = sample();
    CHECK(r.total_tests() == 40 + 12 + 2 + 20);
    CHECK(r.relative_percent() == doctest::Approx(100.0 * 74 / 110));
}

TEST_CASE("JSON layout and round trip")
{
    StatsReport r = sample();
    r.per_stage_millis = {{"shading", 1.5}};
    const nlohmann::json doc = to_json(r);
    CHECK_FALSE(doc.contains("perStageMillis"));
    CHECK(to_json(r, true).contains("perStageMillis"));
    r.per_stage_millis["tracing"] = 4.5;
    CHECK(to_json(r, true)["perStagePercent"]["tracing"] == doctest::Approx(75.0));
    r.per_stage_millis.erase("tracing");
    CHECK(doc["perLevel"][0]["level"] == 1);
    CHECK(doc["perLevel"][1]["level"] == 0);
    CHECK(doc["totalTests"] == 74);
    CHECK(doc["rayCounts"]["shadow"] == 8);
    CHECK(doc["meshCulling"]["hits"] == 1);

    const StatsReport back = stats_from_json(to_json(r, true));
    CHECK(back.engine == "crsh");
    CHECK(back.per_level == r.per_level);
    CHECK(back.mesh == r.mesh);
    CHECK(back.final_tests == r.final_tests);
    CHECK(back.ray_counts == r.ray_counts);
    CHECK(back.brute_force_equivalent == 110);
    CHECK(back.per_stage_millis.at("shading") == 1.5);
    CHECK(to_json(back) == doc);

    CHECK_THROWS_AS(stats_from_json(nlohmann::json::parse(R"({"engine":"crsh"})")), IoError);
}

TEST_CASE("CSV rows")
{
    const std::string csv = to_csv(sample());
    std::istringstream in(csv);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        lines.push_back(line);
    }
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "engine,level,intersections,misses,hits,totalTests,bruteEquivalent,relativePercent");
    CHECK(lines[1].rfind("crsh,mesh,2,1,1,74,110,", 0) == 0);
    CHECK(lines[2].rfind("crsh,1,12,8,4,", 0) == 0);
    CHECK(lines[3].rfind("crsh,0,40,30,10,", 0) == 0);
    CHECK(lines[4].rfind("crsh,final,20,15,5,", 0) == 0);
    for (const auto& l : lines) {
        CHECK(count_fields(l) == 8);
    }
}

TEST_CASE("emit_stats writes either format")
{
    TempDir dir;
    const StatsReport r = sample();
    emit_stats(r, StatsFormat::Json, dir / "s.json");
    emit_stats(r, StatsFormat::Csv, dir / "s.csv");
    std::ifstream js(dir / "s.json");
    CHECK(stats_from_json(nlohmann::json::parse(js)).total_tests() == 74);
    std::ifstream cs(dir / "s.csv");
    std::string header;
    std::getline(cs, header);
    CHECK(header.rfind("engine,", 0) == 0);
    CHECK_THROWS_AS(emit_stats(r, StatsFormat::Json, dir.path / "no" / "s.json"), IoError);
    CHECK(parse_stats_format("csv") == StatsFormat::Csv);
    CHECK_THROWS_AS(parse_stats_format("xml"), InvalidArgument);
}

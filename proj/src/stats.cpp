#include "crsh/stats.hpp"

#include <fstream>
#include <sstream>

#include "crsh/error.hpp"

namespace crsh {

std::uint64_t StatsReport::total_tests() const
{
    std::uint64_t total = mesh.intersections + final_tests.intersections;
    for (const LevelCounters& c : per_level) {
        total += c.intersections;
    }
    return total;
}

double StatsReport::relative_percent() const
{
    if (brute_force_equivalent == 0) {
        return 0.0;
    }
    return 100.0 * static_cast<double>(total_tests()) / static_cast<double>(brute_force_equivalent);
}

StatsFormat parse_stats_format(std::string_view text)
{
    if (text == "json") {
        return StatsFormat::Json;
    }
    if (text == "csv") {
        return StatsFormat::Csv;
    }
    throw InvalidArgument("unknown stats format '" + std::string(text) + "' (expected json or csv)");
}

namespace {

nlohmann::json counters_json(const LevelCounters& c)
{
    return {{"intersections", c.intersections}, {"misses", c.misses}, {"hits", c.hits}};
}

LevelCounters counters_from(const nlohmann::json& j)
{
    return {j.at("intersections").get<std::uint64_t>(), j.at("misses").get<std::uint64_t>(),
            j.at("hits").get<std::uint64_t>()};
}

} // namespace

nlohmann::json to_json(const StatsReport& report, bool include_timings)
{
    nlohmann::json doc;
    doc["engine"] = report.engine;
    doc["width"] = report.width;
    doc["height"] = report.height;
    doc["triangles"] = report.triangles;
    doc["rayCounts"] = report.ray_counts;
    auto levels = nlohmann::json::array();
    for (std::size_t k = report.per_level.size(); k-- > 0;) {
        auto entry = counters_json(report.per_level[k]);
        entry["level"] = k;
        levels.push_back(std::move(entry));
    }
    doc["perLevel"] = std::move(levels);
    doc["meshCulling"] = counters_json(report.mesh);
    doc["finalRayTriTests"] = report.final_tests.intersections;
    doc["finalRayTriHits"] = report.final_tests.hits;
    doc["totalTests"] = report.total_tests();
    doc["bruteForceEquivalent"] = report.brute_force_equivalent;
    doc["relativePercent"] = report.relative_percent();
    if (include_timings) {
        doc["perStageMillis"] = report.per_stage_millis;
        double total = 0.0;
        for (const auto& [stage, ms] : report.per_stage_millis) {
            total += ms;
        }
        auto percent = nlohmann::json::object();
        for (const auto& [stage, ms] : report.per_stage_millis) {
            percent[stage] = total > 0.0 ? 100.0 * ms / total : 0.0;
        }
        doc["perStagePercent"] = std::move(percent);
    }
    return doc;
}

StatsReport stats_from_json(const nlohmann::json& doc)
{
    StatsReport r;
    try {
        r.engine = doc.at("engine").get<std::string>();
        r.width = doc.value("width", 0);
        r.height = doc.value("height", 0);
        r.triangles = doc.value("triangles", std::uint64_t{0});
        r.ray_counts = doc.value("rayCounts", std::map<std::string, std::uint64_t>{});
        for (const auto& entry : doc.at("perLevel")) {
            const std::size_t level = entry.at("level").get<std::size_t>();
            if (r.per_level.size() <= level) {
                r.per_level.resize(level + 1);
            }
            r.per_level[level] = counters_from(entry);
        }
        r.mesh = counters_from(doc.at("meshCulling"));
        r.final_tests.intersections = doc.at("finalRayTriTests").get<std::uint64_t>();
        r.final_tests.hits = doc.value("finalRayTriHits", std::uint64_t{0});
        r.final_tests.misses = r.final_tests.intersections - r.final_tests.hits;
        r.brute_force_equivalent = doc.at("bruteForceEquivalent").get<std::uint64_t>();
        r.per_stage_millis = doc.value("perStageMillis", std::map<std::string, double>{});
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed stats document: ") + e.what());
    }
    return r;
}

std::string to_csv(const StatsReport& report)
{
    std::ostringstream out;
    out.precision(17);
    const auto total = report.total_tests();
    const auto row = [&](const std::string& level, const LevelCounters& c) {
        out << report.engine << ',' << level << ',' << c.intersections << ',' << c.misses << ',' << c.hits << ','
            << total << ',' << report.brute_force_equivalent << ',' << report.relative_percent() << '\n';
    };
    out << "engine,level,intersections,misses,hits,totalTests,bruteEquivalent,relativePercent\n";
    row("mesh", report.mesh);
    for (std::size_t k = report.per_level.size(); k-- > 0;) {
        row(std::to_string(k), report.per_level[k]);
    }
    row("final", report.final_tests);
    return out.str();
}

void emit_stats(const StatsReport& report, StatsFormat format, const std::filesystem::path& path,
                bool include_timings)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write stats '" + path.string() + "'");
    }
    if (format == StatsFormat::Json) {
        out << to_json(report, include_timings).dump(2) << '\n';
    } else {
        out << to_csv(report);
    }
    if (!out) {
        throw IoError("failed while writing stats '" + path.string() + "'");
    }
}

} // namespace crsh

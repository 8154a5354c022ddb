#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "crsh/rsh.hpp"

namespace crsh {

/// Intersection-test accounting for one rendered frame.
struct StatsReport {
    std::string engine;
    int width = 0;
    int height = 0;
    std::uint64_t triangles = 0;
    /// Secondary rays traced, by kind name.
    std::map<std::string, std::uint64_t> ray_counts;
    /// Node versus triangle-sphere tests, indexed by hierarchy level (0 = bottom).
    std::vector<LevelCounters> per_level;
    /// Top-level node versus mesh-sphere tests.
    LevelCounters mesh;
    /// Exact ray-triangle tests.
    LevelCounters final_tests;
    /// Sum over ray batches of rays x triangles.
    std::uint64_t brute_force_equivalent = 0;
    /// Wall-clock per stage; hardware dependent, never compared.
    std::map<std::string, double> per_stage_millis;

    std::uint64_t total_tests() const;
    /// 100 * total_tests / brute_force_equivalent, or 0 for an empty frame.
    double relative_percent() const;
};

enum class StatsFormat { Json, Csv };

StatsFormat parse_stats_format(std::string_view text);

/// Timings are left out unless requested so repeated runs stay byte-identical.
nlohmann::json to_json(const StatsReport& report, bool include_timings = false);
StatsReport stats_from_json(const nlohmann::json& doc);

/// Columns: engine,level,intersections,misses,hits,totalTests,bruteEquivalent,relativePercent.
/// Rows for "mesh", every hierarchy level (top first) and "final".
std::string to_csv(const StatsReport& report);

/// Throws IoError when the file cannot be written.
void emit_stats(const StatsReport& report, StatsFormat format, const std::filesystem::path& path,
                bool include_timings = false);

} // namespace crsh

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "pfara/network.hpp"
#include "pfara/simulator.hpp"

namespace pfara {

/// Distinct vehicles whose trace includes each edge. Edges nobody used are absent.
using EdgeUsage = std::map<EdgeId, int>;

EdgeUsage edge_usage(const SimulationResult& result);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Layout = std::map<VertexId, Point>;

/// Positions for make_grid(rows, cols, ...): column -> x, row -> y.
Layout grid_layout(int rows, int cols, double spacing);
/// Vertices evenly spaced on a circle, for networks without coordinates.
Layout circle_layout(std::int32_t vertex_count, double radius);
Layout load_layout(const std::filesystem::path& path);
void save_layout(const Layout& layout, const std::filesystem::path& path);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// Inferno ramp at t in [0, 1], interpolated linearly between table entries.
Rgb inferno(double t);
/// Color of an edge used by `usage` vehicles when the busiest edge has `max_usage`.
Rgb usage_color(int usage, int max_usage);

std::string heatmap_svg(const RoadNetwork& net, const EdgeUsage& usage, const Layout& layout);
void render_heatmap(const RoadNetwork& net, const EdgeUsage& usage, const Layout& layout,
                    const std::filesystem::path& out);

/// vehicle,provider,cost,length_m,time_s,remaining_length,remaining_time,remaining_cost
std::string summary_csv(const SimulationResult& result);

/// Per-vehicle Cost/Time/Length for every algorithm, then one total row per
/// provider and a grand total. Throws MismatchedScenarios when the runs do not
/// cover the same vehicles.
std::string comparison_table(const std::map<Algorithm, SimulationResult>& results);

}  // namespace pfara

#include <gtest/gtest.h>

#include <cmath>
#include <regex>
#include <sstream>

#include "pfara/error.hpp"
#include "pfara/reporting.hpp"
#include "pfara/scenarios.hpp"

using namespace pfara;

namespace {

SimulationResult traced(std::vector<std::vector<EdgeId>> traces) {
    SimulationResult r;
    VehicleId id = 0;
    for (auto& t : traces) {
        VehicleStats v;
        v.id = id++;
        v.trace = std::move(t);
        r.vehicles.push_back(v);
    }
    return r;
}

std::vector<double> row_values(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ','))
        if (col++ >= 2) out.push_back(std::stod(cell));
    return out;
}

}  // namespace

TEST(Usage, CountsDistinctVehicles) {
    EXPECT_TRUE(edge_usage(SimulationResult{}).empty());
    const EdgeUsage u = edge_usage(traced({{0, 1, 2}, {1, 5}, {1, 1}}));
    EXPECT_EQ(u.at(0), 1);
    EXPECT_EQ(u.at(1), 3);
    EXPECT_EQ(u.at(5), 1);
    EXPECT_FALSE(u.contains(3));
}

TEST(Inferno, Endpoints) {
    const Rgb top = inferno(1.0);
    EXPECT_NEAR(top.r, 252, 2);
    EXPECT_NEAR(top.g, 255, 2);
    EXPECT_NEAR(top.b, 164, 2);
    const Rgb bottom = inferno(0.0);
    EXPECT_LT(bottom.r + bottom.g + bottom.b, 20);
}

TEST(Inferno, UsageRamp) {
    const Rgb one = usage_color(1, 7), seven = usage_color(7, 7);
    EXPECT_EQ(one.r, inferno(0).r);
    EXPECT_EQ(seven.g, inferno(1).g);
    const Rgb a = usage_color(3, 3), b = usage_color(3, 3);
    EXPECT_EQ(a.r, b.r);
    const Rgb gray = usage_color(0, 7);
    EXPECT_EQ(gray.r, 0xd9);
    EXPECT_EQ(usage_color(4, 4).b, usage_color(1, 1).b);
}

TEST(Heatmap, DeterministicAndColored) {
    const RoadNetwork g = make_grid(2, 2, 100);
    const EdgeUsage u{{0, 1}, {3, 4}};
    const std::string svg = heatmap_svg(g, u, grid_layout(2, 2, 100));
    EXPECT_EQ(svg, heatmap_svg(g, u, grid_layout(2, 2, 100)));
    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, std::regex("data-edge=\"3\" data-usage=\"4\"[^>]*stroke=\"(#[0-9a-f]{6})\"")));
    const Rgb top = inferno(1);
    char expect[8];
    std::snprintf(expect, sizeof expect, "#%02x%02x%02x", top.r, top.g, top.b);
    EXPECT_EQ(m[1].str(), expect);
    EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n'), 2 + 8 + 1);
}

TEST(Heatmap, MissingCoordinates) {
    const RoadNetwork g = make_grid(2, 2, 100);
    Layout partial = grid_layout(2, 2, 100);
    partial.erase(3);
    try {
        heatmap_svg(g, {}, partial);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingCoordinates);
    }
}

TEST(Layout, RoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "pfara_unit_layout.csv";
    const Layout l = circle_layout(7, 50);
    save_layout(l, path);
    const Layout back = load_layout(path);
    ASSERT_EQ(back.size(), 7u);
    EXPECT_NEAR(back.at(3).x, l.at(3).x, 1e-9);
}

TEST(Comparison, TotalsAddUp) {
    const GridScenario s = random_grid_scenario(8);
    std::map<Algorithm, SimulationResult> results;
    for (Algorithm a : {Algorithm::Pfara, Algorithm::Overlap, Algorithm::Alone})
        results[a] = run(s.net, s.scenario.vehicles, s.scenario.config, a);
    std::stringstream table(comparison_table(results));
    std::string line;
    std::getline(table, line);
    EXPECT_EQ(line.substr(0, 28), "vehicle,provider,pfara_cost,");
    std::vector<double> sum(9, 0.0), all;
    std::map<std::string, std::vector<double>> per_provider, reported;
    while (std::getline(table, line)) {
        const auto v = row_values(line);
        ASSERT_EQ(v.size(), 9u);
        if (line.starts_with("total,all")) {
            all = v;
        } else if (line.starts_with("total,")) {
            reported[line.substr(6, line.find(',', 6) - 6)] = v;
        } else {
            const std::string provider = line.substr(line.find(',') + 1, line.find(',', line.find(',') + 1) - line.find(',') - 1);
            auto& acc = per_provider.try_emplace(provider, std::vector<double>(9, 0.0)).first->second;
            for (std::size_t i = 0; i < 9; ++i) {
                sum[i] += v[i];
                acc[i] += v[i];
            }
        }
    }
    ASSERT_EQ(all.size(), 9u);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(all[i], sum[i], 1e-9 * std::max(1.0, sum[i]));
    EXPECT_EQ(reported.size(), per_provider.size());
    for (const auto& [p, acc] : per_provider)
        for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(reported[p][i], acc[i], 1e-9 * std::max(1.0, acc[i]));
    // Columns are pfara, overlap, alone; costs come first in each triple.
    EXPECT_LE(all[0], all[3] + 1e-9);
    EXPECT_LE(all[3], all[6] + 1e-9);
}

TEST(Comparison, IdenticalRunsAndMismatch) {
    const GridScenario s = corner_scenario();
    const SimulationResult r = run(s.net, s.scenario.vehicles, s.scenario.config, Algorithm::Alone);
    std::map<Algorithm, SimulationResult> same{{Algorithm::Alone, r}, {Algorithm::Overlap, r}};
    std::stringstream table(comparison_table(same));
    std::string line;
    std::getline(table, line);
    while (std::getline(table, line)) {
        const auto v = row_values(line);
        for (int i = 0; i < 3; ++i) EXPECT_EQ(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i + 3)]);
    }
    SimulationResult shorter = r;
    shorter.vehicles.pop_back();
    std::map<Algorithm, SimulationResult> bad{{Algorithm::Alone, r}, {Algorithm::Overlap, shorter}};
    try {
        comparison_table(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MismatchedScenarios);
    }
}

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pfara/error.hpp"
#include "pfara/network.hpp"
#include "pfara/reporting.hpp"
#include "pfara/scenarios.hpp"
#include "pfara/simulator.hpp"

namespace fs = std::filesystem;
using namespace pfara;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitTimeout = 4;

fs::path layout_path(const fs::path& net) {
    fs::path p = net;
    p.replace_extension(".layout.csv");
    return p;
}

// An explicit --layout, else the file written next to the network, else a circle.
Layout layout_for(const RoadNetwork& net, const fs::path& net_path, const std::string& explicit_layout) {
    if (!explicit_layout.empty()) return load_layout(explicit_layout);
    if (fs::exists(layout_path(net_path))) return load_layout(layout_path(net_path));
    return circle_layout(net.vertex_count(), 1000.0);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
}

void write_network(const RoadNetwork& net, const Layout& layout, const fs::path& out) {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_network_csv(net, out);
    save_layout(layout, layout_path(out));
}

struct RunFlags {
    std::string net, scenario, layout, reoptimize;
    double tick = 0.0;
};

Scenario load_with_overrides(const RoadNetwork& net, const RunFlags& f) {
    Scenario s = load_scenario(f.scenario, net);
    if (f.tick > 0.0) s.config.tick_seconds = f.tick;
    if (f.reoptimize == "meetings") s.config.reoptimize = Reoptimize::Meetings;
    else if (f.reoptimize == "every-node") s.config.reoptimize = Reoptimize::EveryNode;
    else if (!f.reoptimize.empty()) throw Error(ErrorKind::Usage, "--reoptimize must be meetings or every-node");
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Platooning simulation: joint route optimization, baselines and reports"};
    app.require_subcommand(1);

    int rows = 5, cols = 5;
    double edge_length = 100.0;
    std::string out;
    auto* grid = app.add_subcommand("generate-grid", "Write a Manhattan grid network and its layout");
    grid->add_option("--rows", rows)->required();
    grid->add_option("--cols", cols)->required();
    grid->add_option("--edge-length", edge_length);
    grid->add_option("--out", out, "network CSV path")->required();

    std::string net_path, zones_path, demand_path;
    std::uint64_t seed = 1;
    auto* density = app.add_subcommand("density", "Synthesize edge densities from zone demand");
    density->add_option("--net", net_path)->required();
    density->add_option("--zones", zones_path)->required();
    density->add_option("--demand", demand_path)->required();
    density->add_option("--seed", seed);
    density->add_option("--out", out)->required();

    std::string kind = "corner";
    auto* make = app.add_subcommand("make-scenario", "Write a built-in scenario (network, layout, scenario JSON)");
    make->add_option("--kind", kind, "corner | slow | tight-length | tight-time | random | city")
        ->check(CLI::IsMember({"corner", "slow", "tight-length", "tight-time", "random", "city"}));
    make->add_option("--seed", seed);
    make->add_option("--out-dir", out)->required();

    RunFlags run_flags;
    std::string algorithm = "pfara";
    auto* simulate = app.add_subcommand("simulate", "Run one algorithm and write events, summary and heat map");
    simulate->add_option("--net", run_flags.net)->required();
    simulate->add_option("--scenario", run_flags.scenario)->required();
    simulate->add_option("--algorithm", algorithm)->check(CLI::IsMember({"pfara", "overlap", "alone"}));
    simulate->add_option("--reoptimize", run_flags.reoptimize)->check(CLI::IsMember({"meetings", "every-node"}));
    simulate->add_option("--tick", run_flags.tick);
    simulate->add_option("--layout", run_flags.layout);
    simulate->add_option("--out-dir", out)->required();

    auto* compare = app.add_subcommand("compare", "Run all three algorithms and write the comparison table");
    compare->add_option("--net", run_flags.net)->required();
    compare->add_option("--scenario", run_flags.scenario)->required();
    compare->add_option("--reoptimize", run_flags.reoptimize)->check(CLI::IsMember({"meetings", "every-node"}));
    compare->add_option("--tick", run_flags.tick);
    compare->add_option("--layout", run_flags.layout);
    compare->add_option("--out", out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*grid) {
            if (rows < 2 || cols < 2) throw Error(ErrorKind::Usage, "--rows and --cols must be at least 2");
            write_network(make_grid(rows, cols, edge_length), grid_layout(rows, cols, edge_length), out);
            return 0;
        }
        if (*density) {
            const RoadNetwork net = load_network(net_path);
            const DensityReport report =
                synthesize_density(net, load_zones(zones_path, net.vertex_count()), load_demand(demand_path), seed);
            fs::path target(out);
            if (target.has_parent_path()) fs::create_directories(target.parent_path());
            save_network_csv(report.network, target);
            if (fs::exists(layout_path(net_path))) fs::copy_file(layout_path(net_path), layout_path(target), fs::copy_options::overwrite_existing);
            std::cerr << "routed " << report.trips_routed << " trips, skipped " << report.trips_skipped << "\n";
            return 0;
        }
        if (*make) {
            fs::create_directories(out);
            if (kind == "city") {
                const CityNetwork city = city_standin(seed);
                write_network(city.net, city.layout, fs::path(out) / "network.csv");
                return 0;
            }
            GridScenario s = kind == "corner"         ? corner_scenario()
                             : kind == "slow"         ? preference_scenario(Preference::SlowVehicle)
                             : kind == "tight-length" ? preference_scenario(Preference::TightLength)
                             : kind == "tight-time"   ? preference_scenario(Preference::TightTime)
                                                      : random_grid_scenario(seed);
            write_network(s.net, s.layout, fs::path(out) / "network.csv");
            write_file(fs::path(out) / "scenario.json", scenario_to_json(s.scenario));
            return 0;
        }
        if (*simulate) {
            const RoadNetwork net = load_network(run_flags.net);
            const Scenario scenario = load_with_overrides(net, run_flags);
            const Layout layout = layout_for(net, run_flags.net, run_flags.layout);
            const SimulationResult r = run(net, scenario.vehicles, scenario.config, parse_algorithm(algorithm));
            fs::create_directories(out);
            write_file(fs::path(out) / "events.jsonl", events_to_jsonl(r.events));
            write_file(fs::path(out) / "summary.csv", summary_csv(r));
            render_heatmap(net, edge_usage(r), layout, fs::path(out) / "heatmap.svg");
            if (r.timeout_fallbacks > 0) {
                std::cerr << r.timeout_fallbacks << " solve(s) hit the node limit; overlap routes were used\n";
                return kExitTimeout;
            }
            return 0;
        }
        if (*compare) {
            const RoadNetwork net = load_network(run_flags.net);
            const Scenario scenario = load_with_overrides(net, run_flags);
            const Layout layout = layout_for(net, run_flags.net, run_flags.layout);
            std::map<Algorithm, SimulationResult> results;
            for (Algorithm a : {Algorithm::Pfara, Algorithm::Overlap, Algorithm::Alone})
                results[a] = run(net, scenario.vehicles, scenario.config, a);
            fs::create_directories(out);
            write_file(fs::path(out) / "comparison.csv", comparison_table(results));
            for (const auto& [a, r] : results)
                render_heatmap(net, edge_usage(r), layout, fs::path(out) / ("heatmap_" + std::string(to_string(a)) + ".svg"));
            if (results.at(Algorithm::Pfara).timeout_fallbacks > 0) return kExitTimeout;
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.kind() == ErrorKind::Usage) return kExitUsage;
        if (e.kind() == ErrorKind::Infeasible) return kExitInfeasible;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

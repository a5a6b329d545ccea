#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "pfara/error.hpp"
#include "pfara/network.hpp"
#include "pfara/rng.hpp"

using namespace pfara;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("pfara_unit_" + name);
    std::ofstream(p) << text;
    return p;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no pfara::Error thrown";
    return ErrorKind::Io;
}

// All simple paths by DFS, for checking the tie-break independently.
void all_paths(const RoadNetwork& net, VertexId at, VertexId to, std::vector<VertexId>& trail,
               std::vector<std::vector<VertexId>>& out) {
    if (at == to) {
        out.push_back(trail);
        return;
    }
    for (EdgeId e : net.out_edges(at)) {
        const VertexId next = net.edge(e).to;
        if (std::find(trail.begin(), trail.end(), next) != trail.end()) continue;
        trail.push_back(next);
        all_paths(net, next, to, trail, out);
        trail.pop_back();
    }
}

}  // namespace

TEST(Tntp, TwoRowsGiveThreeVertices) {
    const auto p = temp_file("two.tntp", "<NUMBER OF NODES> 3\n<END OF METADATA>\n~ a b len\n1 2 100\n2 3 50\n");
    const RoadNetwork net = load_tntp(p);
    EXPECT_EQ(net.vertex_count(), 3);
    ASSERT_EQ(net.edge_count(), 2);
    EXPECT_DOUBLE_EQ(net.edge(0).length_m, 100.0);
    EXPECT_DOUBLE_EQ(net.edge(1).length_m, 50.0);
}

TEST(Tntp, EmptyDataSection) {
    const auto p = temp_file("empty.tntp", "<END OF METADATA>\n~ nothing here\n");
    EXPECT_EQ(kind_of([&] { load_tntp(p); }), ErrorKind::EmptyNetwork);
}

TEST(Tntp, MalformedRow) {
    const auto p = temp_file("bad.tntp", "1 2 abc\n");
    EXPECT_EQ(kind_of([&] { load_tntp(p); }), ErrorKind::MalformedRow);
}

TEST(Network, RejectsDuplicateAndBadLengths) {
    EXPECT_THROW(RoadNetwork(2, {{0, 0, 1, 10, 0}, {1, 0, 1, 20, 0}}), Error);
    EXPECT_THROW(RoadNetwork(2, {{0, 0, 1, 0, 0}}), Error);
    EXPECT_THROW(RoadNetwork(2, {{0, 0, 5, 10, 0}}), Error);
}

TEST(Grid, Counts) {
    EXPECT_EQ(make_grid(5, 5, 100).vertex_count(), 25);
    EXPECT_EQ(make_grid(5, 5, 100).edge_count(), 80);
    EXPECT_EQ(make_grid(2, 2, 100).edge_count(), 8);
    EXPECT_EQ(make_grid(3, 3, 100).out_edges(4).size(), 4u);
}

TEST(ShortestPath, SameVertexIsEmpty) {
    const RoadNetwork g = make_grid(3, 3, 100);
    const Path p = shortest_path(g, 4, 4, Weight::Length);
    EXPECT_TRUE(p.edges.empty());
    EXPECT_EQ(p.weight, 0.0);
}

TEST(ShortestPath, LineGraph) {
    const RoadNetwork line(3, {{0, 0, 1, 1, 1}, {1, 1, 2, 1, 1}});
    const Path p = shortest_path(line, 0, 2, Weight::Density);
    EXPECT_EQ(p.edges, (std::vector<EdgeId>{0, 1}));
    EXPECT_DOUBLE_EQ(p.weight, 2.0);
    EXPECT_THROW(shortest_path(line, 2, 0, Weight::Length), Error);
}

TEST(ShortestPath, UniformGridPicksLexSmallestMonotoneRoute) {
    const RoadNetwork base = make_grid(3, 3, 100);
    const std::vector<double> d(static_cast<std::size_t>(base.edge_count()), 0.02);
    const RoadNetwork g = base.with_densities(d);
    const Path p = shortest_path(g, 0, 8, Weight::Density);
    EXPECT_NEAR(p.weight, 4 * 0.02, 1e-15);

    std::vector<std::vector<VertexId>> paths;
    std::vector<VertexId> trail{0};
    all_paths(g, 0, 8, trail, paths);
    std::vector<std::vector<VertexId>> shortest;
    for (const auto& vs : paths)
        if (vs.size() == 5) shortest.push_back(vs);
    ASSERT_EQ(shortest.size(), 6u);
    EXPECT_EQ(path_vertices(g, 0, p.edges), *std::min_element(shortest.begin(), shortest.end()));
}

TEST(ShortestPath, MatchesBruteForceOnRandomGrids) {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const RoadNetwork base = make_grid(3, 4, 100);
        std::vector<double> d;
        for (int i = 0; i < base.edge_count(); ++i) d.push_back(rng.uniform(0.0, 1.0));
        const RoadNetwork g = base.with_densities(d);
        const VertexId to = static_cast<VertexId>(1 + rng.below(11));
        std::vector<std::vector<VertexId>> paths;
        std::vector<VertexId> trail{0};
        all_paths(g, 0, to, trail, paths);
        double best = 1e18;
        for (const auto& vs : paths) {
            double w = 0;
            for (std::size_t i = 1; i < vs.size(); ++i) w += g.edge(*g.find_edge(vs[i - 1], vs[i])).density;
            best = std::min(best, w);
        }
        EXPECT_NEAR(shortest_path(g, 0, to, Weight::Density).weight, best, 1e-12);
    }
}

TEST(Density, SingleEdge) {
    const RoadNetwork net(2, {{0, 0, 1, 100, 0}});
    const ZonePartition zones({0, 1});
    const TripDemand demand{{{0, 1, 4}}};
    const DensityReport r = synthesize_density(net, zones, demand, 1);
    EXPECT_DOUBLE_EQ(r.network.edge(0).density, 0.04);
    EXPECT_EQ(r.trips_routed, 4);
}

TEST(Density, ZeroDemandAndDeterminism) {
    const RoadNetwork g = make_grid(4, 4, 100);
    std::vector<ZoneId> zone_of;
    for (VertexId v = 0; v < 16; ++v) zone_of.push_back((v / 4 / 2) * 2 + (v % 4) / 2);
    const ZonePartition zones(zone_of);

    TripDemand zero{{{0, 3, 0}, {2, 1, 0}}};
    for (double d : synthesize_density(g, zones, zero, 5).network.densities()) EXPECT_EQ(d, 0.0);

    TripDemand demand{{{0, 3, 13}, {2, 1, 7}}};
    const DensityReport a = synthesize_density(g, zones, demand, 5);
    const DensityReport b = synthesize_density(g, zones, demand, 5);
    EXPECT_EQ(a.network.densities(), b.network.densities());
    EXPECT_EQ(a.trips_routed, 20);
    // Density times length recovers the trip counts on every edge.
    std::int64_t total = 0;
    for (const Edge& e : a.network.edges()) {
        EXPECT_NEAR(e.density * e.length_m, static_cast<double>(a.usage[static_cast<std::size_t>(e.id)]), 1e-9);
        total += a.usage[static_cast<std::size_t>(e.id)];
    }
    EXPECT_EQ(total, a.path_edges_total);
}

TEST(NetworkCsv, RoundTrip) {
    const RoadNetwork base = make_grid(2, 3, 75);
    std::vector<double> d;
    for (int i = 0; i < base.edge_count(); ++i) d.push_back(0.001 * (i + 1) / 3.0);
    const RoadNetwork g = base.with_densities(d);
    const fs::path p = fs::temp_directory_path() / "pfara_unit_net.csv";
    save_network_csv(g, p);
    const RoadNetwork back = load_network(p);
    ASSERT_EQ(back.edge_count(), g.edge_count());
    EXPECT_EQ(back.densities(), g.densities());
}

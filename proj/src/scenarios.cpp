#include "pfara/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "pfara/error.hpp"
#include "pfara/rng.hpp"

namespace pfara {

namespace {

constexpr int kSide = 5;
constexpr double kEdge = 100.0;
constexpr double kSpeed = 10.0;
const VertexId kSatellites[] = {0, 4, 12, 20, 24};

bool on_perimeter(const Edge& e) {
    auto border = [](VertexId v, bool row) { int k = row ? v / kSide : v % kSide; return k == 0 || k == kSide - 1; };
    return (border(e.from, true) && border(e.to, true) && e.from / kSide == e.to / kSide) ||
           (border(e.from, false) && border(e.to, false) && e.from % kSide == e.to % kSide);
}

Vehicle make_vehicle(const RoadNetwork& net, VehicleId id, ProviderId provider, VertexId origin, VertexId dest,
                     double length_factor = 2.0) {
    Vehicle v;
    v.id = id;
    v.provider = provider;
    v.origin = origin;
    v.dest = dest;
    v.min_platoon_speed_mps = 5.0;
    v.max_speed_mps = kSpeed;
    const double geodesic = shortest_path(net, origin, dest, Weight::Length).weight;
    v.max_length_m = length_factor * geodesic;
    v.max_time_s = 4.0 * geodesic / kSpeed;
    v.max_cost = alone_cost(net, origin, dest);
    if (v.max_cost <= 0.0) v.max_cost = 1e-12;
    return v;
}

}  // namespace

std::vector<CorridorEdge> corner_corridor() {
    return {{24, 19, 5}, {19, 18, 5}, {18, 17, 5}, {17, 12, 4}, {20, 21, 5}, {21, 16, 5},
            {16, 11, 5}, {11, 12, 5}, {12, 7, 7},  {7, 2, 7}};
}

GridScenario corner_scenario() {
    RoadNetwork grid = make_grid(kSide, kSide, kEdge);
    std::set<std::pair<VertexId, VertexId>> cheap;
    for (const CorridorEdge& c : corner_corridor()) cheap.insert({c.from, c.to});
    std::vector<double> density;
    for (const Edge& e : grid.edges()) {
        // Congested side streets off the bottom row, so a lone vehicle on
        // 24->23->22 does not drag the corner-24 platoon along with it.
        if ((e.from == 23 && e.to == 18) || (e.from == 22 && e.to == 17)) density.push_back(0.15);
        else if (on_perimeter(e)) density.push_back(0.10);
        else if (cheap.contains({e.from, e.to})) density.push_back(0.01);
        else density.push_back(0.03);
    }
    GridScenario s{grid.with_densities(density), grid_layout(kSide, kSide, kEdge), {}};

    // Destinations per satellite, one vehicle per provider.
    const std::map<VertexId, std::vector<VertexId>> dests = {
        {0, {1, 5, 6, 10, 7}},
        {4, {3, 9, 8, 13, 2}},
        {12, {11, 13, 17, 16, 18}},
        {20, {12, 12, 2, 2, 2}},
        {24, {22, 2, 2, 2, 2}},
    };
    VehicleId id = 0;
    // Corridor vehicles get the low ids so the preference variants can name them;
    // everyone else keeps to geodesics and stays out of the corridor.
    for (VertexId sat : {24, 20, 0, 4, 12})
        for (ProviderId p = 0; p < 5; ++p)
            s.scenario.vehicles.push_back(make_vehicle(s.net, id++, p, sat, dests.at(sat)[static_cast<std::size_t>(p)],
                                                       sat == 24 || sat == 20 ? 2.0 : 1.0));
    s.scenario.config.tick_seconds = 1.0;
    return s;
}

GridScenario preference_scenario(Preference p) {
    GridScenario s = corner_scenario();
    auto& vs = s.scenario.vehicles;
    switch (p) {
        case Preference::None:
            break;
        case Preference::SlowVehicle:
            vs[2].min_platoon_speed_mps = 2.0;
            vs[2].max_speed_mps = 4.0;
            vs[2].max_time_s = 4.0 * vs[2].max_length_m / 4.0;
            break;
        case Preference::TightLength:
        {
            // Pinned to the geodesic; the cost cap follows, or the detour would be forced on everyone.
            const Path geo = shortest_path(s.net, vs[0].origin, vs[0].dest, Weight::Length);
            vs[0].max_length_m = geo.weight;
            vs[0].max_cost = 0.0;
            for (EdgeId e : geo.edges) vs[0].max_cost += s.net.edge(e).density;
        }
            break;
        case Preference::TightTime:
            vs[3].max_speed_mps = 15.0;
            vs[3].max_time_s = shortest_path(s.net, vs[3].origin, vs[3].dest, Weight::Length).weight / 12.5;
            break;
    }
    return s;
}

GridScenario random_grid_scenario(std::uint64_t seed) {
    SplitMix64 rng(seed);
    RoadNetwork grid = make_grid(kSide, kSide, kEdge);
    std::vector<double> density;
    for (std::int32_t i = 0; i < grid.edge_count(); ++i) density.push_back(rng.uniform(0.005, 0.1));
    GridScenario s{grid.with_densities(density), grid_layout(kSide, kSide, kEdge), {}};
    VehicleId id = 0;
    for (VertexId sat : kSatellites) {
        for (ProviderId p = 0; p < 5; ++p) {
            VertexId dest = sat;
            while (dest == sat) dest = static_cast<VertexId>(rng.below(kSide * kSide));
            Vehicle v = make_vehicle(s.net, id++, p, sat, dest);
            v.max_speed_mps = rng.uniform(9.0, 12.0);
            v.min_platoon_speed_mps = rng.uniform(4.0, 8.0);
            v.max_time_s = 4.0 * v.max_length_m / v.min_platoon_speed_mps;
            v.max_cost = 1e9;
            s.scenario.vehicles.push_back(v);
        }
    }
    return s;
}

CityNetwork city_standin(std::uint64_t seed) {
    constexpr int side = 19;
    SplitMix64 rng(seed);
    // Candidate two-way links of the lattice in random order.
    std::vector<std::pair<VertexId, VertexId>> pairs;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const VertexId v = r * side + c;
            if (c + 1 < side) pairs.emplace_back(v, v + 1);
            if (r + 1 < side) pairs.emplace_back(v, v + side);
        }
    for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[rng.below(i)]);

    std::vector<VertexId> parent(side * side);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](VertexId v) {
        while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
        return v;
    };
    std::vector<std::pair<VertexId, VertexId>> kept, spare;
    for (const auto& [a, b] : pairs) {
        const VertexId ra = find(a), rb = find(b);
        if (ra != rb) {
            parent[static_cast<std::size_t>(ra)] = rb;
            kept.emplace_back(a, b);
        } else {
            spare.emplace_back(a, b);
        }
    }
    for (std::size_t i = 0; kept.size() < 385 && i < spare.size(); ++i) kept.push_back(spare[i]);

    std::vector<Edge> edges;
    for (const auto& [a, b] : kept) {
        const double length = rng.uniform(60.0, 180.0);
        edges.push_back({static_cast<EdgeId>(edges.size()), a, b, length, 0.0});
        edges.push_back({static_cast<EdgeId>(edges.size()), b, a, length, 0.0});
    }
    RoadNetwork bare(side * side, std::move(edges));

    // 4x4 zones of roughly 5x5 vertices.
    std::vector<ZoneId> zone_of;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) zone_of.push_back(std::min(3, r / 5) * 4 + std::min(3, c / 5));
    ZonePartition zones(zone_of);
    TripDemand demand;
    for (ZoneId a = 0; a < 16; ++a)
        for (ZoneId b = 0; b < 16; ++b)
            if (a != b) demand.trips.push_back({a, b, static_cast<std::int64_t>(rng.below(40))});

    CityNetwork city{synthesize_density(bare, zones, demand, seed).network, grid_layout(side, side, 100.0), zones, demand};
    return city;
}

GroupingProblem city_problem(const RoadNetwork& net, int vehicles, std::uint64_t seed) {
    SplitMix64 rng(seed);
    GroupingProblem p;
    p.net = &net;
    p.origin = static_cast<VertexId>(rng.below(static_cast<std::uint64_t>(net.vertex_count())));
    p.speed_mps = 10.0;
    p.tick_seconds = 1.0;
    p.sharing = SharingModel::Synchronized;
    const std::vector<double> length = distances_from(net, p.origin, edge_weights(net, Weight::Length));
    for (VehicleId id = 0; id < vehicles; ++id) {
        VertexId dest = p.origin;
        while (dest == p.origin || !std::isfinite(length[static_cast<std::size_t>(dest)]))
            dest = static_cast<VertexId>(rng.below(static_cast<std::uint64_t>(net.vertex_count())));
        GroupMember m;
        m.id = id;
        m.dest = dest;
        m.max_length_m = 1.3 * length[static_cast<std::size_t>(dest)];
        m.max_time_s = 2.0 * m.max_length_m / p.speed_mps + 60.0;
        m.max_cost = std::max(1e-12, alone_cost(net, p.origin, dest));
        p.members.push_back(m);
    }
    return p;
}

}  // namespace pfara

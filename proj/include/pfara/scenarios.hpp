#pragma once

#include <cstdint>

#include "pfara/fleet.hpp"
#include "pfara/network.hpp"
#include "pfara/optimizer.hpp"
#include "pfara/reporting.hpp"

namespace pfara {

struct GridScenario {
    RoadNetwork net;
    Layout layout;
    Scenario scenario;
};

/// 5x5 grid, 100 m edges, expensive perimeter, five satellites (four corners
/// and the center) with one vehicle per provider each. Densities carve two
/// cheap corridors: from corner 24 a platoon of five loses one member at
/// vertex 17, from corner 20 a platoon of five reaches vertex 12 on the same
/// tick, two of its members finish there and seven continue to vertex 2.
GridScenario corner_scenario();

/// Designated edges of corner_scenario() and the vehicle counts they carry.
struct CorridorEdge {
    VertexId from;
    VertexId to;
    int expected_usage;
};
std::vector<CorridorEdge> corner_corridor();

enum class Preference { None, SlowVehicle, TightLength, TightTime };

/// corner_scenario() with one preference changed on the corner-24 platoon:
/// SlowVehicle caps vehicle 2 below everyone's minimum platoon speed,
/// TightLength limits vehicle 0 to its geodesic (cost cap: that route
/// travelled alone), TightTime lets
/// vehicle 3 drive faster than the platoon but not arrive as late as it.
GridScenario preference_scenario(Preference p);

/// Seeded 5x5 scenario: random densities, 25 vehicles on the five
/// satellites, generous length/time allowances and no cost cap.
GridScenario random_grid_scenario(std::uint64_t seed);

/// Stand-in for the 361-vertex Tiergarten network: a 19x19 lattice thinned to
/// a random spanning tree plus extra two-way links (770 directed edges),
/// jittered lengths, densities synthesized from seeded zone demand.
struct CityNetwork {
    RoadNetwork net;
    Layout layout;
    ZonePartition zones;
    TripDemand demand;
};
CityNetwork city_standin(std::uint64_t seed);

/// One grouping problem at a random origin of `net` with `vehicles` members,
/// lengths within 1.3x of each member's shortest path and cost capped at the
/// alone cost.
GroupingProblem city_problem(const RoadNetwork& net, int vehicles, std::uint64_t seed);

}  // namespace pfara

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfara/fleet.hpp"
#include "pfara/network.hpp"
#include "pfara/optimizer.hpp"

namespace pfara {

enum class Algorithm { Pfara, Overlap, Alone };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

enum class EventKind { Creation, Departure, Arrival, Completed, Formed, Split };

std::string_view to_string(EventKind k);

struct EventRecord {
    std::int64_t tick = 0;
    VertexId vertex = 0;
    VehicleId vehicle = 0;
    EventKind kind = EventKind::Creation;
    std::string detail;
};

struct VehicleStats {
    VehicleId id = 0;
    ProviderId provider = 0;
    bool completed = false;
    std::int64_t completed_tick = -1;
    BudgetState budget;
    std::vector<EdgeId> trace;
};

/// Vehicles that entered one edge on the same tick at the same speed.
struct CohortTraversal {
    EdgeId edge = 0;
    std::int64_t depart_tick = 0;
    std::int64_t arrive_tick = 0;
    std::vector<VehicleId> members;
    double price_each = 0.0;
};

struct SimulationResult {
    Algorithm algorithm = Algorithm::Pfara;
    std::vector<EventRecord> events;
    std::vector<VehicleStats> vehicles;          // ascending id
    std::vector<CohortTraversal> traversals;
    std::int64_t final_tick = 0;
    std::int64_t solves = 0;
    std::int64_t timeout_fallbacks = 0;
    std::int64_t infeasible_fallbacks = 0;
};

/// Where each vehicle is at a tick boundary.
struct VehiclePosition {
    VehicleId id = 0;
    bool completed = false;
    bool on_edge = false;
    VertexId vertex = 0;        // current vertex, or the tail while on an edge
    EdgeId edge = -1;
    std::int64_t depart_tick = 0;
    std::int64_t arrive_tick = 0;
    std::int64_t standing_since = 0;  // tick the vehicle reached `vertex`
};

struct SimulationState {
    const RoadNetwork* net = nullptr;
    std::int64_t tick = 0;
    std::vector<VehiclePosition> positions;  // ascending id
};

/// Vehicles standing at a vertex at `tick` (just arrived or just created).
/// Vehicles still travelling an edge are never part of a meeting, and
/// nobody waits: a vehicle stands at a vertex only on the tick it reaches it.
std::map<VertexId, std::vector<VehicleId>> meetings_at(std::int64_t tick, const SimulationState& state);

/// Runs the discrete-time simulation to completion. Throws TickCapExceeded,
/// BudgetExceeded (a contract breach) or Infeasible when some vehicle has no
/// route inside its allowances at all.
SimulationResult run(const RoadNetwork& net, std::span<const Vehicle> vehicles, const SimulationConfig& config,
                     Algorithm algorithm = Algorithm::Pfara);

/// JSON Lines, one event per line with fields tick, vertex, vehicle, kind, detail.
std::string events_to_jsonl(std::span<const EventRecord> events);

}  // namespace pfara

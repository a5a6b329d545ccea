#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "pfara/network.hpp"

namespace pfara {

using VehicleId = std::int32_t;
using ProviderId = std::int32_t;

struct Vehicle {
    VehicleId id = 0;
    ProviderId provider = 0;
    VertexId origin = 0;  // satellite
    VertexId dest = 0;
    double min_platoon_speed_mps = 1.0;
    double max_speed_mps = 1.0;
    double max_length_m = 0.0;  // Λ
    double max_time_s = 0.0;    // Ω
    double max_cost = 0.0;      // K*
};

/// Throws InvariantViolation when speeds are inverted or a budget is not positive.
void validate(const Vehicle& v);

/// Remaining allowances of one vehicle while it travels.
struct BudgetState {
    double remaining_length_m = 0.0;
    double remaining_time_s = 0.0;
    double remaining_cost = 0.0;
    double accrued_cost = 0.0;
    double travelled_length_m = 0.0;
    double travelled_time_s = 0.0;
    VertexId position = 0;
    std::int64_t clock_ticks = 0;
};

BudgetState initial_budget(const Vehicle& v);

/// Subtracts one edge traversal. Deltas must be nonnegative. With `enforce`,
/// any remaining allowance dropping below zero throws BudgetExceeded; without
/// it the values go negative (used by the constraint-blind algorithms).
BudgetState debit(const BudgetState& budget, double edge_length_m, double elapsed_s, double price,
                  bool enforce = true);

enum class Reoptimize { Meetings, EveryNode };

struct SimulationConfig {
    double tick_seconds = 1.0;
    Reoptimize reoptimize = Reoptimize::Meetings;
    std::int64_t max_ticks = 1'000'000;
    std::int64_t node_limit = 1'000'000;
    /// Unordered provider pairs that refuse to platoon together.
    std::set<std::pair<ProviderId, ProviderId>> incompatible;

    bool compatible(ProviderId a, ProviderId b) const;
};

struct Scenario {
    SimulationConfig config;
    std::vector<Vehicle> vehicles;  // sorted by id
};

/// Density cost of travelling alone along the density-shortest path.
double alone_cost(const RoadNetwork& net, VertexId origin, VertexId dest);

/// Reads the scenario JSON. A missing `max_cost` defaults to the vehicle's
/// alone-travel cost on `net`. Throws SchemaError / InvariantViolation.
Scenario load_scenario(const std::filesystem::path& path, const RoadNetwork& net);
Scenario parse_scenario(const std::string& json_text, const RoadNetwork& net);
std::string scenario_to_json(const Scenario& scenario);

}  // namespace pfara

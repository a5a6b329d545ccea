#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pfara/clustering.hpp"
#include "pfara/fleet.hpp"
#include "pfara/network.hpp"

namespace pfara {

/// How co-travellers on an edge are counted when splitting its density.
enum class SharingModel {
    /// Every route containing the edge shares it (the plain joint-routing
    /// program: NP(e) = number of routes using e).
    RouteCount,
    /// Only routes entering the edge at the same time share it; each such
    /// cohort pays d(e) once. Matches what a simulation can realize.
    Synchronized,
};

/// One vehicle of a grouping problem with its *remaining* allowances.
struct GroupMember {
    VehicleId id = 0;
    VertexId dest = 0;
    double max_length_m = 0.0;
    double max_time_s = 0.0;
    double max_cost = 0.0;
};

GroupMember member_from(const Vehicle& v);
GroupMember member_from(const Vehicle& v, const BudgetState& remaining);

/// Vehicles standing at `origin` that travel together at `speed_mps`.
struct GroupingProblem {
    const RoadNetwork* net = nullptr;
    VertexId origin = 0;
    double speed_mps = 1.0;
    std::vector<GroupMember> members;  // solved and reported in ascending id order
    /// Edge traversal time is ceil(l / s / tick) * tick when positive, l / s when zero.
    double tick_seconds = 0.0;
    SharingModel sharing = SharingModel::RouteCount;
};

double edge_time(double length_m, double speed_mps, double tick_seconds);

struct GroupingSolution {
    std::map<VehicleId, std::vector<EdgeId>> routes;
    std::vector<EdgeId> union_edges;                    // ascending
    double objective = 0.0;                             // sum of density over the union (per cohort when synchronized)
    double total_length_m = 0.0;                        // sum of route lengths
    std::map<std::pair<VehicleId, EdgeId>, double> prices;
    std::map<EdgeId, int> np;                           // routes using each union edge
    std::map<VehicleId, double> cost;
    std::map<VehicleId, double> length_m;
    std::map<VehicleId, double> time_s;
};

/// Prices and totals for a fixed set of routes (one per member, same order).
GroupingSolution evaluate(const GroupingProblem& problem, std::span<const std::vector<EdgeId>> routes);

/// Every route is a simple origin->dest path within the member's length,
/// time and cost allowances.
bool satisfies_budgets(const GroupingProblem& problem, const GroupingSolution& solution);

/// Strict "better than" for the deterministic tie-break: objective, then
/// total length, then the members' vertex sequences compared lexicographically.
bool better_solution(const GroupingProblem& problem, const GroupingSolution& a, const GroupingSolution& b);

enum class SolveStatus { Optimal, Infeasible, Timeout };

struct SolveStats {
    std::int64_t nodes = 0;
    std::int64_t paths_enumerated = 0;
    std::int64_t lazy_rejections = 0;  // complete assignments rejected by the cost cap
};

struct SolveOptions {
    std::int64_t node_limit = 1'000'000;
    /// Upper bound on candidate paths collected for one vehicle at one node.
    std::int64_t path_limit = 200'000;
    /// Optional routes (member order) tried as the first incumbent. An empty
    /// route stands for that member's own best path.
    std::optional<std::vector<std::vector<EdgeId>>> warm_start;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Optimal;
    std::optional<GroupingSolution> solution;  // set when Optimal
    std::vector<VehicleId> infeasible;         // set when Infeasible
    std::optional<GroupingSolution> incumbent; // best found before a Timeout, if any
    SolveStats stats;
};

/// Exact branch-and-bound over per-vehicle path choices. The union density
/// is bounded below by a directed Steiner dual ascent; the cost cap is checked
/// lazily on complete assignments.
///
/// Infeasible is returned only when no joint assignment exists; it names the
/// members that cannot meet their allowances even alone (or, if every member
/// could, the highest-id member so callers can make progress).
SolveResult solve(const GroupingProblem& problem, const SolveOptions& options = {});

/// Exhaustive validation oracle: enumerates every allowance-feasible simple
/// path per member (at most `max_path_len` edges) and every combination.
/// Throws ExplosionGuard when a member has more than `path_cap` paths.
SolveResult brute_force_oracle(const GroupingProblem& problem, int max_path_len, std::int64_t path_cap = 10'000);

/// A run of edges travelled by the same vehicle set. Segments form a tree
/// rooted at the origin: a child starts where its parent's vehicles diverge.
struct PrefixSegment {
    std::vector<VehicleId> vehicles;
    std::vector<EdgeId> shared_edges;
    std::size_t start_index = 0;  // position of the first shared edge within each route
    int parent = -1;
};

struct CommonPrefix {
    std::vector<EdgeId> prefix;               // shared by every route
    std::vector<PrefixSegment> segments;      // depth-first, children ordered by first edge id
    std::map<EdgeId, std::vector<VehicleId>> subgroup;  // edges leaving the origin -> vehicles on them
};

CommonPrefix common_prefix(const GroupingSolution& solution);

}  // namespace pfara

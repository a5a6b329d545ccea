#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "optimizer_common.hpp"
#include "pfara/error.hpp"
#include "pfara/optimizer.hpp"

namespace pfara {

GroupMember member_from(const Vehicle& v) {
    return {v.id, v.dest, v.max_length_m, v.max_time_s, v.max_cost};
}

GroupMember member_from(const Vehicle& v, const BudgetState& remaining) {
    return {v.id, v.dest, remaining.remaining_length_m, remaining.remaining_time_s, remaining.remaining_cost};
}

double edge_time(double length_m, double speed_mps, double tick_seconds) {
    const double seconds = length_m / speed_mps;
    if (tick_seconds <= 0.0) return seconds;
    return std::max(1.0, std::ceil(seconds / tick_seconds - 1e-9)) * tick_seconds;
}

namespace detail {

GroupTiming group_timing(const GroupingProblem& problem) {
    const RoadNetwork& net = *problem.net;
    GroupTiming t;
    t.time_s.reserve(static_cast<std::size_t>(net.edge_count()));
    t.key_step.reserve(static_cast<std::size_t>(net.edge_count()));
    for (const Edge& e : net.edges()) {
        const double s = edge_time(e.length_m, problem.speed_mps, problem.tick_seconds);
        t.time_s.push_back(s);
        t.key_step.push_back(problem.tick_seconds > 0.0 ? std::llround(s / problem.tick_seconds)
                                                        : std::llround(s * 1e6));
    }
    return t;
}

GroupingProblem normalized(const GroupingProblem& problem) {
    if (problem.net == nullptr) throw Error(ErrorKind::InvariantViolation, "grouping problem has no network");
    if (!problem.net->has_vertex(problem.origin))
        throw Error(ErrorKind::InvariantViolation, "grouping origin is not in the network");
    if (!(problem.speed_mps > 0.0)) throw Error(ErrorKind::InvariantViolation, "group speed must be positive");
    if (problem.members.empty()) throw Error(ErrorKind::InvariantViolation, "grouping problem has no members");
    GroupingProblem p = problem;
    std::sort(p.members.begin(), p.members.end(),
              [](const GroupMember& a, const GroupMember& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < p.members.size(); ++i) {
        const GroupMember& m = p.members[i];
        if (i > 0 && m.id == p.members[i - 1].id)
            throw Error(ErrorKind::InvariantViolation, "duplicate member " + std::to_string(m.id));
        if (!p.net->has_vertex(m.dest))
            throw Error(ErrorKind::InvariantViolation, "member destination is not in the network");
        if (m.dest == p.origin)
            throw Error(ErrorKind::InvariantViolation, "member " + std::to_string(m.id) + " is already at its destination");
    }
    return p;
}

}  // namespace detail

GroupingSolution evaluate(const GroupingProblem& problem, std::span<const std::vector<EdgeId>> routes) {
    const RoadNetwork& net = *problem.net;
    if (routes.size() != problem.members.size())
        throw Error(ErrorKind::InvariantViolation, "one route per member is required");
    const detail::GroupTiming timing = detail::group_timing(problem);

    GroupingSolution sol;
    std::unordered_map<detail::CohortKey, int, detail::CohortHash> cohort;
    std::vector<std::vector<std::int64_t>> entry(routes.size());
    for (std::size_t i = 0; i < routes.size(); ++i) {
        std::int64_t key = 0;
        for (EdgeId e : routes[i]) {
            entry[i].push_back(key);
            ++sol.np[e];
            ++cohort[{e, key}];
            key += timing.key_step[static_cast<std::size_t>(e)];
        }
    }
    for (const auto& [e, count] : sol.np) sol.union_edges.push_back(e);

    if (problem.sharing == SharingModel::RouteCount) {
        for (EdgeId e : sol.union_edges) sol.objective += net.edge(e).density;
    } else {
        // Sum per edge in ascending edge order so the total does not depend on hashing.
        std::map<EdgeId, int> cohorts_per_edge;
        for (const auto& [k, count] : cohort) ++cohorts_per_edge[k.edge];
        for (const auto& [e, n] : cohorts_per_edge) sol.objective += n * net.edge(e).density;
    }

    for (std::size_t i = 0; i < routes.size(); ++i) {
        const VehicleId id = problem.members[i].id;
        double cost = 0.0, length = 0.0, time = 0.0;
        for (std::size_t k = 0; k < routes[i].size(); ++k) {
            const EdgeId e = routes[i][k];
            const Edge& edge = net.edge(e);
            const int sharers = problem.sharing == SharingModel::RouteCount ? sol.np[e] : cohort[{e, entry[i][k]}];
            const double price = edge.density / sharers;
            sol.prices[{id, e}] = price;
            cost += price;
            length += edge.length_m;
            time += timing.time_s[static_cast<std::size_t>(e)];
        }
        sol.routes[id] = routes[i];
        sol.cost[id] = cost;
        sol.length_m[id] = length;
        sol.time_s[id] = time;
        sol.total_length_m += length;
    }
    return sol;
}

bool satisfies_budgets(const GroupingProblem& problem, const GroupingSolution& solution) {
    const RoadNetwork& net = *problem.net;
    for (const GroupMember& m : problem.members) {
        auto it = solution.routes.find(m.id);
        if (it == solution.routes.end() || it->second.empty()) return false;
        std::vector<char> seen(static_cast<std::size_t>(net.vertex_count()), 0);
        VertexId at = problem.origin;
        seen[static_cast<std::size_t>(at)] = 1;
        for (EdgeId e : it->second) {
            if (e < 0 || e >= net.edge_count() || net.edge(e).from != at) return false;
            at = net.edge(e).to;
            if (seen[static_cast<std::size_t>(at)]) return false;
            seen[static_cast<std::size_t>(at)] = 1;
        }
        if (at != m.dest) return false;
        if (solution.length_m.at(m.id) > m.max_length_m + detail::tol(m.max_length_m)) return false;
        if (solution.time_s.at(m.id) > m.max_time_s + detail::tol(m.max_time_s)) return false;
        if (solution.cost.at(m.id) > m.max_cost + detail::tol(m.max_cost)) return false;
    }
    return true;
}

bool better_solution(const GroupingProblem& problem, const GroupingSolution& a, const GroupingSolution& b) {
    const double eps = detail::tol(std::max(a.objective, b.objective));
    if (a.objective < b.objective - eps) return true;
    if (a.objective > b.objective + eps) return false;
    const double leps = detail::tol(std::max(a.total_length_m, b.total_length_m));
    if (a.total_length_m < b.total_length_m - leps) return true;
    if (a.total_length_m > b.total_length_m + leps) return false;
    for (const GroupMember& m : problem.members) {
        const auto va = path_vertices(*problem.net, problem.origin, a.routes.at(m.id));
        const auto vb = path_vertices(*problem.net, problem.origin, b.routes.at(m.id));
        if (va != vb) return va < vb;
    }
    return false;
}

namespace {

void build_segments(const std::map<VehicleId, std::vector<EdgeId>>& routes, std::vector<VehicleId> group,
                    std::size_t start, int parent, std::vector<PrefixSegment>& out) {
    // Partition by the edge at `start`; vehicles whose route ended drop out.
    std::map<EdgeId, std::vector<VehicleId>> by_edge;
    for (VehicleId v : group) {
        const auto& r = routes.at(v);
        if (start < r.size()) by_edge[r[start]].push_back(v);
    }
    for (auto& [first, members] : by_edge) {
        PrefixSegment seg;
        seg.vehicles = members;
        seg.start_index = start;
        seg.parent = parent;
        std::size_t k = start;
        while (true) {
            const auto& r0 = routes.at(members.front());
            if (k >= r0.size()) break;
            const EdgeId e = r0[k];
            const bool all = std::all_of(members.begin(), members.end(), [&](VehicleId v) {
                const auto& r = routes.at(v);
                return k < r.size() && r[k] == e;
            });
            if (!all) break;
            seg.shared_edges.push_back(e);
            ++k;
        }
        const int index = static_cast<int>(out.size());
        out.push_back(seg);
        build_segments(routes, members, k, index, out);
    }
}

}  // namespace

CommonPrefix common_prefix(const GroupingSolution& solution) {
    CommonPrefix cp;
    if (solution.routes.empty()) return cp;
    std::vector<VehicleId> all;
    for (const auto& [v, r] : solution.routes) {
        all.push_back(v);
        if (!r.empty()) cp.subgroup[r.front()].push_back(v);
    }
    build_segments(solution.routes, all, 0, -1, cp.segments);
    if (!cp.segments.empty() && cp.segments.front().vehicles.size() == all.size())
        cp.prefix = cp.segments.front().shared_edges;
    return cp;
}

}  // namespace pfara

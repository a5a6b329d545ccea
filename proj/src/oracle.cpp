#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "optimizer_common.hpp"
#include "pfara/error.hpp"
#include "pfara/optimizer.hpp"

namespace pfara {

namespace {

struct OraclePath {
    std::vector<EdgeId> edges;
    std::vector<VertexId> vertices;
    std::vector<std::int64_t> entry;
    double length = 0.0;
};

std::vector<OraclePath> all_paths(const GroupingProblem& p, const GroupMember& m, const detail::GroupTiming& timing,
                                  int max_path_len, std::int64_t cap) {
    const RoadNetwork& net = *p.net;
    std::vector<OraclePath> out;
    std::vector<char> visited(static_cast<std::size_t>(net.vertex_count()), 0);
    OraclePath cur;
    cur.vertices.push_back(p.origin);
    visited[static_cast<std::size_t>(p.origin)] = 1;
    double time = 0.0;
    std::int64_t key = 0;

    auto dfs = [&](auto&& self, VertexId at) -> void {
        if (at == m.dest) {
            out.push_back(cur);
            if (static_cast<std::int64_t>(out.size()) > cap)
                throw Error(ErrorKind::ExplosionGuard,
                            "member " + std::to_string(m.id) + " has more than " + std::to_string(cap) + " paths");
            return;
        }
        if (static_cast<int>(cur.edges.size()) >= max_path_len) return;
        for (EdgeId id : net.out_edges(at)) {
            const Edge& e = net.edge(id);
            if (visited[static_cast<std::size_t>(e.to)]) continue;
            const double length = cur.length + e.length_m;
            const double t = time + timing.time_s[static_cast<std::size_t>(id)];
            if (length > m.max_length_m + detail::tol(m.max_length_m)) continue;
            if (t > m.max_time_s + detail::tol(m.max_time_s)) continue;
            visited[static_cast<std::size_t>(e.to)] = 1;
            cur.edges.push_back(id);
            cur.vertices.push_back(e.to);
            cur.entry.push_back(key);
            const double saved_length = cur.length, saved_time = time;
            const std::int64_t saved_key = key;
            cur.length = length;
            time = t;
            key += timing.key_step[static_cast<std::size_t>(id)];
            self(self, e.to);
            cur.length = saved_length;
            time = saved_time;
            key = saved_key;
            cur.edges.pop_back();
            cur.vertices.pop_back();
            cur.entry.pop_back();
            visited[static_cast<std::size_t>(e.to)] = 0;
        }
    };
    dfs(dfs, p.origin);
    return out;
}

}  // namespace

SolveResult brute_force_oracle(const GroupingProblem& problem, int max_path_len, std::int64_t path_cap) {
    const GroupingProblem p = detail::normalized(problem);
    const RoadNetwork& net = *p.net;
    const detail::GroupTiming timing = detail::group_timing(p);
    const std::size_t m = p.members.size();

    SolveResult result;
    std::vector<std::vector<OraclePath>> paths(m);
    for (std::size_t i = 0; i < m; ++i) {
        paths[i] = all_paths(p, p.members[i], timing, max_path_len, path_cap);
        if (paths[i].empty()) result.infeasible.push_back(p.members[i].id);
    }
    if (!result.infeasible.empty()) {
        result.status = SolveStatus::Infeasible;
        return result;
    }

    std::vector<std::size_t> pick(m, 0);
    std::vector<std::size_t> best_pick;
    double best_objective = 0.0, best_length = 0.0;
    std::vector<int> routes_on(static_cast<std::size_t>(net.edge_count()), 0);

    auto evaluate_leaf = [&]() {
        std::map<std::pair<EdgeId, std::int64_t>, int> cohort;
        std::fill(routes_on.begin(), routes_on.end(), 0);
        for (std::size_t i = 0; i < m; ++i) {
            const OraclePath& path = paths[i][pick[i]];
            for (std::size_t k = 0; k < path.edges.size(); ++k) {
                ++routes_on[static_cast<std::size_t>(path.edges[k])];
                if (p.sharing == SharingModel::Synchronized) ++cohort[{path.edges[k], path.entry[k]}];
            }
        }
        // Shared-cost cap for every member.
        for (std::size_t i = 0; i < m; ++i) {
            const OraclePath& path = paths[i][pick[i]];
            double cost = 0.0;
            for (std::size_t k = 0; k < path.edges.size(); ++k) {
                const EdgeId e = path.edges[k];
                const int share = p.sharing == SharingModel::RouteCount ? routes_on[static_cast<std::size_t>(e)]
                                                                        : cohort.at({e, path.entry[k]});
                cost += net.edge(e).density / share;
            }
            if (cost > p.members[i].max_cost + detail::tol(p.members[i].max_cost)) return;
        }
        double objective = 0.0;
        if (p.sharing == SharingModel::RouteCount) {
            for (EdgeId e = 0; e < net.edge_count(); ++e)
                if (routes_on[static_cast<std::size_t>(e)] > 0) objective += net.edge(e).density;
        } else {
            std::map<EdgeId, int> per_edge;
            for (const auto& [key, n] : cohort) ++per_edge[key.first];
            for (const auto& [e, n] : per_edge) objective += n * net.edge(e).density;
        }
        double length = 0.0;
        for (std::size_t i = 0; i < m; ++i) length += paths[i][pick[i]].length;

        bool better = best_pick.empty();
        if (!better) {
            const double eps = detail::tol(std::max(objective, best_objective));
            const double leps = detail::tol(std::max(length, best_length));
            if (objective < best_objective - eps) better = true;
            else if (objective <= best_objective + eps) {
                if (length < best_length - leps) better = true;
                else if (length <= best_length + leps) {
                    for (std::size_t i = 0; i < m; ++i) {
                        const auto& a = paths[i][pick[i]].vertices;
                        const auto& b = paths[i][best_pick[i]].vertices;
                        if (a != b) {
                            better = a < b;
                            break;
                        }
                    }
                }
            }
        }
        if (better) {
            best_pick = pick;
            best_objective = objective;
            best_length = length;
        }
    };

    auto recurse = [&](auto&& self, std::size_t i) -> void {
        if (i == m) {
            ++result.stats.nodes;
            evaluate_leaf();
            return;
        }
        for (std::size_t k = 0; k < paths[i].size(); ++k) {
            pick[i] = k;
            self(self, i + 1);
        }
    };
    recurse(recurse, 0);

    if (best_pick.empty()) {
        result.status = SolveStatus::Infeasible;
        for (std::size_t i = 0; i < m; ++i) {
            // Members whose cheapest feasible path alone already breaks the cap.
            double cheapest = std::numeric_limits<double>::infinity();
            for (const OraclePath& path : paths[i]) {
                double d = 0.0;
                for (EdgeId e : path.edges) d += net.edge(e).density;
                cheapest = std::min(cheapest, d);
            }
            if (cheapest > p.members[i].max_cost + detail::tol(p.members[i].max_cost))
                result.infeasible.push_back(p.members[i].id);
        }
        if (result.infeasible.empty()) result.infeasible.push_back(p.members.back().id);
        return result;
    }

    std::vector<std::vector<EdgeId>> routes(m);
    for (std::size_t i = 0; i < m; ++i) routes[i] = paths[i][best_pick[i]].edges;
    GroupingSolution sol = evaluate(p, routes);
    sol.objective = best_objective;
    result.status = SolveStatus::Optimal;
    result.solution = std::move(sol);
    return result;
}

}  // namespace pfara

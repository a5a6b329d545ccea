#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "optimizer_common.hpp"
#include "pfara/error.hpp"
#include "pfara/optimizer.hpp"

namespace pfara {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
    std::vector<EdgeId> edges;
    std::vector<VertexId> vertices;
    double extra = 0.0;
    double length = 0.0;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
    if (a.extra != b.extra) return a.extra < b.extra;
    if (a.length != b.length) return a.length < b.length;
    return a.vertices < b.vertices;
}

/// Lower bound on the density needed to connect `root` to every terminal
/// (directed Steiner arborescence) by dual ascent on reduced edge costs.
/// Terminal i may only be reached over edges with usable[i][e] set: a cut
/// around it then only needs those edges, which keeps the bound valid for
/// members whose length or time allowance rules out most of the network.
double steiner_dual_ascent(const RoadNetwork& net, VertexId root, std::span<const VertexId> terminals,
                           std::span<const std::vector<char>* const> usable, std::vector<double> reduced) {
    const auto n = static_cast<std::size_t>(net.vertex_count());
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < terminals.size(); ++i)
        if (terminals[i] != root) active.push_back(i);

    double scale = 0.0;
    for (double r : reduced) scale = std::max(scale, r);
    const double zero = 1e-12 * std::max(1.0, scale);

    std::vector<int> mark(n, -1);
    std::vector<VertexId> stack, component;
    double bound = 0.0;
    int stamp = 0;
    while (!active.empty()) {
        std::vector<std::size_t> still_active;
        for (std::size_t ti : active) {
            const std::vector<char>& ok = *usable[ti];
            // Vertices reaching the terminal through usable zero reduced cost edges.
            ++stamp;
            stack.assign(1, terminals[ti]);
            component.clear();
            mark[static_cast<std::size_t>(terminals[ti])] = stamp;
            bool rooted = false;
            while (!stack.empty()) {
                VertexId v = stack.back();
                stack.pop_back();
                component.push_back(v);
                if (v == root) rooted = true;
                for (EdgeId id : net.in_edges(v)) {
                    const VertexId u = net.edge(id).from;
                    const auto ei = static_cast<std::size_t>(id);
                    if (ok[ei] && mark[static_cast<std::size_t>(u)] != stamp && reduced[ei] <= zero) {
                        mark[static_cast<std::size_t>(u)] = stamp;
                        stack.push_back(u);
                    }
                }
            }
            if (rooted) continue;
            double delta = kInf;
            for (VertexId v : component)
                for (EdgeId id : net.in_edges(v))
                    if (ok[static_cast<std::size_t>(id)] && mark[static_cast<std::size_t>(net.edge(id).from)] != stamp)
                        delta = std::min(delta, reduced[static_cast<std::size_t>(id)]);
            if (!std::isfinite(delta)) return kInf;
            bound += delta;
            for (VertexId v : component)
                for (EdgeId id : net.in_edges(v))
                    if (ok[static_cast<std::size_t>(id)] && mark[static_cast<std::size_t>(net.edge(id).from)] != stamp) {
                        double& r = reduced[static_cast<std::size_t>(id)];
                        r = (r - delta <= zero) ? 0.0 : r - delta;
                    }
            still_active.push_back(ti);
        }
        active.swap(still_active);
    }
    return bound;
}

class Search {
public:
    Search(const GroupingProblem& problem, const SolveOptions& options)
        : p_(problem), net_(*problem.net), opt_(options), timing_(detail::group_timing(problem)) {
        const std::size_t m = p_.members.size();
        const std::size_t ne = static_cast<std::size_t>(net_.edge_count());
        density_.resize(ne);
        length_.resize(ne);
        for (const Edge& e : net_.edges()) {
            density_[static_cast<std::size_t>(e.id)] = e.density;
            length_[static_cast<std::size_t>(e.id)] = e.length_m;
        }
        hlen_.resize(m);
        htime_.resize(m);
        halone_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            hlen_[i] = distances_to(net_, p_.members[i].dest, length_);
            htime_[i] = distances_to(net_, p_.members[i].dest, timing_.time_s);
            halone_[i] = distances_to(net_, p_.members[i].dest, density_);
        }
        count_.assign(ne, 0);
        routes_.assign(m, {});

        // Edges that fit on some origin->dest path within each member's allowances.
        const std::vector<double> len_from = distances_from(net_, p_.origin, length_);
        const std::vector<double> time_from = distances_from(net_, p_.origin, timing_.time_s);
        usable_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const GroupMember& gm = p_.members[i];
            usable_[i].assign(ne, 0);
            for (const Edge& e : net_.edges()) {
                const auto ei = static_cast<std::size_t>(e.id);
                const auto u = static_cast<std::size_t>(e.from), v = static_cast<std::size_t>(e.to);
                usable_[i][ei] = len_from[u] + length_[ei] + hlen_[i][v] <= gm.max_length_m + detail::tol(gm.max_length_m) &&
                                 time_from[u] + timing_.time_s[ei] + htime_[i][v] <= gm.max_time_s + detail::tol(gm.max_time_s);
            }
        }
    }

    SolveResult run() {
        SolveResult result;
        const std::size_t m = p_.members.size();

        // Members without any route inside their length and time allowances
        // make every joint assignment infeasible.
        std::vector<VehicleId> hopeless;
        std::vector<VehicleId> cost_blocked;
        std::vector<std::vector<EdgeId>> own(m);
        for (std::size_t i = 0; i < m; ++i) {
            auto best = best_path(i, /*empty union*/ true);
            if (!best) {
                hopeless.push_back(p_.members[i].id);
                continue;
            }
            own[i] = best->edges;
            if (best->extra > p_.members[i].max_cost + detail::tol(p_.members[i].max_cost))
                cost_blocked.push_back(p_.members[i].id);
        }
        if (!hopeless.empty()) {
            result.status = SolveStatus::Infeasible;
            result.infeasible = hopeless;
            return result;
        }

        // Incumbents: warm start, every member alone, greedy sequential, overlap.
        if (opt_.warm_start) {
            // Members without a suggested route start from their own best path.
            std::vector<std::vector<EdgeId>> warm = *opt_.warm_start;
            if (warm.size() == m)
                for (std::size_t i = 0; i < m; ++i)
                    if (warm[i].empty()) warm[i] = own[i];
            offer(warm);
        }
        offer(own);
        offer(repaired(greedy(), own));
        offer(repaired(insertion(std::vector<std::vector<EdgeId>>(m)), own));
        {
            std::vector<std::vector<EdgeId>> overlap(m);
            bool ok = true;
            for (std::size_t i = 0; i < m && ok; ++i) {
                try {
                    overlap[i] = shortest_path(net_, p_.origin, p_.members[i].dest, Weight::Density).edges;
                } catch (const Error&) {
                    ok = false;
                }
            }
            if (ok) offer(overlap);
        }

        if (best_) {
            improve(own);
            reinsert_around_edges(own);
        }

        order_.resize(m);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            const double da = halone_[a][static_cast<std::size_t>(p_.origin)];
            const double db = halone_[b][static_cast<std::size_t>(p_.origin)];
            if (da != db) return da > db;
            return p_.members[a].id < p_.members[b].id;
        });
        rest_min_length_.assign(m + 1, 0.0);
        for (std::size_t k = m; k-- > 0;)
            rest_min_length_[k] = rest_min_length_[k + 1] + hlen_[order_[k]][static_cast<std::size_t>(p_.origin)];

        objective_ = 0.0;
        length_sum_ = 0.0;
        if (lower_bound(0) <= best_objective() + detail::tol(best_objective())) branch(0);

        result.stats = stats_;
        if (timed_out_) {
            result.status = SolveStatus::Timeout;
            result.incumbent = best_;
            return result;
        }
        if (!best_) {
            result.status = SolveStatus::Infeasible;
            result.infeasible = cost_blocked;
            if (result.infeasible.empty()) result.infeasible.push_back(p_.members.back().id);
            return result;
        }
        result.status = SolveStatus::Optimal;
        result.solution = best_;
        return result;
    }

private:
    double best_objective() const { return best_ ? best_->objective : kInf; }
    double best_length() const { return best_ ? best_->total_length_m : kInf; }

    void offer(const std::vector<std::vector<EdgeId>>& routes) {
        if (routes.size() != p_.members.size()) return;
        for (const auto& r : routes)
            if (r.empty()) return;
        GroupingSolution s = evaluate(p_, routes);
        if (!satisfies_budgets(p_, s)) {
            ++stats_.lazy_rejections;
            return;
        }
        if (!best_ || better_solution(p_, s, *best_)) best_ = std::move(s);
    }

    double extra_cost(EdgeId e, std::int64_t entry) const {
        const auto i = static_cast<std::size_t>(e);
        if (p_.sharing == SharingModel::RouteCount) return count_[i] > 0 ? 0.0 : density_[i];
        return cohorts_.contains({e, entry}) ? 0.0 : density_[i];
    }

    std::vector<double> relaxed_costs() const {
        std::vector<double> c(density_.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = count_[i] > 0 ? 0.0 : density_[i];
        return c;
    }

    void apply(std::size_t member, const std::vector<EdgeId>& edges) {
        std::int64_t key = 0;
        for (EdgeId e : edges) {
            const auto i = static_cast<std::size_t>(e);
            if (p_.sharing == SharingModel::RouteCount) {
                if (count_[i] == 0) objective_ += density_[i];
            } else {
                if (cohorts_[{e, key}]++ == 0) objective_ += density_[i];
            }
            ++count_[i];
            length_sum_ += length_[i];
            key += timing_.key_step[i];
        }
        routes_[member] = edges;
    }

    void undo(std::size_t member) {
        std::int64_t key = 0;
        for (EdgeId e : routes_[member]) {
            const auto i = static_cast<std::size_t>(e);
            --count_[i];
            if (p_.sharing == SharingModel::Synchronized) {
                auto it = cohorts_.find({e, key});
                if (--it->second == 0) cohorts_.erase(it);
            }
            key += timing_.key_step[i];
        }
        routes_[member].clear();
    }

    /// Lower bound on the additional union density needed by members order_[k..].
    double lower_bound(std::size_t k) const {
        if (k >= order_.size()) return objective_;
        const std::vector<double> c = relaxed_costs();
        const std::vector<double> from_origin = distances_from(net_, p_.origin, c);
        std::vector<VertexId> terminals;
        std::vector<const std::vector<char>*> usable;
        double single = 0.0;
        for (std::size_t j = k; j < order_.size(); ++j) {
            const VertexId d = p_.members[order_[j]].dest;
            terminals.push_back(d);
            usable.push_back(&usable_[order_[j]]);
            single = std::max(single, from_origin[static_cast<std::size_t>(d)]);
        }
        if (!std::isfinite(single)) return kInf;
        const double steiner = steiner_dual_ascent(net_, p_.origin, terminals, usable, c);
        return objective_ + std::max(single, steiner);
    }

    bool prunable(double bound, double length_bound) const {
        const double best = best_objective();
        if (!std::isfinite(best)) return !std::isfinite(bound);
        const double eps = detail::tol(best);
        if (bound > best + eps) return true;
        if (bound >= best - eps && length_bound > best_length() + detail::tol(best_length())) return true;
        return false;
    }

    struct EnumerationLimits {
        double extra_budget = kInf;  // total extra allowed for the path
        bool best_only = false;
        bool ignore_union = false;
        bool check_ties = true;
    };

    /// Depth-first enumeration of member paths from the origin under the
    /// length/time allowances and the extra-density budget.
    std::vector<Candidate> enumerate(std::size_t member, const std::vector<double>& hextra, EnumerationLimits lim,
                                     std::size_t depth_k) {
        std::vector<Candidate> out;
        const GroupMember& gm = p_.members[member];
        const auto& hl = hlen_[member];
        const auto& ht = htime_[member];
        const double leps = detail::tol(gm.max_length_m);
        const double teps = detail::tol(gm.max_time_s);
        std::vector<char> visited(static_cast<std::size_t>(net_.vertex_count()), 0);
        Candidate cur;
        cur.vertices.push_back(p_.origin);
        visited[static_cast<std::size_t>(p_.origin)] = 1;
        double time = 0.0;
        std::int64_t key = 0;

        auto budget_eps = [&] { return detail::tol(lim.extra_budget + objective_); };

        auto dfs = [&](auto&& self, VertexId at) -> void {
            if (timed_out_) return;
            if (at == gm.dest) {
                ++stats_.paths_enumerated;
                if (lim.best_only) {
                    if (out.empty() || candidate_less(cur, out.front())) out.assign(1, cur);
                    lim.extra_budget = std::min(lim.extra_budget, cur.extra);
                } else {
                    out.push_back(cur);
                    if (static_cast<std::int64_t>(out.size()) > opt_.path_limit) timed_out_ = true;
                }
                return;
            }
            for (EdgeId id : net_.out_edges(at)) {
                const Edge& e = net_.edge(id);
                const auto ui = static_cast<std::size_t>(e.to);
                if (visited[ui]) continue;
                const auto ei = static_cast<std::size_t>(id);
                const double step = lim.ignore_union ? density_[ei] : extra_cost(id, key);
                const double extra = cur.extra + step;
                if (extra + hextra[ui] > lim.extra_budget + budget_eps()) continue;
                const double length = cur.length + length_[ei];
                if (length + hl[ui] > gm.max_length_m + leps) continue;
                const double t = time + timing_.time_s[ei];
                if (t + ht[ui] > gm.max_time_s + teps) continue;
                if (lim.check_ties && best_) {
                    const double lb = objective_ + extra + hextra[ui];
                    const double len_lb = length_sum_ + length + hl[ui] + rest_min_length_[depth_k + 1];
                    if (prunable(lb, len_lb)) continue;
                }
                visited[ui] = 1;
                cur.edges.push_back(id);
                cur.vertices.push_back(e.to);
                const double saved_extra = cur.extra, saved_length = cur.length, saved_time = time;
                const std::int64_t saved_key = key;
                cur.extra = extra;
                cur.length = length;
                time = t;
                key += timing_.key_step[ei];
                self(self, e.to);
                cur.extra = saved_extra;
                cur.length = saved_length;
                time = saved_time;
                key = saved_key;
                cur.edges.pop_back();
                cur.vertices.pop_back();
                visited[ui] = 0;
            }
        };
        dfs(dfs, p_.origin);
        return out;
    }

    std::optional<Candidate> best_path(std::size_t member, bool ignore_union) {
        const std::vector<double> c = ignore_union ? density_ : relaxed_costs();
        const std::vector<double> h = distances_to(net_, p_.members[member].dest, c);
        EnumerationLimits lim;
        lim.best_only = true;
        lim.ignore_union = ignore_union;
        lim.check_ties = false;
        auto found = enumerate(member, h, lim, 0);
        if (found.empty()) return std::nullopt;
        return found.front();
    }

    std::vector<std::vector<EdgeId>> greedy() {
        const std::size_t m = p_.members.size();
        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return halone_[a][static_cast<std::size_t>(p_.origin)] > halone_[b][static_cast<std::size_t>(p_.origin)];
        });
        std::vector<std::vector<EdgeId>> routes(m);
        for (std::size_t i : idx) {
            auto best = best_path(i, false);
            if (!best) break;
            apply(i, best->edges);
            routes[i] = best->edges;
        }
        for (std::size_t i : idx)
            if (!routes_[i].empty()) undo(i);
        objective_ = 0.0;
        length_sum_ = 0.0;
        return routes;
    }

    /// Cheapest insertion: members without a route in `routes` are added one
    /// at a time, always the one whose best path adds the least density to
    /// the union built so far.
    std::vector<std::vector<EdgeId>> insertion(std::vector<std::vector<EdgeId>> routes) {
        const std::size_t m = p_.members.size();
        std::vector<std::size_t> placed;
        for (std::size_t i = 0; i < m; ++i)
            if (!routes[i].empty()) {
                apply(i, routes[i]);
                placed.push_back(i);
            }
        while (true) {
            std::optional<Candidate> pick;
            std::size_t who = m;
            bool stuck = false;
            for (std::size_t i = 0; i < m && !stuck; ++i) {
                if (!routes[i].empty()) continue;
                auto c = best_path(i, false);
                if (!c) stuck = true;
                else if (!pick || c->extra < pick->extra - detail::tol(pick->extra)) {
                    pick = std::move(c);
                    who = i;
                }
            }
            if (stuck || !pick) break;
            apply(who, pick->edges);
            routes[who] = pick->edges;
            placed.push_back(who);
        }
        for (std::size_t i : placed) undo(i);
        objective_ = 0.0;
        length_sum_ = 0.0;
        return routes;
    }

    /// Large-neighbourhood step: for each edge of the incumbent's union, drop
    /// every member using it and insert them again around the others.
    void reinsert_around_edges(const std::vector<std::vector<EdgeId>>& own) {
        const std::size_t m = p_.members.size();
        for (std::size_t round = 0; round < 2 * m + 2 && best_; ++round) {
            bool improved = false;
            const GroupingSolution current = *best_;
            for (EdgeId e : current.union_edges) {
                std::vector<std::vector<EdgeId>> routes;
                std::size_t dropped = 0;
                for (const GroupMember& gm : p_.members) {
                    const auto& r = current.routes.at(gm.id);
                    routes.push_back(std::find(r.begin(), r.end(), e) == r.end() ? r : std::vector<EdgeId>{});
                    dropped += routes.back().empty();
                }
                if (dropped == 0 || dropped == m) continue;
                offer(repaired(insertion(std::move(routes)), own));
                if (better_solution(p_, *best_, current)) {
                    improved = true;
                    break;
                }
            }
            if (!improved) break;
            improve(own);
        }
    }

    /// Sends members over their cost cap back to their own best path until
    /// the assignment fits (own paths always do, since sharing only lowers prices).
    std::vector<std::vector<EdgeId>> repaired(std::vector<std::vector<EdgeId>> routes,
                                              const std::vector<std::vector<EdgeId>>& own) const {
        const std::size_t m = p_.members.size();
        for (const auto& r : routes)
            if (r.empty()) return routes;
        for (std::size_t round = 0; round <= m; ++round) {
            const GroupingSolution s = evaluate(p_, routes);
            bool changed = false;
            for (std::size_t i = 0; i < m; ++i) {
                const GroupMember& gm = p_.members[i];
                if (s.cost.at(gm.id) > gm.max_cost + detail::tol(gm.max_cost) && routes[i] != own[i]) {
                    routes[i] = own[i];
                    changed = true;
                }
            }
            if (!changed) break;
        }
        return routes;
    }

    /// Best-response local search from the incumbent: re-route one member at a
    /// time against everyone else's union while that improves the incumbent.
    void improve(const std::vector<std::vector<EdgeId>>& own) {
        const std::size_t m = p_.members.size();
        for (std::size_t round = 0; round < 4 * m + 4; ++round) {
            bool improved = false;
            for (std::size_t i = 0; i < m; ++i) {
                std::vector<std::vector<EdgeId>> routes;
                for (const GroupMember& gm : p_.members) routes.push_back(best_->routes.at(gm.id));
                for (std::size_t j = 0; j < m; ++j)
                    if (j != i) apply(j, routes[j]);
                auto cand = best_path(i, false);
                for (std::size_t j = 0; j < m; ++j)
                    if (j != i) undo(j);
                objective_ = 0.0;
                length_sum_ = 0.0;
                if (!cand || cand->edges == routes[i]) continue;
                routes[i] = cand->edges;
                const double before = best_->objective, before_len = best_->total_length_m;
                offer(repaired(routes, own));
                if (best_->objective < before - detail::tol(before) ||
                    (best_->objective <= before + detail::tol(before) &&
                     best_->total_length_m < before_len - detail::tol(before_len)))
                    improved = true;
            }
            if (!improved) break;
        }
    }

    void leaf() {
        const std::size_t m = p_.members.size();
        // Cost cap, evaluated exactly for the complete assignment.
        for (std::size_t i = 0; i < m; ++i) {
            double cost = 0.0;
            std::int64_t key = 0;
            for (EdgeId e : routes_[i]) {
                const auto ei = static_cast<std::size_t>(e);
                const int sharers = p_.sharing == SharingModel::RouteCount ? count_[ei] : cohorts_.at({e, key});
                cost += density_[ei] / sharers;
                key += timing_.key_step[ei];
            }
            if (cost > p_.members[i].max_cost + detail::tol(p_.members[i].max_cost)) {
                ++stats_.lazy_rejections;
                return;
            }
        }
        if (best_) {
            const double eps = detail::tol(best_->objective);
            if (objective_ > best_->objective + eps) return;
            if (objective_ >= best_->objective - eps &&
                length_sum_ > best_->total_length_m + detail::tol(best_->total_length_m))
                return;
        }
        GroupingSolution s = evaluate(p_, routes_);
        if (!best_ || better_solution(p_, s, *best_)) best_ = std::move(s);
    }

    void branch(std::size_t k) {
        if (timed_out_) return;
        if (k == order_.size()) {
            leaf();
            return;
        }
        const std::size_t member = order_[k];
        const std::vector<double> hextra = distances_to(net_, p_.members[member].dest, relaxed_costs());
        EnumerationLimits lim;
        lim.extra_budget = best_ ? best_objective() - objective_ : kInf;
        std::vector<Candidate> cands = enumerate(member, hextra, lim, k);
        if (timed_out_) return;
        std::sort(cands.begin(), cands.end(), candidate_less);

        for (const Candidate& c : cands) {
            if (best_ && objective_ + c.extra > best_objective() + detail::tol(best_objective())) break;
            if (++stats_.nodes > opt_.node_limit) {
                timed_out_ = true;
                return;
            }
            const double saved_objective = objective_;
            const double saved_length = length_sum_;
            apply(member, c.edges);
            const double bound = lower_bound(k + 1);
            if (!prunable(bound, length_sum_ + rest_min_length_[k + 1])) branch(k + 1);
            undo(member);
            objective_ = saved_objective;
            length_sum_ = saved_length;
            if (timed_out_) return;
        }
    }

    const GroupingProblem& p_;
    const RoadNetwork& net_;
    SolveOptions opt_;
    detail::GroupTiming timing_;
    std::vector<double> density_;
    std::vector<double> length_;
    std::vector<std::vector<double>> hlen_, htime_, halone_;
    std::vector<int> count_;
    std::vector<std::vector<char>> usable_;
    std::unordered_map<detail::CohortKey, int, detail::CohortHash> cohorts_;
    std::vector<std::vector<EdgeId>> routes_;
    std::vector<std::size_t> order_;
    std::vector<double> rest_min_length_;
    double objective_ = 0.0;
    double length_sum_ = 0.0;
    std::optional<GroupingSolution> best_;
    SolveStats stats_;
    bool timed_out_ = false;
};

}  // namespace

SolveResult solve(const GroupingProblem& problem, const SolveOptions& options) {
    const GroupingProblem p = detail::normalized(problem);
    Search search(p, options);
    return search.run();
}

}  // namespace pfara

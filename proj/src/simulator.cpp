#include "pfara/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include <json.hpp>

#include "pfara/clustering.hpp"
#include "pfara/error.hpp"
#include "text_util.hpp"

namespace pfara {

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Pfara: return "pfara";
        case Algorithm::Overlap: return "overlap";
        case Algorithm::Alone: return "alone";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "pfara") return Algorithm::Pfara;
    if (name == "overlap") return Algorithm::Overlap;
    if (name == "alone") return Algorithm::Alone;
    throw Error(ErrorKind::Usage, "unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::Creation: return "Creation";
        case EventKind::Departure: return "Departure";
        case EventKind::Arrival: return "Arrival";
        case EventKind::Completed: return "Completed";
        case EventKind::Formed: return "Formed";
        case EventKind::Split: return "Split";
    }
    return "?";
}

std::map<VertexId, std::vector<VehicleId>> meetings_at(std::int64_t tick, const SimulationState& state) {
    std::map<VertexId, std::vector<VehicleId>> out;
    for (const VehiclePosition& p : state.positions) {
        if (p.completed) continue;
        if (p.on_edge) {
            if (p.arrive_tick == tick && state.net != nullptr) out[state.net->edge(p.edge).to].push_back(p.id);
        } else if (p.standing_since == tick) {
            out[p.vertex].push_back(p.id);
        }
    }
    for (auto& [v, ids] : out) std::sort(ids.begin(), ids.end());
    return out;
}

namespace {

// Phases order the events of one tick: a vehicle's own events always follow
// Creation/Arrival -> Split -> Completed, or -> Formed -> Departure.
enum Phase { kCreation, kArrival, kSplit, kCompleted, kFormed, kDeparture };

struct PendingEvent {
    Phase phase;
    EventRecord record;
};

// (edge, entry tick, duration in ticks)
using SlotKey = std::tuple<EdgeId, std::int64_t, std::int64_t>;

struct Agent {
    Vehicle v;
    BudgetState budget;
    std::vector<EdgeId> plan;
    std::size_t next = 0;
    std::int64_t plan_id = -1;
    double speed = 0.0;

    VertexId vertex = 0;
    bool on_edge = false;
    std::int64_t standing_since = 0;
    int traversal = -1;
    bool completed = false;
    std::int64_t completed_tick = -1;

    std::vector<VehicleId> cohort;  // members of the last traversal, self included
    std::vector<SlotKey> slots;
    std::vector<EdgeId> trace;

    bool planned() const { return plan_id >= 0; }
};

class Simulation {
public:
    Simulation(const RoadNetwork& net, std::span<const Vehicle> vehicles, const SimulationConfig& config,
               Algorithm algorithm)
        : net_(net), config_(config), algorithm_(algorithm) {
        if (!(config.tick_seconds > 0.0))
            throw Error(ErrorKind::InvariantViolation, "tick_seconds must be positive");
        std::vector<Vehicle> sorted(vehicles.begin(), vehicles.end());
        std::sort(sorted.begin(), sorted.end(), [](const Vehicle& a, const Vehicle& b) { return a.id < b.id; });
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const Vehicle& v = sorted[i];
            validate(v);
            if (i > 0 && v.id == sorted[i - 1].id)
                throw Error(ErrorKind::InvariantViolation, "duplicate vehicle id " + std::to_string(v.id));
            if (!net.has_vertex(v.origin) || !net.has_vertex(v.dest))
                throw Error(ErrorKind::InvariantViolation, "vehicle " + std::to_string(v.id) + " endpoint not in network");
            if (v.origin == v.dest)
                throw Error(ErrorKind::InvariantViolation, "vehicle " + std::to_string(v.id) + " starts at its destination");
            Agent a;
            a.v = v;
            a.budget = initial_budget(v);
            a.vertex = v.origin;
            a.speed = v.max_speed_mps;
            a.cohort = {v.id};
            index_[v.id] = agents_.size();
            agents_.push_back(std::move(a));
        }
        result_.algorithm = algorithm;
    }

    SimulationResult run() {
        std::int64_t tick = 0;
        std::vector<int> arrived;  // traversal indices arriving this tick
        for (Agent& a : agents_) emit(kCreation, tick, a.vertex, a.v.id, EventKind::Creation,
                                      "origin " + std::to_string(a.v.origin) + " dest " + std::to_string(a.v.dest));
        while (true) {
            stage(tick, arrived);
            std::int64_t next = std::numeric_limits<std::int64_t>::max();
            for (const Agent& a : agents_)
                if (a.on_edge) next = std::min(next, result_.traversals[static_cast<std::size_t>(a.traversal)].arrive_tick);
            if (next == std::numeric_limits<std::int64_t>::max()) break;
            if (next > config_.max_ticks)
                throw Error(ErrorKind::TickCapExceeded,
                            "simulation still running after " + std::to_string(config_.max_ticks) + " ticks");
            tick = next;
            arrived = arrive(tick);
        }
        result_.final_tick = tick;

        std::stable_sort(pending_.begin(), pending_.end(), [](const PendingEvent& a, const PendingEvent& b) {
            return std::tie(a.record.tick, a.phase, a.record.vehicle) < std::tie(b.record.tick, b.phase, b.record.vehicle);
        });
        for (PendingEvent& e : pending_) result_.events.push_back(std::move(e.record));
        for (const Agent& a : agents_) {
            VehicleStats s;
            s.id = a.v.id;
            s.provider = a.v.provider;
            s.completed = a.completed;
            s.completed_tick = a.completed_tick;
            s.budget = a.budget;
            s.trace = a.trace;
            result_.vehicles.push_back(std::move(s));
        }
        return std::move(result_);
    }

private:
    void emit(Phase phase, std::int64_t tick, VertexId at, VehicleId id, EventKind kind, std::string detail) {
        pending_.push_back({phase, {tick, at, id, kind, std::move(detail)}});
    }

    Agent& agent(VehicleId id) { return agents_[index_.at(id)]; }

    std::int64_t ticks_for(EdgeId e, double speed) const {
        const double t = edge_time(net_.edge(e).length_m, speed, config_.tick_seconds);
        return std::llround(t / config_.tick_seconds);
    }

    SimulationState snapshot(std::int64_t tick) const {
        SimulationState s;
        s.net = &net_;
        s.tick = tick;
        for (const Agent& a : agents_) {
            VehiclePosition p;
            p.id = a.v.id;
            p.completed = a.completed;
            p.on_edge = a.on_edge;
            p.vertex = a.vertex;
            p.standing_since = a.standing_since;
            if (a.on_edge) {
                const CohortTraversal& t = result_.traversals[static_cast<std::size_t>(a.traversal)];
                p.edge = t.edge;
                p.depart_tick = t.depart_tick;
                p.arrive_tick = t.arrive_tick;
            }
            s.positions.push_back(p);
        }
        return s;
    }

    // -- reservations: where each plan expects its vehicle to be ------------

    void unreserve(Agent& a) {
        for (const SlotKey& k : a.slots) {
            auto it = slots_.find(k);
            it->second.erase(a.v.id);
            if (it->second.empty()) slots_.erase(it);
        }
        a.slots.clear();
    }

    void reserve(Agent& a, std::int64_t tick) {
        unreserve(a);
        std::int64_t entry = tick;
        for (std::size_t k = a.next; k < a.plan.size(); ++k) {
            const std::int64_t d = ticks_for(a.plan[k], a.speed);
            SlotKey key{a.plan[k], entry, d};
            slots_[key].insert(a.v.id);
            a.slots.push_back(key);
            entry += d;
        }
    }

    std::set<VehicleId> co_sharers(const Agent& a) const {
        std::set<VehicleId> out;
        for (const SlotKey& k : a.slots)
            for (VehicleId w : slots_.at(k))
                if (w != a.v.id) out.insert(w);
        return out;
    }

    void assign(Agent& a, std::vector<EdgeId> route, double speed, std::int64_t plan_id, std::int64_t tick) {
        a.plan = std::move(route);
        a.next = 0;
        a.plan_id = plan_id;
        a.speed = speed;
        reserve(a, tick);
    }

    // -- planning ------------------------------------------------------------

    GroupingProblem problem_for(VertexId at, const std::vector<VehicleId>& ids, double speed, SharingModel sharing) {
        GroupingProblem p;
        p.net = &net_;
        p.origin = at;
        p.speed_mps = speed;
        p.tick_seconds = config_.tick_seconds;
        p.sharing = sharing;
        for (VehicleId id : ids) p.members.push_back(member_from(agent(id).v, agent(id).budget));
        return p;
    }

    void assign_solution(const std::vector<VehicleId>& ids, const GroupingSolution& sol, double speed, std::int64_t tick) {
        const std::int64_t id = next_plan_++;
        for (VehicleId v : ids) assign(agent(v), sol.routes.at(v), speed, id, tick);
    }

    // Last resort for a vehicle the group solve could not place.
    void fallback(VehicleId id, VertexId at, std::int64_t tick) {
        ++result_.infeasible_fallbacks;
        Agent& a = agent(id);
        const GroupingProblem p = problem_for(at, {id}, a.v.max_speed_mps, SharingModel::Synchronized);
        SolveOptions opt;
        opt.node_limit = config_.node_limit;
        ++result_.solves;
        const SolveResult r = solve(p, opt);
        const GroupingSolution* sol = r.solution ? &*r.solution : (r.incumbent ? &*r.incumbent : nullptr);
        if (sol != nullptr) {
            assign(a, sol->routes.at(id), a.v.max_speed_mps, next_plan_++, tick);
            return;
        }
        if (a.planned()) return;  // keep the previous plan and its expected sharing
        throw Error(ErrorKind::Infeasible, "vehicle " + std::to_string(id) + " has no route within its allowances from vertex " +
                                               std::to_string(at));
    }

    void solve_group(VertexId at, std::vector<VehicleId> ids, double speed, std::int64_t tick) {
        while (!ids.empty()) {
            const GroupingProblem p = problem_for(at, ids, speed, SharingModel::Synchronized);
            SolveOptions opt;
            opt.node_limit = config_.node_limit;
            std::vector<std::vector<EdgeId>> warm;
            for (VehicleId id : ids) {
                const Agent& a = agent(id);
                warm.emplace_back(a.planned() ? std::vector<EdgeId>(a.plan.begin() + static_cast<std::ptrdiff_t>(a.next), a.plan.end())
                                              : std::vector<EdgeId>{});
            }
            opt.warm_start = std::move(warm);
            ++result_.solves;
            const SolveResult r = solve(p, opt);
            if (r.status == SolveStatus::Optimal) {
                assign_solution(ids, *r.solution, speed, tick);
                return;
            }
            if (r.status == SolveStatus::Timeout) {
                ++result_.timeout_fallbacks;
                std::vector<std::vector<EdgeId>> routes;
                bool ok = true;
                for (VehicleId id : ids) {
                    try {
                        routes.push_back(shortest_path(net_, at, agent(id).v.dest, Weight::Density).edges);
                    } catch (const Error&) {
                        ok = false;
                    }
                }
                if (ok) {
                    GroupingSolution sol = evaluate(p, routes);
                    if (satisfies_budgets(p, sol)) {
                        assign_solution(ids, sol, speed, tick);
                        return;
                    }
                }
                if (r.incumbent) {
                    assign_solution(ids, *r.incumbent, speed, tick);
                    return;
                }
                for (VehicleId id : ids) fallback(id, at, tick);
                return;
            }
            for (VehicleId bad : r.infeasible) {
                ids.erase(std::remove(ids.begin(), ids.end(), bad), ids.end());
                fallback(bad, at, tick);
            }
        }
    }

    void overlap_group(VertexId at, const std::vector<VehicleId>& ids, double speed, std::int64_t tick) {
        const std::int64_t plan = next_plan_++;
        for (VehicleId id : ids) {
            Agent& a = agent(id);
            assign(a, shortest_path(net_, at, a.v.dest, Weight::Density).edges, speed, plan, tick);
        }
    }

    void replan(VertexId at, const std::vector<VehicleId>& standing, std::int64_t tick) {
        // A vehicle whose plan shares a future edge with someone not standing
        // here keeps that plan, and so does everyone it shares with here.
        std::set<VehicleId> here(standing.begin(), standing.end()), locked;
        for (VehicleId id : standing)
            for (VehicleId w : co_sharers(agent(id)))
                if (!here.contains(w)) locked.insert(id);
        for (bool grew = true; grew;) {
            grew = false;
            for (VehicleId id : std::vector<VehicleId>(locked.begin(), locked.end()))
                for (VehicleId w : co_sharers(agent(id)))
                    if (here.contains(w) && locked.insert(w).second) grew = true;
        }

        // Provider compatibility: greedy buckets in id order.
        std::vector<std::vector<Vehicle>> buckets;
        for (VehicleId id : standing) {
            if (locked.contains(id)) continue;
            const Vehicle& v = agent(id).v;
            bool placed = false;
            for (auto& b : buckets) {
                if (std::all_of(b.begin(), b.end(), [&](const Vehicle& w) { return config_.compatible(v.provider, w.provider); })) {
                    b.push_back(v);
                    placed = true;
                    break;
                }
            }
            if (!placed) buckets.push_back({v});
        }
        for (const auto& bucket : buckets) {
            for (const SpeedGroup& g : cluster_by_speed(bucket)) {
                if (algorithm_ == Algorithm::Pfara) solve_group(at, g.members, g.speed_mps, tick);
                else overlap_group(at, g.members, g.speed_mps, tick);
            }
        }
    }

    bool triggered(const std::vector<VehicleId>& standing) {
        if (config_.reoptimize == Reoptimize::EveryNode) return true;
        std::set<std::int64_t> plans;
        for (VehicleId id : standing) {
            const Agent& a = agent(id);
            if (!a.planned()) return true;
            plans.insert(a.plan_id);
        }
        return plans.size() >= 2;
    }

    // -- movement ------------------------------------------------------------

    std::vector<int> arrive(std::int64_t tick) {
        std::vector<int> arrived;
        for (Agent& a : agents_) {
            if (!a.on_edge) continue;
            const CohortTraversal& t = result_.traversals[static_cast<std::size_t>(a.traversal)];
            if (t.arrive_tick != tick) continue;
            if (arrived.empty() || arrived.back() != a.traversal) {
                if (std::find(arrived.begin(), arrived.end(), a.traversal) == arrived.end()) arrived.push_back(a.traversal);
            }
            const Edge& e = net_.edge(t.edge);
            const double elapsed = static_cast<double>(t.arrive_tick - t.depart_tick) * config_.tick_seconds;
            try {
                a.budget = debit(a.budget, e.length_m, elapsed, t.price_each, algorithm_ == Algorithm::Pfara);
            } catch (const Error& err) {
                throw Error(err.kind(), "vehicle " + std::to_string(a.v.id) + " on edge " + std::to_string(t.edge) +
                                            " at tick " + std::to_string(tick) + ": " + err.what());
            }
            a.budget.position = e.to;
            a.budget.clock_ticks = tick;
            a.on_edge = false;
            a.vertex = e.to;
            a.standing_since = tick;
            a.trace.push_back(t.edge);
            ++a.next;
            emit(kArrival, tick, e.to, a.v.id, EventKind::Arrival,
                 "edge " + std::to_string(t.edge) + " price " + detail::format_double(t.price_each));
            if (e.to == a.v.dest) {
                a.completed = true;
                a.completed_tick = tick;
                unreserve(a);
            }
        }
        std::sort(arrived.begin(), arrived.end());
        return arrived;
    }

    void stage(std::int64_t tick, const std::vector<int>& arrived) {
        const auto meetings = meetings_at(tick, snapshot(tick));

        // Plan.
        for (const auto& [at, ids] : meetings) {
            if (algorithm_ == Algorithm::Alone) {
                for (VehicleId id : ids) {
                    Agent& a = agent(id);
                    if (!a.planned())
                        assign(a, shortest_path(net_, at, a.v.dest, Weight::Density).edges, a.v.max_speed_mps,
                               next_plan_++, tick);
                }
            } else if (triggered(ids)) {
                replan(at, ids, tick);
            }
        }

        // Depart: vehicles on the same edge, tick and speed form one cohort.
        std::map<std::tuple<EdgeId, std::int64_t, VehicleId>, std::vector<VehicleId>> groups;
        for (const auto& [at, ids] : meetings) {
            for (VehicleId id : ids) {
                Agent& a = agent(id);
                if (a.next >= a.plan.size())
                    throw Error(ErrorKind::InvariantViolation, "vehicle " + std::to_string(id) + " has no next edge");
                if (algorithm_ != Algorithm::Alone && a.speed != a.v.max_speed_mps && co_sharers(a).empty()) {
                    a.speed = a.v.max_speed_mps;  // nobody to wait for
                    reserve(a, tick);
                }
                const EdgeId e = a.plan[a.next];
                const VehicleId solo = algorithm_ == Algorithm::Alone ? id : -1;
                groups[{e, ticks_for(e, a.speed), solo}].push_back(id);
            }
        }
        std::map<VehicleId, int> departs;
        for (auto& [key, ids] : groups) {
            const auto& [e, duration, solo] = key;
            CohortTraversal t;
            t.edge = e;
            t.depart_tick = tick;
            t.arrive_tick = tick + duration;
            t.members = ids;
            t.price_each = net_.edge(e).density / static_cast<double>(ids.size());
            const int index = static_cast<int>(result_.traversals.size());
            result_.traversals.push_back(std::move(t));
            for (VehicleId id : ids) departs[id] = index;
        }

        split_events(tick, arrived, departs);

        for (int index : arrived)
            for (VehicleId id : result_.traversals[static_cast<std::size_t>(index)].members) {
                const Agent& a = agent(id);
                if (a.completed && a.completed_tick == tick)
                    emit(kCompleted, tick, a.vertex, id, EventKind::Completed,
                         "cost " + detail::format_double(a.budget.accrued_cost) + " length " +
                             detail::format_double(a.budget.travelled_length_m) + " time " +
                             detail::format_double(a.budget.travelled_time_s));
            }

        for (const auto& [id, index] : departs) {
            Agent& a = agent(id);
            const CohortTraversal& t = result_.traversals[static_cast<std::size_t>(index)];
            if (t.members.size() >= 2) {
                const bool fresh = std::any_of(t.members.begin(), t.members.end(), [&](VehicleId w) {
                    return !std::binary_search(a.cohort.begin(), a.cohort.end(), w);
                });
                if (fresh) {
                    std::string with;
                    for (VehicleId w : t.members) with += (with.empty() ? "" : ",") + std::to_string(w);
                    emit(kFormed, tick, a.vertex, id, EventKind::Formed, "platoon " + with);
                }
            }
            a.cohort = t.members;
            a.on_edge = true;
            a.traversal = index;
            emit(kDeparture, tick, a.vertex, id, EventKind::Departure,
                 "edge " + std::to_string(t.edge) + " to " + std::to_string(net_.edge(t.edge).to) + " arrive " +
                     std::to_string(t.arrive_tick));
        }
    }

    void split_events(std::int64_t tick, const std::vector<int>& arrived, const std::map<VehicleId, int>& departs) {
        for (int index : arrived) {
            const auto& members = result_.traversals[static_cast<std::size_t>(index)].members;
            if (members.size() < 2) continue;
            // Parts: vehicles continuing on the same next cohort; finishers alone.
            std::map<int, std::vector<VehicleId>> parts;
            bool anyone_continues = false;
            for (VehicleId id : members) {
                auto it = departs.find(id);
                if (it == departs.end()) parts[-1 - id].push_back(id);
                else {
                    parts[it->second].push_back(id);
                    anyone_continues = true;
                }
            }
            if (!anyone_continues) continue;  // the whole platoon finished together
            const std::vector<VehicleId>* keep = nullptr;
            for (const auto& [k, part] : parts) {
                if (part.size() < 2) continue;
                if (keep == nullptr || part.size() > keep->size() || (part.size() == keep->size() && part.front() < keep->front()))
                    keep = &part;
            }
            for (VehicleId id : members) {
                if (keep != nullptr && std::binary_search(keep->begin(), keep->end(), id)) continue;
                const bool done = !departs.contains(id);
                emit(kSplit, tick, agent(id).vertex, id, EventKind::Split, done ? "completed" : "end of common route");
            }
        }
    }

    const RoadNetwork& net_;
    const SimulationConfig& config_;
    Algorithm algorithm_;
    std::vector<Agent> agents_;
    std::map<VehicleId, std::size_t> index_;
    std::map<SlotKey, std::set<VehicleId>> slots_;
    std::int64_t next_plan_ = 0;
    std::vector<PendingEvent> pending_;
    SimulationResult result_;
};

}  // namespace

SimulationResult run(const RoadNetwork& net, std::span<const Vehicle> vehicles, const SimulationConfig& config,
                     Algorithm algorithm) {
    Simulation sim(net, vehicles, config, algorithm);
    return sim.run();
}

std::string events_to_jsonl(std::span<const EventRecord> events) {
    std::string out;
    for (const EventRecord& e : events) {
        nlohmann::ordered_json j;
        j["tick"] = e.tick;
        j["vertex"] = e.vertex;
        j["vehicle"] = e.vehicle;
        j["kind"] = to_string(e.kind);
        j["detail"] = e.detail;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace pfara

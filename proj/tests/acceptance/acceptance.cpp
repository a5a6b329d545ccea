// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pfara/error.hpp"
#include "pfara/network.hpp"
#include "pfara/optimizer.hpp"
#include "pfara/reporting.hpp"
#include "pfara/rng.hpp"
#include "pfara/scenarios.hpp"
#include "pfara/simulator.hpp"

using namespace pfara;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Random grid problem for the oracle comparison.
GroupingProblem random_problem(const RoadNetwork& net, SplitMix64& rng, SharingModel sharing) {
    GroupingProblem p;
    p.net = &net;
    p.origin = static_cast<VertexId>(rng.below(static_cast<std::uint64_t>(net.vertex_count())));
    p.speed_mps = 10.0;
    p.sharing = sharing;
    p.tick_seconds = sharing == SharingModel::Synchronized ? 1.0 : 0.0;
    const int members = 2 + static_cast<int>(rng.below(2));
    for (int i = 0; i < members; ++i) {
        GroupMember m;
        m.id = i;
        do m.dest = static_cast<VertexId>(rng.below(static_cast<std::uint64_t>(net.vertex_count())));
        while (m.dest == p.origin);
        const double geodesic = shortest_path(net, p.origin, m.dest, Weight::Length).weight;
        m.max_length_m = geodesic * rng.uniform(1.0, 1.8);
        m.max_time_s = geodesic / p.speed_mps * rng.uniform(1.0, 2.0) + 1.0;
        m.max_cost = alone_cost(net, p.origin, m.dest) * rng.uniform(0.7, 1.3);
        p.members.push_back(m);
    }
    return p;
}

RoadNetwork random_grid(int side, SplitMix64& rng) {
    RoadNetwork g = make_grid(side, side, 100.0);
    std::vector<double> d;
    for (int i = 0; i < g.edge_count(); ++i) d.push_back(rng.uniform(0.001, 0.1));
    return g.with_densities(d);
}

std::string prices_check(const GroupingProblem& p, const GroupingSolution& s) {
    std::map<EdgeId, double> paid;
    for (const auto& [key, price] : s.prices) paid[key.second] += price;
    double total = 0.0;
    for (const auto& [v, c] : s.cost) total += c;
    if (std::abs(total - s.objective) > 1e-9 * std::max(1.0, s.objective)) return "group total differs from objective";
    if (p.sharing == SharingModel::RouteCount) {
        for (EdgeId e : s.union_edges)
            if (std::abs(paid[e] - p.net->edge(e).density) > 1e-12) return "edge " + std::to_string(e) + " not fully paid";
    }
    return {};
}

// -- 1 + 3: oracle equivalence and price conservation -------------------------

struct OracleRun {
    Outcome equivalence, conservation;
};

OracleRun oracle_equivalence() {
    OracleRun out;
    SplitMix64 rng(2024);
    const auto t0 = Clock::now();
    int solved = 0, infeasible = 0, priced = 0;
    for (int k = 0; k < 200; ++k) {
        const int side = k % 2 == 0 ? 3 : 4;
        const RoadNetwork net = random_grid(side, rng);
        const SharingModel sharing = k % 4 < 2 ? SharingModel::RouteCount : SharingModel::Synchronized;
        const GroupingProblem p = random_problem(net, rng, sharing);
        const SolveResult a = solve(p);
        const SolveResult b = brute_force_oracle(p, side * side);
        if (a.status != b.status) {
            out.equivalence = {false, "problem " + std::to_string(k) + ": status differs"};
            return out;
        }
        if (a.status == SolveStatus::Infeasible) {
            ++infeasible;
            continue;
        }
        ++solved;
        const double diff = std::abs(a.solution->objective - b.solution->objective);
        if (diff > 1e-9) {
            out.equivalence = {false, "problem " + std::to_string(k) + ": objective differs by " + std::to_string(diff)};
            return out;
        }
        if (const std::string err = prices_check(p, *a.solution); !err.empty() && out.conservation.ok)
            out.conservation = {false, "problem " + std::to_string(k) + ": " + err};
        ++priced;
    }
    const double secs = seconds_since(t0);
    if (secs > 300.0) out.equivalence = {false, "took " + std::to_string(secs) + " s"};
    else
        out.equivalence.detail = "200 problems (" + std::to_string(solved) + " solved, " + std::to_string(infeasible) +
                                 " infeasible) matched the exhaustive oracle in " + std::to_string(secs) + " s";
    if (out.conservation.ok) out.conservation.detail = std::to_string(priced) + " solutions balance per edge and in total";
    return out;
}

// -- 2: single-vehicle reduction --------------------------------------------

Outcome single_vehicle(const RoadNetwork& net) {
    SplitMix64 rng(77);
    for (int k = 0; k < 100; ++k) {
        GroupingProblem p;
        p.net = &net;
        p.speed_mps = 10.0;
        p.origin = static_cast<VertexId>(rng.below(static_cast<std::uint64_t>(net.vertex_count())));
        GroupMember m;
        do m.dest = static_cast<VertexId>(rng.below(static_cast<std::uint64_t>(net.vertex_count())));
        while (m.dest == p.origin);
        m.max_length_m = m.max_time_s = m.max_cost = 1e12;
        p.members.push_back(m);
        const Path sp = shortest_path(net, p.origin, m.dest, Weight::Density);
        const SolveResult r = solve(p);
        if (r.status != SolveStatus::Optimal) return {false, "pair " + std::to_string(k) + " not solved"};
        if (std::abs(r.solution->objective - sp.weight) > 1e-12 * std::max(1.0, sp.weight))
            return {false, "pair " + std::to_string(k) + ": objective differs from shortest path weight"};
        if (r.solution->routes.at(0) != sp.edges) return {false, "pair " + std::to_string(k) + ": route differs"};
    }
    return {true, "100 origin/destination pairs reproduce the density-shortest path"};
}

// -- 4: cost ordering -------------------------------------------------------

double total_cost(const SimulationResult& r) {
    double t = 0.0;
    for (const VehicleStats& v : r.vehicles) t += v.budget.accrued_cost;
    return t;
}

Outcome cost_ordering() {
    int strict_po = 0, strict_oa = 0;
    std::ostringstream worst;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const GridScenario s = random_grid_scenario(seed);
        const double pf = total_cost(run(s.net, s.scenario.vehicles, s.scenario.config, Algorithm::Pfara));
        const double ov = total_cost(run(s.net, s.scenario.vehicles, s.scenario.config, Algorithm::Overlap));
        const double al = total_cost(run(s.net, s.scenario.vehicles, s.scenario.config, Algorithm::Alone));
        if (pf > ov + 1e-9 || ov > al + 1e-9) {
            std::ostringstream msg;
            msg << "seed " << seed << ": pfara " << pf << ", overlap " << ov << ", alone " << al;
            return {false, msg.str()};
        }
        strict_po += pf < ov - 1e-9;
        strict_oa += ov < al - 1e-9;
    }
    if (strict_po == 0 || strict_oa == 0) return {false, "ordering never strict"};
    return {true, "20 scenarios; pfara < overlap in " + std::to_string(strict_po) + ", overlap < alone in " +
                      std::to_string(strict_oa)};
}

// -- helpers over event logs ------------------------------------------------

std::map<VehicleId, std::vector<EventRecord>> by_vehicle(const SimulationResult& r) {
    std::map<VehicleId, std::vector<EventRecord>> out;
    for (const EventRecord& e : r.events) out[e.vehicle].push_back(e);
    return out;
}

// Platoons (size >= 2) a vehicle was part of, as departure-cohort member sets.
std::set<std::vector<VehicleId>> platoons_of(const SimulationResult& r, VehicleId id) {
    std::set<std::vector<VehicleId>> out;
    for (const CohortTraversal& t : r.traversals)
        if (t.members.size() >= 2 && std::binary_search(t.members.begin(), t.members.end(), id)) out.insert(t.members);
    return out;
}

std::string budget_violation(const Scenario& sc, const SimulationResult& r) {
    for (std::size_t i = 0; i < r.vehicles.size(); ++i) {
        const VehicleStats& s = r.vehicles[i];
        const Vehicle& v = sc.vehicles[i];
        if (!s.completed) return "vehicle " + std::to_string(s.id) + " did not finish";
        if (s.budget.travelled_length_m > v.max_length_m + 1e-9 * v.max_length_m ||
            s.budget.travelled_time_s > v.max_time_s + 1e-9 * v.max_time_s ||
            s.budget.accrued_cost > v.max_cost + 1e-9 * std::max(1.0, v.max_cost))
            return "vehicle " + std::to_string(s.id) + " exceeded an allowance";
    }
    return {};
}

std::set<std::vector<VehicleId>> all_platoons(const SimulationResult& r) {
    std::set<std::vector<VehicleId>> out;
    for (const CohortTraversal& t : r.traversals)
        if (t.members.size() >= 2) out.insert(t.members);
    return out;
}

// -- 5: preference effects --------------------------------------------------

Outcome preference_effects() {
    std::map<Preference, SimulationResult> runs;
    for (Preference p : {Preference::None, Preference::SlowVehicle, Preference::TightLength, Preference::TightTime}) {
        const GridScenario s = preference_scenario(p);
        runs[p] = run(s.net, s.scenario.vehicles, s.scenario.config);
        if (const std::string err = budget_violation(s.scenario, runs[p]); !err.empty()) return {false, err};
    }
    const auto& base = runs[Preference::None];
    for (VehicleId v : {0, 2, 3})
        if (platoons_of(base, v).empty()) return {false, "vehicle " + std::to_string(v) + " never platoons in the base run"};
    if (!platoons_of(runs[Preference::SlowVehicle], 2).empty()) return {false, "slowed vehicle 2 still platoons"};
    if (platoons_of(runs[Preference::TightLength], 0) == platoons_of(base, 0))
        return {false, "length-limited vehicle 0 kept its platoons"};
    if (platoons_of(runs[Preference::TightTime], 3) == platoons_of(base, 3))
        return {false, "time-limited vehicle 3 kept its platoons"};
    for (Preference p : {Preference::SlowVehicle, Preference::TightLength, Preference::TightTime}) {
        if (all_platoons(runs[p]) == all_platoons(base)) return {false, "a variant left platoon compositions unchanged"};
        if (all_platoons(runs[p]).empty()) return {false, "a variant formed no platoon at all"};
    }
    return {true, "slowed vehicle leaves its platoon; tight length and tight time change platoon membership; all allowances respected"};
}

// -- 6: corner scenario -----------------------------------------------------

std::map<EdgeId, int> usage_from_svg(const std::string& svg) {
    std::map<EdgeId, int> out;
    const std::regex attr("data-edge=\"(\\d+)\" data-usage=\"(\\d+)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), attr); it != std::sregex_iterator(); ++it)
        out[std::stoi((*it)[1])] = std::stoi((*it)[2]);
    return out;
}

Outcome corner_reproduction() {
    const GridScenario s = corner_scenario();
    const SimulationResult r = run(s.net, s.scenario.vehicles, s.scenario.config);
    const auto& tr = r.traversals;

    // 5 -> 4: a five-vehicle platoon arrives and four of it leave together.
    bool split = false;
    for (const CohortTraversal& a : tr) {
        if (a.members.size() != 5) continue;
        for (const CohortTraversal& b : tr)
            if (b.depart_tick == a.arrive_tick && s.net.edge(b.edge).from == s.net.edge(a.edge).to && b.members.size() == 4 &&
                std::includes(a.members.begin(), a.members.end(), b.members.begin(), b.members.end()))
                split = true;
    }
    // 5 + 4 -> 7: platoons of five and four reach one vertex on one tick, two finish there, seven leave together.
    bool merge = false;
    for (const CohortTraversal& m : tr) {
        if (m.members.size() != 7) continue;
        const VertexId at = s.net.edge(m.edge).from;
        std::vector<const CohortTraversal*> in;
        for (const CohortTraversal& a : tr)
            if (a.arrive_tick == m.depart_tick && s.net.edge(a.edge).to == at) in.push_back(&a);
        if (in.size() != 2) continue;
        const std::set<std::size_t> sizes{in[0]->members.size(), in[1]->members.size()};
        int finished = 0;
        for (const auto* a : in)
            for (VehicleId v : a->members)
                if (!std::binary_search(m.members.begin(), m.members.end(), v)) ++finished;
        if (sizes == std::set<std::size_t>{4, 5} && finished == 2) merge = true;
    }
    // Split records, then Formed records for the seven.
    int split_events = 0, formed7 = 0;
    for (const EventRecord& e : r.events) {
        if (e.kind == EventKind::Split) ++split_events;
        if (e.kind == EventKind::Formed && std::count(e.detail.begin(), e.detail.end(), ',') == 6) ++formed7;
    }
    if (!split) return {false, "no platoon of five continued as four"};
    if (!merge) return {false, "no platoons of five and four merged into seven"};
    if (formed7 != 7 || split_events == 0) return {false, "event log lacks the Split/Formed records"};

    const auto usage = usage_from_svg(heatmap_svg(s.net, edge_usage(r), s.layout));
    std::set<int> counts;
    for (const CorridorEdge& c : corner_corridor()) {
        const EdgeId e = *s.net.find_edge(c.from, c.to);
        const int got = usage.count(e) ? usage.at(e) : 0;
        if (got != c.expected_usage)
            return {false, "edge " + std::to_string(c.from) + "->" + std::to_string(c.to) + " used by " + std::to_string(got) +
                               ", expected " + std::to_string(c.expected_usage)};
        counts.insert(got);
    }
    if (counts != std::set<int>{4, 5, 7}) return {false, "corridor counts are not {4,5,7}"};
    return {true, "5 -> 4 split, 5 + 4 -> 7 merge, corridor usage {5,4,7} in the heat map"};
}

// -- 7: performance ---------------------------------------------------------

Outcome performance(const RoadNetwork& net, const std::string& label) {
    std::ostringstream detail;
    detail << label << ":";
    std::vector<double> means;
    for (int n : {5, 10, 15, 20, 25}) {
        double total = 0.0, worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const GroupingProblem p = city_problem(net, n, seed * 1000 + static_cast<std::uint64_t>(n));
            const auto t0 = Clock::now();
            const SolveResult r = solve(p);
            const double secs = seconds_since(t0);
            if (r.status == SolveStatus::Timeout) return {false, std::to_string(n) + " vehicles hit the node limit"};
            total += secs;
            worst = std::max(worst, secs);
        }
        if (n == 10 && worst >= 10.0) return {false, "10 vehicles took " + std::to_string(worst) + " s"};
        if (n == 25 && worst >= 120.0) return {false, "25 vehicles took " + std::to_string(worst) + " s"};
        means.push_back(total / 3.0);
        detail << " " << n << "v " << std::fixed << std::setprecision(3) << total / 3.0 << "s";
    }
    // Growth in vehicle count, compared end to end so timer noise on tiny runs does not decide.
    if (means.back() < means.front()) return {false, "solve time does not grow with the vehicle count;" + detail.str()};
    return {true, detail.str()};
}

// -- 8 + 9: determinism and event grammar over every CI scenario ------------

std::vector<std::pair<std::string, GridScenario>> ci_scenarios() {
    std::vector<std::pair<std::string, GridScenario>> out;
    out.emplace_back("corner", corner_scenario());
    out.emplace_back("slow", preference_scenario(Preference::SlowVehicle));
    out.emplace_back("tight-length", preference_scenario(Preference::TightLength));
    out.emplace_back("tight-time", preference_scenario(Preference::TightTime));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) out.emplace_back("random-" + std::to_string(seed), random_grid_scenario(seed));
    return out;
}

Outcome determinism() {
    int runs = 0;
    for (const auto& [name, s] : ci_scenarios()) {
        for (Algorithm a : {Algorithm::Pfara, Algorithm::Overlap, Algorithm::Alone}) {
            const SimulationResult r1 = run(s.net, s.scenario.vehicles, s.scenario.config, a);
            const SimulationResult r2 = run(s.net, s.scenario.vehicles, s.scenario.config, a);
            if (events_to_jsonl(r1.events) != events_to_jsonl(r2.events))
                return {false, name + "/" + std::string(to_string(a)) + ": event logs differ"};
            if (heatmap_svg(s.net, edge_usage(r1), s.layout) != heatmap_svg(s.net, edge_usage(r2), s.layout))
                return {false, name + "/" + std::string(to_string(a)) + ": heat maps differ"};
            ++runs;
        }
    }
    return {true, std::to_string(runs) + " scenario/algorithm pairs byte-identical across two runs"};
}

char letter(EventKind k) {
    switch (k) {
        case EventKind::Creation: return 'C';
        case EventKind::Departure: return 'D';
        case EventKind::Arrival: return 'A';
        case EventKind::Completed: return 'X';
        case EventKind::Formed: return 'F';
        case EventKind::Split: return 'S';
    }
    return '?';
}

Outcome event_grammar() {
    // Movement alone, then with Formed/Split allowed only while standing at a vertex.
    const std::regex movement("C(DA)+X");
    const std::regex full("CF?DA(S?F?DA)*S?X");
    int vehicles = 0;
    for (const auto& [name, s] : ci_scenarios()) {
        for (Algorithm a : {Algorithm::Pfara, Algorithm::Overlap, Algorithm::Alone}) {
            const SimulationResult r = run(s.net, s.scenario.vehicles, s.scenario.config, a);
            for (const auto& [id, events] : by_vehicle(r)) {
                std::string seq, moves;
                for (const EventRecord& e : events) {
                    seq += letter(e.kind);
                    if (e.kind != EventKind::Formed && e.kind != EventKind::Split) moves += letter(e.kind);
                }
                if (!std::regex_match(moves, movement) || !std::regex_match(seq, full))
                    return {false, name + "/" + std::string(to_string(a)) + " vehicle " + std::to_string(id) + ": " + seq};
                ++vehicles;
            }
        }
    }
    return {true, std::to_string(vehicles) + " vehicle logs match Creation (Departure Arrival)+ Completed"};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](const std::string& name, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::cout << (o.ok ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        failures += !o.ok;
    };

    OracleRun oracle;
    try {
        oracle = oracle_equivalence();
    } catch (const std::exception& e) {
        oracle.equivalence = oracle.conservation = {false, std::string("threw: ") + e.what()};
    }
    report("oracle equivalence", [&] { return oracle.equivalence; });

    std::string label = "synthetic 361-vertex stand-in (Tiergarten data not bundled)";
    RoadNetwork city;
    if (const char* path = std::getenv("PFARA_TIERGARTEN_NET")) {
        city = load_network(path);
        label = std::string("Tiergarten network from ") + path;
    } else {
        city = city_standin(7).net;
    }
    report("single-vehicle reduction", [&] { return single_vehicle(city); });
    report("price conservation", [&] { return oracle.conservation; });
    report("cost ordering", cost_ordering);
    report("preference effects", preference_effects);
    report("corner platoon split and merge", corner_reproduction);
    report("performance", [&] { return performance(city, label); });
    report("determinism", determinism);
    report("event grammar", event_grammar);
    return failures == 0 ? 0 : 1;
}

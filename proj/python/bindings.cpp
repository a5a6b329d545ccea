#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pfara/baseline.hpp"
#include "pfara/error.hpp"
#include "pfara/reporting.hpp"
#include "pfara/scenarios.hpp"
#include "pfara/simulator.hpp"

namespace py = pybind11;
using namespace pfara;

namespace {

// Problems hold a raw network pointer; keep the network alive alongside it.
struct PyProblem {
    std::shared_ptr<RoadNetwork> net;
    GroupingProblem problem;
};

PyProblem make_problem(const RoadNetwork& net, VertexId origin, double speed, std::vector<GroupMember> members,
                       double tick, SharingModel sharing) {
    PyProblem p{std::make_shared<RoadNetwork>(net), {}};
    p.problem.net = p.net.get();
    p.problem.origin = origin;
    p.problem.speed_mps = speed;
    p.problem.members = std::move(members);
    p.problem.tick_seconds = tick;
    p.problem.sharing = sharing;
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Joint platoon routing, baselines and discrete-time simulation";

    // Messages start with the error kind, e.g. "NoPath: ...".
    py::register_exception<Error>(m, "PfaraError", PyExc_RuntimeError);

    py::class_<Edge>(m, "Edge")
        .def(py::init<>())
        .def(py::init([](EdgeId id, VertexId from, VertexId to, double length, double density) {
                 return Edge{id, from, to, length, density};
             }),
             py::arg("id"), py::arg("source"), py::arg("target"), py::arg("length_m"), py::arg("density") = 0.0)
        .def_readwrite("id", &Edge::id)
        .def_readwrite("source", &Edge::from)
        .def_readwrite("target", &Edge::to)
        .def_readwrite("length_m", &Edge::length_m)
        .def_readwrite("density", &Edge::density);

    py::class_<RoadNetwork>(m, "RoadNetwork")
        .def(py::init<std::int32_t, std::vector<Edge>>(), py::arg("vertex_count"), py::arg("edges"))
        .def_property_readonly("vertex_count", &RoadNetwork::vertex_count)
        .def_property_readonly("edge_count", &RoadNetwork::edge_count)
        .def("edge", &RoadNetwork::edge)
        .def("edges", [](const RoadNetwork& n) { return std::vector<Edge>(n.edges().begin(), n.edges().end()); })
        .def("find_edge", &RoadNetwork::find_edge)
        .def("densities", &RoadNetwork::densities)
        .def("with_densities",
             [](const RoadNetwork& n, const std::vector<double>& d) { return n.with_densities(d); });

    py::enum_<Weight>(m, "Weight").value("LENGTH", Weight::Length).value("DENSITY", Weight::Density);

    py::class_<Path>(m, "Path").def_readonly("edges", &Path::edges).def_readonly("weight", &Path::weight);

    m.def("make_grid", &make_grid, py::arg("rows"), py::arg("cols"), py::arg("edge_length_m"));
    m.def("load_network", [](const std::filesystem::path& p) { return load_network(p); });
    m.def("save_network_csv", &save_network_csv);
    m.def("shortest_path", &shortest_path, py::arg("net"), py::arg("source"), py::arg("target"),
          py::arg("weight") = Weight::Density);
    m.def("path_vertices", [](const RoadNetwork& net, VertexId from, const std::vector<EdgeId>& edges) {
        return path_vertices(net, from, edges);
    });

    py::class_<Vehicle>(m, "Vehicle")
        .def(py::init<>())
        .def_readwrite("id", &Vehicle::id)
        .def_readwrite("provider", &Vehicle::provider)
        .def_readwrite("origin", &Vehicle::origin)
        .def_readwrite("dest", &Vehicle::dest)
        .def_readwrite("min_platoon_speed_mps", &Vehicle::min_platoon_speed_mps)
        .def_readwrite("max_speed_mps", &Vehicle::max_speed_mps)
        .def_readwrite("max_length_m", &Vehicle::max_length_m)
        .def_readwrite("max_time_s", &Vehicle::max_time_s)
        .def_readwrite("max_cost", &Vehicle::max_cost);
    m.def("alone_cost", &alone_cost);

    py::class_<SpeedGroup>(m, "SpeedGroup")
        .def_readonly("members", &SpeedGroup::members)
        .def_readonly("speed_mps", &SpeedGroup::speed_mps)
        .def_readonly("threshold_mps", &SpeedGroup::threshold_mps);
    m.def("cluster_by_speed", [](const std::vector<Vehicle>& vs) { return cluster_by_speed(vs); });

    py::enum_<SharingModel>(m, "SharingModel")
        .value("ROUTE_COUNT", SharingModel::RouteCount)
        .value("SYNCHRONIZED", SharingModel::Synchronized);

    py::class_<GroupMember>(m, "GroupMember")
        .def(py::init([](VehicleId id, VertexId dest, double length, double time, double cost) {
                 return GroupMember{id, dest, length, time, cost};
             }),
             py::arg("id"), py::arg("dest"), py::arg("max_length_m") = 1e18, py::arg("max_time_s") = 1e18,
             py::arg("max_cost") = 1e18)
        .def_readwrite("id", &GroupMember::id)
        .def_readwrite("dest", &GroupMember::dest)
        .def_readwrite("max_length_m", &GroupMember::max_length_m)
        .def_readwrite("max_time_s", &GroupMember::max_time_s)
        .def_readwrite("max_cost", &GroupMember::max_cost);

    py::class_<PyProblem>(m, "GroupingProblem")
        .def(py::init(&make_problem), py::arg("net"), py::arg("origin"), py::arg("speed_mps"), py::arg("members"),
             py::arg("tick_seconds") = 0.0, py::arg("sharing") = SharingModel::RouteCount)
        .def_property_readonly("origin", [](const PyProblem& p) { return p.problem.origin; })
        .def_property_readonly("members", [](const PyProblem& p) { return p.problem.members; });

    py::class_<GroupingSolution>(m, "GroupingSolution")
        .def_readonly("routes", &GroupingSolution::routes)
        .def_readonly("union_edges", &GroupingSolution::union_edges)
        .def_readonly("objective", &GroupingSolution::objective)
        .def_readonly("total_length_m", &GroupingSolution::total_length_m)
        .def_readonly("np", &GroupingSolution::np)
        .def_readonly("cost", &GroupingSolution::cost)
        .def_readonly("length_m", &GroupingSolution::length_m)
        .def_readonly("time_s", &GroupingSolution::time_s)
        .def_property_readonly("prices", [](const GroupingSolution& s) {
            py::dict out;
            for (const auto& [key, price] : s.prices) out[py::make_tuple(key.first, key.second)] = price;
            return out;
        });

    py::enum_<SolveStatus>(m, "SolveStatus")
        .value("OPTIMAL", SolveStatus::Optimal)
        .value("INFEASIBLE", SolveStatus::Infeasible)
        .value("TIMEOUT", SolveStatus::Timeout);

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("status", &SolveResult::status)
        .def_readonly("solution", &SolveResult::solution)
        .def_readonly("infeasible", &SolveResult::infeasible)
        .def_readonly("incumbent", &SolveResult::incumbent)
        .def_property_readonly("nodes", [](const SolveResult& r) { return r.stats.nodes; });

    m.def("solve", [](const PyProblem& p, std::int64_t node_limit) {
        SolveOptions o;
        o.node_limit = node_limit;
        py::gil_scoped_release release;
        return solve(p.problem, o);
    }, py::arg("problem"), py::arg("node_limit") = 1'000'000);
    m.def("brute_force_oracle", [](const PyProblem& p, int max_path_len) {
        return brute_force_oracle(p.problem, max_path_len);
    }, py::arg("problem"), py::arg("max_path_len"));
    m.def("overlap_group", [](const RoadNetwork& net, const std::vector<VehicleId>& members, double speed,
                              VertexId origin, const std::map<VehicleId, VertexId>& dests) {
        return overlap_group(net, SpeedGroup{members, speed, 0.0}, origin, dests);
    });

    py::enum_<Algorithm>(m, "Algorithm")
        .value("PFARA", Algorithm::Pfara)
        .value("OVERLAP", Algorithm::Overlap)
        .value("ALONE", Algorithm::Alone);

    py::class_<SimulationConfig>(m, "SimulationConfig")
        .def(py::init<>())
        .def_readwrite("tick_seconds", &SimulationConfig::tick_seconds)
        .def_readwrite("max_ticks", &SimulationConfig::max_ticks)
        .def_readwrite("node_limit", &SimulationConfig::node_limit)
        .def_property("reoptimize",
                      [](const SimulationConfig& c) { return c.reoptimize == Reoptimize::Meetings ? "meetings" : "every-node"; },
                      [](SimulationConfig& c, const std::string& s) {
                          if (s == "meetings") c.reoptimize = Reoptimize::Meetings;
                          else if (s == "every-node") c.reoptimize = Reoptimize::EveryNode;
                          else throw py::value_error("reoptimize must be 'meetings' or 'every-node'");
                      });

    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("config", &Scenario::config)
        .def_readwrite("vehicles", &Scenario::vehicles)
        .def("to_json", [](const Scenario& s) { return scenario_to_json(s); });
    m.def("load_scenario", &load_scenario);
    m.def("parse_scenario", &parse_scenario);

    py::class_<EventRecord>(m, "EventRecord")
        .def_readonly("tick", &EventRecord::tick)
        .def_readonly("vertex", &EventRecord::vertex)
        .def_readonly("vehicle", &EventRecord::vehicle)
        .def_property_readonly("kind", [](const EventRecord& e) { return std::string(to_string(e.kind)); })
        .def_readonly("detail", &EventRecord::detail);

    py::class_<BudgetState>(m, "BudgetState")
        .def_readonly("remaining_length_m", &BudgetState::remaining_length_m)
        .def_readonly("remaining_time_s", &BudgetState::remaining_time_s)
        .def_readonly("remaining_cost", &BudgetState::remaining_cost)
        .def_readonly("accrued_cost", &BudgetState::accrued_cost)
        .def_readonly("travelled_length_m", &BudgetState::travelled_length_m)
        .def_readonly("travelled_time_s", &BudgetState::travelled_time_s);

    py::class_<VehicleStats>(m, "VehicleStats")
        .def_readonly("id", &VehicleStats::id)
        .def_readonly("provider", &VehicleStats::provider)
        .def_readonly("completed", &VehicleStats::completed)
        .def_readonly("completed_tick", &VehicleStats::completed_tick)
        .def_readonly("budget", &VehicleStats::budget)
        .def_readonly("trace", &VehicleStats::trace);

    py::class_<CohortTraversal>(m, "CohortTraversal")
        .def_readonly("edge", &CohortTraversal::edge)
        .def_readonly("depart_tick", &CohortTraversal::depart_tick)
        .def_readonly("arrive_tick", &CohortTraversal::arrive_tick)
        .def_readonly("members", &CohortTraversal::members)
        .def_readonly("price_each", &CohortTraversal::price_each);

    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("algorithm", &SimulationResult::algorithm)
        .def_readonly("events", &SimulationResult::events)
        .def_readonly("vehicles", &SimulationResult::vehicles)
        .def_readonly("traversals", &SimulationResult::traversals)
        .def_readonly("final_tick", &SimulationResult::final_tick)
        .def_readonly("solves", &SimulationResult::solves)
        .def_readonly("timeout_fallbacks", &SimulationResult::timeout_fallbacks)
        .def("events_jsonl", [](const SimulationResult& r) { return events_to_jsonl(r.events); });

    m.def("run", [](const RoadNetwork& net, const std::vector<Vehicle>& vs, const SimulationConfig& c, Algorithm a) {
        py::gil_scoped_release release;
        return run(net, vs, c, a);
    }, py::arg("net"), py::arg("vehicles"), py::arg("config") = SimulationConfig{}, py::arg("algorithm") = Algorithm::Pfara);

    m.def("edge_usage", &edge_usage);
    m.def("inferno", [](double t) {
        const Rgb c = inferno(t);
        return py::make_tuple(c.r, c.g, c.b);
    });
    m.def("grid_layout", [](int rows, int cols, double spacing) {
        std::map<VertexId, std::pair<double, double>> out;
        for (const auto& [v, p] : grid_layout(rows, cols, spacing)) out[v] = {p.x, p.y};
        return out;
    });
    m.def("heatmap_svg", [](const RoadNetwork& net, const EdgeUsage& usage,
                            const std::map<VertexId, std::pair<double, double>>& layout) {
        Layout l;
        for (const auto& [v, p] : layout) l[v] = {p.first, p.second};
        return heatmap_svg(net, usage, l);
    });
    m.def("summary_csv", &summary_csv);
    m.def("comparison_table", &comparison_table);

    py::class_<GridScenario>(m, "GridScenario")
        .def_readonly("net", &GridScenario::net)
        .def_readonly("scenario", &GridScenario::scenario)
        .def_property_readonly("layout", [](const GridScenario& s) {
            std::map<VertexId, std::pair<double, double>> out;
            for (const auto& [v, p] : s.layout) out[v] = {p.x, p.y};
            return out;
        });
    m.def("corner_scenario", &corner_scenario);
    m.def("random_grid_scenario", &random_grid_scenario, py::arg("seed"));
}

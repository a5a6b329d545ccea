#include "pfara/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pfara/error.hpp"

namespace pfara {

using nlohmann::json;

void validate(const Vehicle& v) {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::InvariantViolation, "vehicle " + std::to_string(v.id) + ": " + what);
    };
    if (!(v.min_platoon_speed_mps > 0.0)) fail("min speed must be positive");
    if (!(v.max_speed_mps > 0.0)) fail("max speed must be positive");
    if (v.min_platoon_speed_mps > v.max_speed_mps) fail("min speed exceeds max speed");
    if (!(v.max_length_m > 0.0)) fail("max_length must be positive");
    if (!(v.max_time_s > 0.0)) fail("max_time must be positive");
    if (!(v.max_cost > 0.0)) fail("max_cost must be positive");
    if (v.origin == v.dest) fail("origin equals destination");
}

BudgetState initial_budget(const Vehicle& v) {
    BudgetState b;
    b.remaining_length_m = v.max_length_m;
    b.remaining_time_s = v.max_time_s;
    b.remaining_cost = v.max_cost;
    b.position = v.origin;
    return b;
}

BudgetState debit(const BudgetState& budget, double edge_length_m, double elapsed_s, double price, bool enforce) {
    if (edge_length_m < 0.0 || elapsed_s < 0.0 || price < 0.0)
        throw Error(ErrorKind::InvariantViolation, "debit deltas must be nonnegative");
    BudgetState next = budget;
    next.remaining_length_m -= edge_length_m;
    next.remaining_time_s -= elapsed_s;
    next.remaining_cost -= price;
    next.accrued_cost += price;
    next.travelled_length_m += edge_length_m;
    next.travelled_time_s += elapsed_s;
    if (enforce) {
        // Float noise from differently ordered sums is tolerated, nothing more.
        auto over = [](double remaining, double scale) { return remaining < -1e-9 * std::max(1.0, scale); };
        if (over(next.remaining_length_m, budget.remaining_length_m + edge_length_m) ||
            over(next.remaining_time_s, budget.remaining_time_s + elapsed_s) ||
            over(next.remaining_cost, budget.remaining_cost + price)) {
            std::ostringstream msg;
            msg << "remaining (length, time, cost) = (" << next.remaining_length_m << ", " << next.remaining_time_s
                << ", " << next.remaining_cost << ")";
            throw Error(ErrorKind::BudgetExceeded, msg.str());
        }
    }
    return next;
}

bool SimulationConfig::compatible(ProviderId a, ProviderId b) const {
    if (a == b) return true;
    return !incompatible.contains({std::min(a, b), std::max(a, b)});
}

double alone_cost(const RoadNetwork& net, VertexId origin, VertexId dest) {
    return shortest_path(net, origin, dest, Weight::Density).weight;
}

namespace {

template <class T>
T required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw Error(ErrorKind::SchemaError, where + " is missing \"" + key + "\"");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::SchemaError, where + " has a mistyped \"" + key + "\"");
    }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const RoadNetwork& net) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaError, e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::SchemaError, "scenario must be a JSON object");

    Scenario sc;
    if (doc.contains("tick_seconds")) {
        sc.config.tick_seconds = required<double>(doc, "tick_seconds", "scenario");
        if (!(sc.config.tick_seconds > 0.0)) throw Error(ErrorKind::SchemaError, "tick_seconds must be positive");
    }
    if (doc.contains("reoptimize")) {
        const auto mode = required<std::string>(doc, "reoptimize", "scenario");
        if (mode == "meetings") sc.config.reoptimize = Reoptimize::Meetings;
        else if (mode == "every-node") sc.config.reoptimize = Reoptimize::EveryNode;
        else throw Error(ErrorKind::SchemaError, "reoptimize must be \"meetings\" or \"every-node\"");
    }
    if (doc.contains("max_ticks")) sc.config.max_ticks = required<std::int64_t>(doc, "max_ticks", "scenario");
    if (doc.contains("node_limit")) sc.config.node_limit = required<std::int64_t>(doc, "node_limit", "scenario");
    if (doc.contains("incompatible")) {
        const json& pairs = doc.at("incompatible");
        if (!pairs.is_array()) throw Error(ErrorKind::SchemaError, "incompatible must be an array of pairs");
        for (const json& p : pairs) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
                throw Error(ErrorKind::SchemaError, "incompatible entries must be [provider, provider]");
            const auto a = p[0].get<ProviderId>();
            const auto b = p[1].get<ProviderId>();
            sc.config.incompatible.emplace(std::min(a, b), std::max(a, b));
        }
    }

    const json vehicles = doc.value("vehicles", json::array());
    if (!vehicles.is_array()) throw Error(ErrorKind::SchemaError, "vehicles must be an array");
    for (const json& item : vehicles) {
        if (!item.is_object()) throw Error(ErrorKind::SchemaError, "vehicle entries must be objects");
        const std::string where = "vehicle " + (item.contains("id") ? item["id"].dump() : std::string("?"));
        Vehicle v;
        v.id = required<VehicleId>(item, "id", where);
        v.provider = required<ProviderId>(item, "provider", where);
        v.origin = required<VertexId>(item, "origin", where);
        v.dest = required<VertexId>(item, "dest", where);
        v.min_platoon_speed_mps = required<double>(item, "min_speed", where);
        v.max_speed_mps = required<double>(item, "max_speed", where);
        v.max_length_m = required<double>(item, "max_length", where);
        v.max_time_s = required<double>(item, "max_time", where);
        if (!net.has_vertex(v.origin) || !net.has_vertex(v.dest))
            throw Error(ErrorKind::InvariantViolation, where + " references a vertex outside the network");
        if (item.contains("max_cost") && !item["max_cost"].is_null()) {
            v.max_cost = required<double>(item, "max_cost", where);
        } else if (v.origin != v.dest) {
            try {
                v.max_cost = alone_cost(net, v.origin, v.dest);
            } catch (const Error& e) {
                throw Error(ErrorKind::InvariantViolation, where + ": " + e.what());
            }
            // A zero-density route costs nothing; any positive cap is then non-binding.
            if (v.max_cost <= 0.0) v.max_cost = 1e-12;
        }
        validate(v);
        sc.vehicles.push_back(v);
    }
    std::sort(sc.vehicles.begin(), sc.vehicles.end(), [](const Vehicle& a, const Vehicle& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < sc.vehicles.size(); ++i)
        if (sc.vehicles[i].id == sc.vehicles[i - 1].id)
            throw Error(ErrorKind::SchemaError, "duplicate vehicle id " + std::to_string(sc.vehicles[i].id));
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path, const RoadNetwork& net) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), net);
}

std::string scenario_to_json(const Scenario& scenario) {
    json doc;
    doc["tick_seconds"] = scenario.config.tick_seconds;
    doc["reoptimize"] = scenario.config.reoptimize == Reoptimize::Meetings ? "meetings" : "every-node";
    doc["max_ticks"] = scenario.config.max_ticks;
    doc["node_limit"] = scenario.config.node_limit;
    json pairs = json::array();
    for (const auto& [a, b] : scenario.config.incompatible) pairs.push_back({a, b});
    doc["incompatible"] = pairs;
    json vehicles = json::array();
    for (const Vehicle& v : scenario.vehicles) {
        vehicles.push_back({{"id", v.id},
                            {"provider", v.provider},
                            {"origin", v.origin},
                            {"dest", v.dest},
                            {"min_speed", v.min_platoon_speed_mps},
                            {"max_speed", v.max_speed_mps},
                            {"max_length", v.max_length_m},
                            {"max_time", v.max_time_s},
                            {"max_cost", v.max_cost}});
    }
    doc["vehicles"] = vehicles;
    return doc.dump(2) + "\n";
}

}  // namespace pfara

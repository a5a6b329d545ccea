#include "pfara/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <string>

#include "pfara/error.hpp"
#include "pfara/rng.hpp"
#include "text_util.hpp"

namespace pfara {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void build_adjacency(std::int32_t n, const std::vector<Edge>& edges, bool outgoing,
                     std::vector<std::int32_t>& offsets, std::vector<EdgeId>& ids) {
    offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const Edge& e : edges) ++offsets[static_cast<std::size_t>(outgoing ? e.from : e.to) + 1];
    for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
    ids.assign(edges.size(), 0);
    std::vector<std::int32_t> fill(offsets.begin(), offsets.end() - 1);
    for (const Edge& e : edges) ids[static_cast<std::size_t>(fill[static_cast<std::size_t>(outgoing ? e.from : e.to)]++)] = e.id;
    for (std::int32_t v = 0; v < n; ++v) {
        auto first = ids.begin() + offsets[static_cast<std::size_t>(v)];
        auto last = ids.begin() + offsets[static_cast<std::size_t>(v) + 1];
        std::sort(first, last, [&](EdgeId a, EdgeId b) {
            const Edge& ea = edges[static_cast<std::size_t>(a)];
            const Edge& eb = edges[static_cast<std::size_t>(b)];
            return outgoing ? ea.to < eb.to : ea.from < eb.from;
        });
    }
}

}  // namespace

RoadNetwork::RoadNetwork(std::int32_t vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
    if (vertex_count_ < 0) throw Error(ErrorKind::InvariantViolation, "negative vertex count");
    std::set<std::pair<VertexId, VertexId>> seen;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        Edge& e = edges_[i];
        e.id = static_cast<EdgeId>(i);
        if (!has_vertex(e.from) || !has_vertex(e.to))
            throw Error(ErrorKind::DanglingNode, "edge " + std::to_string(i) + " references a missing vertex");
        if (!(e.length_m > 0.0) || !std::isfinite(e.length_m))
            throw Error(ErrorKind::InvariantViolation, "edge " + std::to_string(i) + " has non-positive length");
        if (!(e.density >= 0.0) || !std::isfinite(e.density))
            throw Error(ErrorKind::InvariantViolation, "edge " + std::to_string(i) + " has negative density");
        if (!seen.emplace(e.from, e.to).second)
            throw Error(ErrorKind::DuplicateEdge,
                        "duplicate edge " + std::to_string(e.from) + "->" + std::to_string(e.to));
    }
    build_adjacency(vertex_count_, edges_, true, out_offsets_, out_);
    build_adjacency(vertex_count_, edges_, false, in_offsets_, in_);
}

std::span<const EdgeId> RoadNetwork::out_edges(VertexId v) const {
    const auto b = static_cast<std::size_t>(out_offsets_.at(static_cast<std::size_t>(v)));
    const auto e = static_cast<std::size_t>(out_offsets_.at(static_cast<std::size_t>(v) + 1));
    return std::span<const EdgeId>(out_).subspan(b, e - b);
}

std::span<const EdgeId> RoadNetwork::in_edges(VertexId v) const {
    const auto b = static_cast<std::size_t>(in_offsets_.at(static_cast<std::size_t>(v)));
    const auto e = static_cast<std::size_t>(in_offsets_.at(static_cast<std::size_t>(v) + 1));
    return std::span<const EdgeId>(in_).subspan(b, e - b);
}

std::optional<EdgeId> RoadNetwork::find_edge(VertexId from, VertexId to) const {
    if (!has_vertex(from)) return std::nullopt;
    for (EdgeId id : out_edges(from))
        if (edges_[static_cast<std::size_t>(id)].to == to) return id;
    return std::nullopt;
}

RoadNetwork RoadNetwork::with_densities(std::span<const double> densities) const {
    if (densities.size() != edges_.size())
        throw Error(ErrorKind::InvariantViolation, "density vector size mismatch");
    std::vector<Edge> edges = edges_;
    for (std::size_t i = 0; i < edges.size(); ++i) edges[i].density = densities[i];
    return RoadNetwork(vertex_count_, std::move(edges));
}

std::vector<double> RoadNetwork::densities() const {
    std::vector<double> out;
    out.reserve(edges_.size());
    for (const Edge& e : edges_) out.push_back(e.density);
    return out;
}

// -- TNTP ---------------------------------------------------------------------

RoadNetwork load_tntp(const std::filesystem::path& path, const TntpOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

    std::vector<Edge> edges;
    std::int32_t declared_nodes = 0;
    std::int32_t max_node = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = detail::trim(line);
        if (body.empty()) continue;
        if (body.front() == '~') continue;
        if (body.front() == '<') {
            constexpr std::string_view kNodes = "<NUMBER OF NODES>";
            if (body.starts_with(kNodes)) {
                auto value = detail::parse_number(detail::trim(body.substr(kNodes.size())));
                if (value) declared_nodes = static_cast<std::int32_t>(*value);
            }
            continue;
        }
        if (auto semi = body.find(';'); semi != std::string_view::npos) body = body.substr(0, semi);
        std::vector<std::string_view> fields = detail::split_ws(body);
        if (fields.empty()) continue;

        std::vector<double> numbers;
        for (std::string_view f : fields) {
            auto v = detail::parse_number(f);
            if (!v) break;
            numbers.push_back(*v);
        }
        if (numbers.size() < 3)
            throw Error(ErrorKind::MalformedRow, path.string() + ":" + std::to_string(line_no) +
                                                     " needs at least 3 numeric fields");
        const std::size_t column = options.length_column
                                       ? static_cast<std::size_t>(*options.length_column)
                                       : (numbers.size() == 3 ? 2u : 3u);
        if (column >= numbers.size())
            throw Error(ErrorKind::MalformedRow, path.string() + ":" + std::to_string(line_no) +
                                                     " has no length column " + std::to_string(column));
        const double from = numbers[0];
        const double to = numbers[1];
        if (from < 1 || to < 1 || from != std::floor(from) || to != std::floor(to))
            throw Error(ErrorKind::MalformedRow, path.string() + ":" + std::to_string(line_no) +
                                                     " has invalid node ids");
        Edge e;
        e.from = static_cast<VertexId>(from) - 1;
        e.to = static_cast<VertexId>(to) - 1;
        e.length_m = numbers[column];
        if (!(e.length_m > 0.0))
            throw Error(ErrorKind::MalformedRow, path.string() + ":" + std::to_string(line_no) +
                                                     " has non-positive length");
        max_node = std::max({max_node, e.from + 1, e.to + 1});
        edges.push_back(e);
    }
    if (edges.empty()) throw Error(ErrorKind::EmptyNetwork, path.string() + " has no links");
    return RoadNetwork(std::max(declared_nodes, max_node), std::move(edges));
}

// -- grid -------------------------------------------------------------------

RoadNetwork make_grid(int rows, int cols, double edge_length_m) {
    if (rows < 2 || cols < 2) throw Error(ErrorKind::Usage, "grid needs at least 2 rows and 2 columns");
    if (!(edge_length_m > 0.0)) throw Error(ErrorKind::Usage, "grid edge length must be positive");
    std::vector<Edge> edges;
    auto id = [cols](int r, int c) { return static_cast<VertexId>(r * cols + c); };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) {
                edges.push_back({0, id(r, c), id(r, c + 1), edge_length_m, 0.0});
                edges.push_back({0, id(r, c + 1), id(r, c), edge_length_m, 0.0});
            }
            if (r + 1 < rows) {
                edges.push_back({0, id(r, c), id(r + 1, c), edge_length_m, 0.0});
                edges.push_back({0, id(r + 1, c), id(r, c), edge_length_m, 0.0});
            }
        }
    }
    return RoadNetwork(rows * cols, std::move(edges));
}

// -- shortest paths -------------------------------------------------------------

std::vector<double> edge_weights(const RoadNetwork& net, Weight weight) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(net.edge_count()));
    for (const Edge& e : net.edges()) w.push_back(weight == Weight::Length ? e.length_m : e.density);
    return w;
}

std::vector<double> distances_to(const RoadNetwork& net, VertexId to, std::span<const double> edge_cost) {
    std::vector<double> dist(static_cast<std::size_t>(net.vertex_count()), kInf);
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<std::size_t>(to)] = 0.0;
    heap.emplace(0.0, to);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(v)]) continue;
        for (EdgeId id : net.in_edges(v)) {
            const Edge& e = net.edge(id);
            const double nd = d + edge_cost[static_cast<std::size_t>(id)];
            if (nd < dist[static_cast<std::size_t>(e.from)]) {
                dist[static_cast<std::size_t>(e.from)] = nd;
                heap.emplace(nd, e.from);
            }
        }
    }
    return dist;
}

std::vector<double> distances_from(const RoadNetwork& net, VertexId from, std::span<const double> edge_cost) {
    std::vector<double> dist(static_cast<std::size_t>(net.vertex_count()), kInf);
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<std::size_t>(from)] = 0.0;
    heap.emplace(0.0, from);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(v)]) continue;
        for (EdgeId id : net.out_edges(v)) {
            const Edge& e = net.edge(id);
            const double nd = d + edge_cost[static_cast<std::size_t>(id)];
            if (nd < dist[static_cast<std::size_t>(e.to)]) {
                dist[static_cast<std::size_t>(e.to)] = nd;
                heap.emplace(nd, e.to);
            }
        }
    }
    return dist;
}

std::vector<VertexId> path_vertices(const RoadNetwork& net, VertexId from, std::span<const EdgeId> edges) {
    std::vector<VertexId> seq{from};
    for (EdgeId id : edges) seq.push_back(net.edge(id).to);
    return seq;
}

Path shortest_path(const RoadNetwork& net, VertexId from, VertexId to, Weight weight) {
    if (!net.has_vertex(from) || !net.has_vertex(to))
        throw Error(ErrorKind::InvariantViolation, "shortest_path endpoint not in network");
    Path result;
    if (from == to) return result;

    const std::vector<double> cost = edge_weights(net, weight);
    const std::vector<double> dist = distances_to(net, to, cost);
    const double total = dist[static_cast<std::size_t>(from)];
    if (!std::isfinite(total))
        throw Error(ErrorKind::NoPath, "no path " + std::to_string(from) + " -> " + std::to_string(to));
    const double eps = 1e-9 * std::max(1.0, total);

    auto tight = [&](const Edge& e) {
        return std::abs(cost[static_cast<std::size_t>(e.id)] + dist[static_cast<std::size_t>(e.to)] -
                        dist[static_cast<std::size_t>(e.from)]) <= eps;
    };

    // Greedy walk over the tight subgraph; the reachability check only matters
    // on zero-weight plateaus where the tight subgraph can contain cycles.
    std::vector<char> visited(static_cast<std::size_t>(net.vertex_count()), 0);
    auto reaches_target = [&](VertexId start) {
        std::vector<char> seen = visited;
        std::vector<VertexId> stack{start};
        seen[static_cast<std::size_t>(start)] = 1;
        while (!stack.empty()) {
            VertexId v = stack.back();
            stack.pop_back();
            if (v == to) return true;
            for (EdgeId id : net.out_edges(v)) {
                const Edge& e = net.edge(id);
                if (!seen[static_cast<std::size_t>(e.to)] && tight(e)) {
                    seen[static_cast<std::size_t>(e.to)] = 1;
                    stack.push_back(e.to);
                }
            }
        }
        return false;
    };

    VertexId u = from;
    visited[static_cast<std::size_t>(u)] = 1;
    while (u != to) {
        bool advanced = false;
        for (EdgeId id : net.out_edges(u)) {
            const Edge& e = net.edge(id);
            if (visited[static_cast<std::size_t>(e.to)] || !tight(e)) continue;
            const bool plateau = dist[static_cast<std::size_t>(e.to)] >= dist[static_cast<std::size_t>(u)] - eps;
            if (plateau && !reaches_target(e.to)) continue;
            result.edges.push_back(id);
            result.weight += cost[static_cast<std::size_t>(id)];
            visited[static_cast<std::size_t>(e.to)] = 1;
            u = e.to;
            advanced = true;
            break;
        }
        if (!advanced) throw Error(ErrorKind::NoPath, "tight path reconstruction failed");
    }
    return result;
}

// -- zones ----------------------------------------------------------------------

ZonePartition::ZonePartition(std::vector<ZoneId> zone_of) : zone_of_(std::move(zone_of)) {
    ZoneId max_zone = -1;
    for (ZoneId z : zone_of_) {
        if (z < 0) throw Error(ErrorKind::InvariantViolation, "negative zone id");
        max_zone = std::max(max_zone, z);
    }
    zone_count_ = max_zone + 1;
    members_.assign(static_cast<std::size_t>(zone_count_), {});
    for (std::size_t v = 0; v < zone_of_.size(); ++v)
        members_[static_cast<std::size_t>(zone_of_[v])].push_back(static_cast<VertexId>(v));
    for (ZoneId z = 0; z < zone_count_; ++z)
        if (members_[static_cast<std::size_t>(z)].empty())
            throw Error(ErrorKind::InvariantViolation, "zone " + std::to_string(z) + " has no vertices");
}

DensityReport synthesize_density(const RoadNetwork& net, const ZonePartition& zones,
                                 const TripDemand& demand, std::uint64_t seed) {
    if (zones.vertex_count() != net.vertex_count())
        throw Error(ErrorKind::InvariantViolation, "zone partition does not cover the network");

    DensityReport report;
    report.usage.assign(static_cast<std::size_t>(net.edge_count()), 0);
    SplitMix64 rng(seed);

    for (const ZoneTrip& trip : demand.trips) {
        if (trip.count < 0) throw Error(ErrorKind::InvariantViolation, "negative trip count");
        if (trip.origin_zone < 0 || trip.origin_zone >= zones.zone_count() || trip.dest_zone < 0 ||
            trip.dest_zone >= zones.zone_count())
            throw Error(ErrorKind::InvariantViolation, "trip references an unknown zone");
        const auto origins = zones.members(trip.origin_zone);
        const auto dests = zones.members(trip.dest_zone);
        for (std::int64_t k = 0; k < trip.count; ++k) {
            const VertexId o = origins[rng.below(origins.size())];
            const VertexId d = dests[rng.below(dests.size())];
            try {
                const Path p = shortest_path(net, o, d, Weight::Length);
                for (EdgeId id : p.edges) ++report.usage[static_cast<std::size_t>(id)];
                report.path_edges_total += static_cast<std::int64_t>(p.edges.size());
                ++report.trips_routed;
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::NoPath) throw;
                ++report.trips_skipped;
            }
        }
    }

    std::vector<double> density(report.usage.size());
    for (std::size_t i = 0; i < density.size(); ++i)
        density[i] = static_cast<double>(report.usage[i]) / net.edge(static_cast<EdgeId>(i)).length_m;
    report.network = net.with_densities(density);
    return report;
}

// -- file formats -------------------------------------------------------------

ZonePartition load_zones(const std::filesystem::path& path, std::int32_t vertex_count) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::vector<ZoneId> zone_of(static_cast<std::size_t>(vertex_count), -1);
    std::string line;
    while (std::getline(in, line)) {
        auto fields = detail::split_csv(detail::trim(line));
        if (fields.size() < 2 || fields[0].empty() || fields[0].front() == '#') continue;
        auto v = detail::parse_number(fields[0]);
        auto z = detail::parse_number(fields[1]);
        if (!v || !z) continue;  // header row
        if (*v < 0 || *v >= vertex_count)
            throw Error(ErrorKind::SchemaError, "zone file references vertex " + std::string(fields[0]));
        zone_of[static_cast<std::size_t>(*v)] = static_cast<ZoneId>(*z);
    }
    for (std::size_t v = 0; v < zone_of.size(); ++v)
        if (zone_of[v] < 0)
            throw Error(ErrorKind::SchemaError, "vertex " + std::to_string(v) + " has no zone");
    return ZonePartition(std::move(zone_of));
}

TripDemand load_demand(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    TripDemand demand;
    std::string line;
    while (std::getline(in, line)) {
        auto fields = detail::split_csv(detail::trim(line));
        if (fields.empty() || fields[0].empty() || fields[0].front() == '#') continue;
        if (fields[0] == "timespan") {
            if (fields.size() < 2 || !detail::parse_number(fields[1]) || *detail::parse_number(fields[1]) <= 0)
                throw Error(ErrorKind::SchemaError, "timespan must be a positive number");
            demand.timespan_s = *detail::parse_number(fields[1]);
            continue;
        }
        if (fields.size() < 3) throw Error(ErrorKind::SchemaError, "demand row needs 3 fields: " + line);
        auto o = detail::parse_number(fields[0]);
        auto d = detail::parse_number(fields[1]);
        auto c = detail::parse_number(fields[2]);
        if (!o || !d || !c) continue;  // column header
        if (*c < 0 || *c != std::floor(*c))
            throw Error(ErrorKind::SchemaError, "trip count must be a nonnegative integer");
        demand.trips.push_back({static_cast<ZoneId>(*o), static_cast<ZoneId>(*d), static_cast<std::int64_t>(*c)});
    }
    return demand;
}

void save_network_csv(const RoadNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << "# pfara network\n";
    out << "vertices," << net.vertex_count() << "\n";
    out << "from,to,length_m,density\n";
    for (const Edge& e : net.edges())
        out << e.from << ',' << e.to << ',' << detail::format_double(e.length_m) << ','
            << detail::format_double(e.density) << '\n';
}

RoadNetwork load_network_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::int32_t vertex_count = -1;
    std::vector<Edge> edges;
    std::string line;
    while (std::getline(in, line)) {
        auto fields = detail::split_csv(detail::trim(line));
        if (fields.empty() || fields[0].empty() || fields[0].front() == '#') continue;
        if (fields[0] == "vertices" && fields.size() >= 2) {
            vertex_count = static_cast<std::int32_t>(detail::parse_number(fields[1]).value_or(-1));
            continue;
        }
        if (fields[0] == "from") continue;
        if (fields.size() < 4) throw Error(ErrorKind::MalformedRow, "network row needs 4 fields: " + line);
        auto f = detail::parse_number(fields[0]);
        auto t = detail::parse_number(fields[1]);
        auto l = detail::parse_number(fields[2]);
        auto d = detail::parse_number(fields[3]);
        if (!f || !t || !l || !d) throw Error(ErrorKind::MalformedRow, "non-numeric network row: " + line);
        edges.push_back({0, static_cast<VertexId>(*f), static_cast<VertexId>(*t), *l, *d});
    }
    if (vertex_count < 0) throw Error(ErrorKind::SchemaError, path.string() + " lacks a vertices row");
    if (edges.empty()) throw Error(ErrorKind::EmptyNetwork, path.string() + " has no edges");
    return RoadNetwork(vertex_count, std::move(edges));
}

RoadNetwork load_network(const std::filesystem::path& path, const TntpOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::string first;
    std::getline(in, first);
    if (first.starts_with("# pfara network")) return load_network_csv(path);
    return load_tntp(path, options);
}

}  // namespace pfara

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace pfara {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;
using ZoneId = std::int32_t;

struct Edge {
    EdgeId id = 0;
    VertexId from = 0;
    VertexId to = 0;
    double length_m = 0.0;
    double density = 0.0;  // vehicles per meter
};

/// Directed road graph with per-edge length and traffic density.
///
/// Vertices are dense ids `0..vertex_count()-1`; edge ids are positions in
/// `edges()`. The graph is immutable once built, so it can be shared freely.
class RoadNetwork {
public:
    RoadNetwork() = default;

    /// Throws InvariantViolation on dangling endpoints, non-positive lengths,
    /// negative densities or duplicate (from, to) pairs.
    RoadNetwork(std::int32_t vertex_count, std::vector<Edge> edges);

    std::int32_t vertex_count() const noexcept { return vertex_count_; }
    std::int32_t edge_count() const noexcept { return static_cast<std::int32_t>(edges_.size()); }
    std::span<const Edge> edges() const noexcept { return edges_; }
    const Edge& edge(EdgeId id) const { return edges_.at(static_cast<std::size_t>(id)); }

    /// Outgoing edge ids of `v`, sorted by head vertex id.
    std::span<const EdgeId> out_edges(VertexId v) const;
    /// Incoming edge ids of `v`, sorted by tail vertex id.
    std::span<const EdgeId> in_edges(VertexId v) const;

    std::optional<EdgeId> find_edge(VertexId from, VertexId to) const;
    bool has_vertex(VertexId v) const noexcept { return v >= 0 && v < vertex_count_; }

    /// Copy with densities replaced; `densities.size()` must equal edge_count().
    RoadNetwork with_densities(std::span<const double> densities) const;

    std::vector<double> densities() const;

private:
    std::int32_t vertex_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::int32_t> out_offsets_;
    std::vector<EdgeId> out_;
    std::vector<std::int32_t> in_offsets_;
    std::vector<EdgeId> in_;
};

struct TntpOptions {
    /// 0-based field index of the link length. When unset, rows with exactly
    /// three fields use field 2 and wider rows use field 3 (standard TNTP).
    std::optional<int> length_column;
};

RoadNetwork load_tntp(const std::filesystem::path& path, const TntpOptions& options = {});

/// Manhattan grid, vertex id = row * cols + col, two directed edges per
/// adjacent pair, zero densities.
RoadNetwork make_grid(int rows, int cols, double edge_length_m);

enum class Weight { Length, Density };

struct Path {
    std::vector<EdgeId> edges;
    double weight = 0.0;
};

/// Vertex sequence of a path starting at `from`.
std::vector<VertexId> path_vertices(const RoadNetwork& net, VertexId from, std::span<const EdgeId> edges);

/// Minimal-weight simple path; ties go to the lexicographically smallest
/// vertex sequence. Throws NoPath.
Path shortest_path(const RoadNetwork& net, VertexId from, VertexId to, Weight weight);

/// Single-target distances to `to` over reversed edges (infinity if unreachable).
std::vector<double> distances_to(const RoadNetwork& net, VertexId to, std::span<const double> edge_cost);
/// Single-source distances from `from`.
std::vector<double> distances_from(const RoadNetwork& net, VertexId from, std::span<const double> edge_cost);

std::vector<double> edge_weights(const RoadNetwork& net, Weight weight);

// -- zones and demand --------------------------------------------------------

class ZonePartition {
public:
    ZonePartition() = default;
    /// `zone_of[v]` is the zone of vertex v; every zone in [0, max+1) must be used.
    explicit ZonePartition(std::vector<ZoneId> zone_of);

    ZoneId zone_of(VertexId v) const { return zone_of_.at(static_cast<std::size_t>(v)); }
    std::int32_t zone_count() const noexcept { return zone_count_; }
    std::int32_t vertex_count() const noexcept { return static_cast<std::int32_t>(zone_of_.size()); }
    std::span<const VertexId> members(ZoneId z) const { return members_.at(static_cast<std::size_t>(z)); }

private:
    std::vector<ZoneId> zone_of_;
    std::int32_t zone_count_ = 0;
    std::vector<std::vector<VertexId>> members_;
};

struct ZoneTrip {
    ZoneId origin_zone = 0;
    ZoneId dest_zone = 0;
    std::int64_t count = 0;
};

struct TripDemand {
    std::vector<ZoneTrip> trips;
    // Stored for completeness; density only divides trip counts by length.
    double timespan_s = 3600.0;
};

struct DensityReport {
    RoadNetwork network;
    std::vector<std::int64_t> usage;  // trips per edge
    std::int64_t trips_routed = 0;
    std::int64_t trips_skipped = 0;   // unreachable draws
    std::int64_t path_edges_total = 0;
};

/// Routes every trip between uniformly drawn zone vertices along the
/// length-shortest path and sets density = usage / length.
DensityReport synthesize_density(const RoadNetwork& net, const ZonePartition& zones,
                                 const TripDemand& demand, std::uint64_t seed);

ZonePartition load_zones(const std::filesystem::path& path, std::int32_t vertex_count);
TripDemand load_demand(const std::filesystem::path& path);

void save_network_csv(const RoadNetwork& net, const std::filesystem::path& path);
RoadNetwork load_network_csv(const std::filesystem::path& path);

/// Loads either the CSV format written by `save_network_csv` or a TNTP link file.
RoadNetwork load_network(const std::filesystem::path& path, const TntpOptions& options = {});

}  // namespace pfara

#pragma once

#include <map>

#include "pfara/clustering.hpp"
#include "pfara/optimizer.hpp"

namespace pfara {

/// Overlap benchmark: every vehicle takes its own density-shortest path and
/// platoons are read off wherever those paths coincide. Length, time and
/// cost allowances are ignored. Throws NoPath.
GroupingSolution overlap_group(const RoadNetwork& net, const SpeedGroup& group, VertexId origin,
                               const std::map<VehicleId, VertexId>& dests, double tick_seconds = 0.0,
                               SharingModel sharing = SharingModel::RouteCount);

}  // namespace pfara

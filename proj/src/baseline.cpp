#include "pfara/baseline.hpp"

#include <limits>

#include "pfara/error.hpp"

namespace pfara {

GroupingSolution overlap_group(const RoadNetwork& net, const SpeedGroup& group, VertexId origin,
                               const std::map<VehicleId, VertexId>& dests, double tick_seconds,
                               SharingModel sharing) {
    constexpr double kUnbounded = std::numeric_limits<double>::max();
    GroupingProblem problem;
    problem.net = &net;
    problem.origin = origin;
    problem.speed_mps = group.speed_mps;
    problem.tick_seconds = tick_seconds;
    problem.sharing = sharing;
    std::vector<std::vector<EdgeId>> routes;
    for (VehicleId id : group.members) {
        auto it = dests.find(id);
        if (it == dests.end())
            throw Error(ErrorKind::InvariantViolation, "no destination for vehicle " + std::to_string(id));
        problem.members.push_back({id, it->second, kUnbounded, kUnbounded, kUnbounded});
        routes.push_back(shortest_path(net, origin, it->second, Weight::Density).edges);
    }
    return evaluate(problem, routes);
}

}  // namespace pfara

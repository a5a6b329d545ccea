#include "pfara/clustering.hpp"

#include <algorithm>
#include <limits>

namespace pfara {

std::vector<SpeedGroup> cluster_by_speed(std::span<const Vehicle> vehicles) {
    std::vector<SpeedGroup> groups;
    std::vector<char> grouped(vehicles.size(), 0);
    std::size_t remaining = vehicles.size();
    while (remaining > 0) {
        double threshold = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vehicles.size(); ++i)
            if (!grouped[i]) threshold = std::max(threshold, vehicles[i].min_platoon_speed_mps);

        SpeedGroup group;
        group.threshold_mps = threshold;
        group.speed_mps = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vehicles.size(); ++i) {
            if (grouped[i] || vehicles[i].max_speed_mps < threshold) continue;
            grouped[i] = 1;
            --remaining;
            group.members.push_back(vehicles[i].id);
            group.speed_mps = std::min(group.speed_mps, vehicles[i].max_speed_mps);
        }
        std::sort(group.members.begin(), group.members.end());
        groups.push_back(std::move(group));
    }
    return groups;
}

bool speed_feasible(std::span<const Vehicle> members, double speed) {
    return std::all_of(members.begin(), members.end(), [speed](const Vehicle& v) {
        return v.min_platoon_speed_mps <= speed && speed <= v.max_speed_mps;
    });
}

}  // namespace pfara

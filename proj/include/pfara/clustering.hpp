#pragma once

#include <span>
#include <vector>

#include "pfara/fleet.hpp"

namespace pfara {

/// Speed-compatible vehicles and the common speed they travel at.
struct SpeedGroup {
    std::vector<VehicleId> members;  // ascending
    double speed_mps = 0.0;
    /// Highest minimum platoon speed among the vehicles ungrouped when this
    /// group was formed (the round's threshold).
    double threshold_mps = 0.0;
};

/// Greedy max-min speed partition. Each round takes the largest minimum
/// platoon speed m among ungrouped vehicles, groups every ungrouped vehicle
/// whose max speed is at least m, and sets the group speed to the smallest
/// member max speed. Groups are returned in round order.
std::vector<SpeedGroup> cluster_by_speed(std::span<const Vehicle> vehicles);

/// True when `speed` lies within every member's [min platoon speed, max speed].
bool speed_feasible(std::span<const Vehicle> members, double speed);

}  // namespace pfara

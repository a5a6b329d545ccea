#pragma once

// Shared by the branch-and-bound solver and the brute-force oracle: per-edge
// timing for one group speed and the cohort key used by synchronized sharing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pfara/optimizer.hpp"

namespace pfara::detail {

struct GroupTiming {
    std::vector<double> time_s;         // traversal seconds per edge
    std::vector<std::int64_t> key_step; // entry-time increment per edge (ticks, or microseconds)
};

GroupTiming group_timing(const GroupingProblem& problem);

struct CohortKey {
    EdgeId edge;
    std::int64_t entry;
    bool operator==(const CohortKey&) const = default;
};

struct CohortHash {
    std::size_t operator()(const CohortKey& k) const noexcept {
        return std::hash<std::int64_t>()(k.entry * 1'000'003 + k.edge);
    }
};

inline double tol(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

/// Members sorted by id; throws InvariantViolation on malformed problems.
GroupingProblem normalized(const GroupingProblem& problem);

}  // namespace pfara::detail

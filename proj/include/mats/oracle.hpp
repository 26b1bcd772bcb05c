#pragma once

// Brute-force exact optimum for small instances, written independently of
// the branch-and-bound: every coalition product, every global assignment
// order, every opposed resolution.  Intended for cross-checking only.

#include <optional>
#include <vector>

#include "mats/planner.hpp"

namespace mats {

struct OracleOptions {
    std::size_t max_subtasks = 5;
    std::size_t max_agents = 3;
};

struct OracleResult {
    double makespan = 0;
    std::vector<double> start;
    std::vector<int> coalition_choice;
};

// nullopt when no feasible schedule exists.  Throws CapExceeded above the
// instance-size caps.
std::optional<OracleResult> exact_schedule(const GroundedPoset& gp,
                                           const OracleOptions& opts = {});

std::optional<double> exact_optimum(const GroundedPoset& gp,
                                    const OracleOptions& opts = {});

}  // namespace mats

#pragma once

// NBA pruning against a concrete team: (i) transitions whose minterms the
// team cannot generate, (ii) states on no initial-to-accepting path,
// (iii) decomposable transitions (a two-step detour exists whose combined
// letters always re-enable the direct guard), then (ii) again.

#include "mats/model.hpp"
#include "mats/nba.hpp"

namespace mats {

struct PruneReport {
    std::size_t states_before = 0;
    std::size_t edges_before = 0;
    std::size_t infeasible_edges_removed = 0;
    std::size_t invalid_states_removed = 0;
    std::size_t decomposable_edges_removed = 0;
    std::size_t states_after = 0;
    std::size_t edges_after = 0;

    double edge_reduction() const {
        return edges_before == 0
                   ? 0.0
                   : 1.0 - static_cast<double>(edges_after) / edges_before;
    }
};

// Restricts every guard to its team-feasible minterms.  Edges whose guards
// become unsatisfiable are dropped.
Nba prune_infeasible(const Nba& nba, const Scenario& s, PruneReport* report = nullptr);

// Keeps only states reachable from an initial state and co-reachable to an
// accepting state; states are renumbered compactly.
Nba prune_invalid_states(const Nba& nba, PruneReport* report = nullptr);

// Single simultaneous pass of Def.-4 removal over the current edge set.
Nba prune_decomposable(const Nba& nba, PruneReport* report = nullptr);

// Full pipeline (i)(ii)(iii)(ii).  Throws Unsatisfiable when the input has
// no accepting path at all, InfeasibleForTeam when feasibility pruning
// leaves none.
Nba prune(const Nba& nba, const Scenario& s, PruneReport& report);

}  // namespace mats

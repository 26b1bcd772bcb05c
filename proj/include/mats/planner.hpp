#pragma once

// Assignment search: anytime best-first branch-and-bound over partial
// coalition assignments of poset subtasks, with longest-path scheduling.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "mats/model.hpp"
#include "mats/poset.hpp"
#include "mats/pruning.hpp"

namespace mats {

// A poset grounded against a scenario: requirement and candidate coalitions
// per subtask.
struct GroundedPoset {
    const Scenario* scenario = nullptr;
    Poset poset;
    std::vector<ServiceRequirement> reqs;
    std::vector<std::vector<Coalition>> coalitions;
    std::vector<std::pair<int, int>> pre;  // covering edges of leq
};

// Throws InfeasibleForTeam when a subtask has no coalition.
GroundedPoset ground_poset(const Poset& p, const Scenario& s,
                           const std::set<int>& excluded = {});

// Model filter for mining: keeps letters that ground to one schedulable
// service request (single region, nonempty).
ModelFilter serviceable_model_filter(const Nba& nba, const Scenario& s);

// Historical commitments used when re-planning after a failure: agent
// release states and subtasks whose (actual or expected) windows are fixed.
struct FrozenTask {
    int subtask = 0;
    double start = 0;
    double finish = 0;
    std::vector<int> members;
};

struct PlanBase {
    std::vector<int> agent_region;     // release location per agent
    std::vector<double> agent_ready;   // release time per agent
    std::set<int> excluded;            // failed agents
    std::vector<FrozenTask> frozen;
    double horizon = 0;                // new subtasks start no earlier

    static PlanBase fresh(const Scenario& s);
    std::uint64_t frozen_mask() const;
};

struct SearchNode {
    std::uint64_t assigned = 0;               // includes frozen subtasks
    std::vector<int> coalition_choice;        // per subtask, -1 unassigned
    std::vector<std::vector<int>> agent_seq;  // appended assignment order
    std::vector<int> order;                   // non-frozen assignment order
};

SearchNode root_node(const GroundedPoset& gp, const PlanBase& base);

// Children: every (ready subtask, coalition) extension, where a subtask is
// ready when all its poset predecessors are assigned.
std::vector<SearchNode> expand(const SearchNode& node, const GroundedPoset& gp);

struct Schedule {
    std::vector<double> start;     // per subtask; frozen keep actual starts
    std::vector<double> duration;  // per subtask
    std::vector<int> coalition_choice;
    std::vector<std::vector<int>> agent_seq;
    double makespan = 0;
};

// Earliest-start longest-path schedule of the node's assigned subtasks,
// minimized over opposed-set resolutions.  nullopt when every resolution is
// cyclic or needs unreachable travel.  For complete nodes this is the exact
// optimum for the fixed assignment.
std::optional<Schedule> schedule(const SearchNode& node, const GroundedPoset& gp,
                                 const PlanBase& base);

// Greedy completion maximizing team concurrency, finished with schedule().
std::optional<Schedule> upper_bound(const SearchNode& node, const GroundedPoset& gp,
                                    const PlanBase& base);

enum class LbMode { Min, Max };  // how T1 and T2 are combined

double lower_bound(const SearchNode& node, const GroundedPoset& gp,
                   const PlanBase& base, LbMode mode = LbMode::Min);

// Supplementary-material variant: exact committed part plus a
// capability-relaxed load bound over the unfinished subtasks.
double alt_lower_bound(const SearchNode& node, const GroundedPoset& gp,
                       const PlanBase& base);

struct BnbOptions {
    double budget_seconds = 60.0;
    LbMode lb_mode = LbMode::Min;
    // Known incumbent from elsewhere: only improvements are reported.
    double initial_incumbent = std::numeric_limits<double>::infinity();
    // progress(elapsed_seconds, incumbent_makespan)
    std::function<void(double, double)> progress;
};

struct BnbStats {
    std::size_t visited = 0;    // nodes popped and expanded
    std::size_t generated = 0;  // children created
    // Nodes cut off by the bound: rejected at generation, stale at pop, or
    // provably hopeless leftovers when the queue was exhausted or drained.
    std::size_t pruned = 0;
    bool exhausted = false;     // search space fully explored in budget
};

struct BnbResult {
    std::optional<Schedule> best;
    double makespan = 0;
    BnbStats stats;
    std::vector<std::pair<double, double>> history;  // (elapsed s, makespan)
};

BnbResult bnb(const GroundedPoset& gp, const PlanBase& base, const BnbOptions& opts);

struct PlanOptions {
    double budget_poset_seconds = 30.0;
    double budget_bnb_seconds = 60.0;
    LbMode lb_mode = LbMode::Min;
    int opposed_arity = 3;
    int jobs = 1;
    std::function<void(double, double)> progress;
};

struct PlanResult {
    PruneReport prune_report;
    std::vector<Poset> posets;
    int best_poset = -1;
    std::optional<Schedule> best;
    double makespan = 0;
    std::vector<std::pair<double, double>> history;
    BnbStats stats;  // accumulated over posets
};

// Full pipeline on an already pruned automaton: mine posets, ground each,
// search each, keep the best incumbent.  Throws BudgetExhausted when no
// feasible schedule was found in budget, InfeasibleForTeam when every poset
// fails grounding.
PlanResult plan(const Nba& pruned, const Scenario& s, const PlanOptions& opts);

}  // namespace mats

#pragma once

// Subtask decomposition of accepting runs and anytime poset mining: the
// temporal structure of a task is captured as ("started before", "not all
// concurrently") relations over subtasks, mined by adjacent-swap relaxation
// of the run's word.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mats/guard.hpp"
#include "mats/nba.hpp"

namespace mats {

struct Subtask {
    std::vector<std::string> positive;      // atoms defining the service
    std::vector<std::string> negative;      // must stay false while executing
    std::vector<std::string> selfloop_pos;  // must hold while pending
    std::vector<std::string> selfloop_neg;  // must stay false while pending
    Letter pos_mask = 0;
    Letter neg_mask = 0;
    Letter selfloop_pos_mask = 0;
    Letter selfloop_neg_mask = 0;
    bool has_selfloop = true;  // source state could wait at all
};

struct Poset {
    int id = 0;
    std::vector<Subtask> subtasks;
    std::vector<std::pair<int, int>> leq;   // (earlier, later), sorted
    std::vector<std::vector<int>> opposed;  // sorted member sets, arity >= 2
    std::vector<int> source_run;            // state ids in the source NBA
    std::size_t language_size = 0;
};

struct PosetGraph {
    std::vector<std::pair<int, int>> edges;  // transitive reduction of leq
    std::vector<std::vector<int>> opposed;   // hyper-edges, copied
    std::vector<int> roots;                  // nodes with no predecessor
};

PosetGraph poset_graph(const Poset& p);

// Def.-8 membership for a timed word given start times and durations.
bool word_satisfies(const Poset& p, const std::vector<double>& start,
                    const std::vector<double>& duration);

// All decomposition variants of one accepting run (capped at 64): per edge,
// one subtask per minimal satisfying model of the edge guard, paired with
// the minimal self-loop constraint of the edge's source state.
using ModelFilter = std::function<bool(const Guard::MinimalModel&)>;

std::vector<std::vector<Subtask>> decompose_run(const Nba& nba,
                                                const std::vector<int>& run,
                                                std::size_t cap = 64,
                                                const ModelFilter& filter = {});

enum class CheckResult { Accepting, NotAccepting, Indeterminate };

// Enumerates the poset language (all leq-respecting orders, up to max_words)
// and tests every word with accepts_stutter.
CheckResult check_accepting(const Nba& nba, const Poset& p,
                            std::size_t max_words = 100000);

struct ComputePosetsOptions {
    double budget_seconds = 60.0;
    int opposed_arity = 3;          // largest opposed set considered
    std::size_t max_words = 100000; // per-poset language cap
    std::size_t max_posets = 64;
    std::size_t variant_cap = 64;   // decompositions per run
    // Restricts edge minimal models to schedulable subtasks (e.g. a single
    // region); edges with no passing model are not walked at all.
    ModelFilter model_filter;
    // Called after each emitted poset; return false to stop early.
    std::function<bool(const Poset&)> on_poset;
};

// Alg.-1 anytime mining.  Deterministic: runs are explored by a DFS whose
// neighbor order prefers states closer to acceptance; languages of emitted
// posets are pairwise disjoint.
std::vector<Poset> compute_posets(const Nba& nba, const ComputePosetsOptions& opts);

}  // namespace mats

#pragma once

// Deterministic discrete-event execution of a schedule: noisy travel and
// action durations, the start/stop message protocol that keeps the poset
// constraints satisfied at runtime, and re-planning on agent failures.

#include <cstdint>
#include <vector>

#include "mats/planner.hpp"

namespace mats {

enum class SimEventKind { ArriveAt, StartMsg, StopMsg, BeginExec, EndExec, Failure };

struct SimEvent {
    double t = 0;
    SimEventKind kind = SimEventKind::ArriveAt;
    int agent = -1;    // ArriveAt / Failure
    int subtask = -1;  // everything else; message source for Start/StopMsg
};

struct AgentFailure {
    int agent = 0;
    double time = 0;
};

struct ReplanRecord {
    double at = 0;        // failure time
    double spent = 0;     // wall-clock seconds in the re-plan
    double makespan = 0;  // new incumbent
};

struct Trace {
    std::vector<SimEvent> events;
    std::vector<double> start, finish;  // final execution per subtask
    std::vector<Letter> word;           // induced word, ties merged
    // Message counters by category.  leq: one start message per precedence
    // pair.  opposed: each member of each opposed set announces start and
    // stop.  sync: intra-coalition ready messages, |members|-1 per execution.
    std::size_t leq_msgs = 0;
    std::size_t opposed_msgs = 0;
    std::size_t sync_msgs = 0;
    std::vector<ReplanRecord> replans;
    double makespan = 0;
};

struct SimOptions {
    std::uint64_t seed = 0;
    double noise = 0.0;  // multiplicative, uniform in [1-noise, 1+noise]
    std::vector<AgentFailure> failures;
    double replan_budget_seconds = 2.0;
    LbMode lb_mode = LbMode::Min;
};

// Throws Deadlock when execution stalls and IrrecoverableFailure when a
// failure leaves the mission unservable.
Trace simulate(const GroundedPoset& gp, const Schedule& plan, const SimOptions& opts);

}  // namespace mats

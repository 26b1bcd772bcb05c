#include "mats/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

namespace mats {

namespace {

enum class TaskStatus { Pending, Running, Done };

struct Ev {
    double t;
    std::size_t seq;
    SimEventKind kind;
    int agent;    // ArriveAt / Failure
    int subtask;  // task events; -1 for pure repositioning legs
    int dest;     // ArriveAt region
    int epoch;    // plan epoch (ArriveAt) or task epoch (BeginExec/EndExec)
    bool operator<(const Ev& o) const {
        return t != o.t ? t > o.t : seq > o.seq;  // min-heap
    }
};

struct Sim {
    const SimOptions& opts;
    GroundedPoset live;  // re-grounded after failures
    const Scenario& sc;
    int n, na;

    std::mt19937_64 rng;
    std::uniform_real_distribution<double> dist;
    double noisy(double v) {
        double f = dist(rng);
        return opts.noise > 0 ? v * f : v;
    }

    std::priority_queue<Ev> queue;
    std::size_t seq = 0;
    Trace trace;

    // Task state.
    std::vector<TaskStatus> status;
    std::vector<bool> ever_started, begin_scheduled;
    std::vector<int> task_epoch;
    std::vector<std::vector<int>> members;
    std::vector<int> arrived;
    std::vector<double> finish_expected;
    std::vector<GroundedAtom> pos_atoms_flat;  // per task, see pos_index
    std::vector<std::pair<int, int>> pos_index;
    std::vector<std::vector<GroundedAtom>> neg_atoms;  // Local/Collab only
    std::vector<int> opp_gate;  // predecessor that must finish first, or -1

    // Agent state.
    std::vector<bool> alive;
    std::vector<int> region;          // -1 while traveling
    std::vector<double> ready;
    std::vector<int> exec_of;         // running subtask or -1
    std::vector<int> travel_dest;     // -1 when not traveling
    std::vector<int> travel_task;
    std::vector<double> travel_eta;
    std::vector<std::vector<int>> itinerary;
    std::vector<std::size_t> it_idx;
    int plan_epoch = 0;

    Sim(const GroundedPoset& gp, const SimOptions& o)
        : opts(o),
          live(gp),
          sc(*gp.scenario),
          n(static_cast<int>(gp.poset.subtasks.size())),
          na(static_cast<int>(gp.scenario->agents.size())),
          rng(o.seed),
          dist(1.0 - o.noise, 1.0 + o.noise) {}

    void push(double t, SimEventKind k, int agent, int subtask, int dest, int epoch) {
        queue.push({t, seq++, k, agent, subtask, dest, epoch});
    }
    void record(const Ev& e) {
        trace.events.push_back({e.t, e.kind, e.agent, e.subtask});
    }

    void install_plan(const Schedule& plan, double now) {
        ++plan_epoch;
        for (int s = 0; s < n; ++s) {
            if (status[s] != TaskStatus::Pending) continue;
            members[s].clear();
            arrived[s] = 0;
            begin_scheduled[s] = false;
            if (plan.coalition_choice[s] >= 0)
                members[s] = live.coalitions[s][plan.coalition_choice[s]].members;
        }
        // Agents parked at a pending task re-gather under the new plan.
        for (int a = 0; a < na; ++a)
            if (exec_of[a] >= 0 && status[exec_of[a]] != TaskStatus::Running)
                exec_of[a] = -1;
        // Opposed gates from the planned windows.
        std::fill(opp_gate.begin(), opp_gate.end(), -1);
        for (const auto& set : live.poset.opposed) {
            bool resolved = false;
            for (int x : set) {
                for (int y : set) {
                    if (x == y) continue;
                    double fx = status[x] == TaskStatus::Done ? trace.finish[x]
                                : status[x] == TaskStatus::Running
                                    ? finish_expected[x]
                                    : plan.start[x] + plan.duration[x];
                    double sy = status[y] == TaskStatus::Done ? trace.start[y]
                                                              : plan.start[y];
                    if (fx < sy) {
                        if (status[y] == TaskStatus::Pending &&
                            status[x] != TaskStatus::Done)
                            opp_gate[y] = x;
                        resolved = true;
                        break;
                    }
                }
                if (resolved) break;
            }
        }
        // Agent itineraries; running agents depart from their EndExec.
        for (int a = 0; a < na; ++a) {
            itinerary[a] = plan.agent_seq[a];
            it_idx[a] = 0;
            if (!alive[a]) continue;
            if (exec_of[a] >= 0) continue;
            if (travel_dest[a] >= 0) {
                // Finish the leg under the new epoch, then continue.
                push(travel_eta[a], SimEventKind::ArriveAt, a, -1, travel_dest[a],
                     plan_epoch);
            } else {
                depart_next(a, std::max(ready[a], now));
            }
        }
    }

    void depart_next(int a, double now) {
        while (it_idx[a] < itinerary[a].size() &&
               status[itinerary[a][it_idx[a]]] == TaskStatus::Done)
            ++it_idx[a];
        if (it_idx[a] >= itinerary[a].size()) return;
        int s = itinerary[a][it_idx[a]];
        double leg = noisy(sc.travel_time(a, region[a], live.reqs[s].region));
        travel_dest[a] = live.reqs[s].region;
        travel_task[a] = s;
        travel_eta[a] = now + leg;
        region[a] = -1;
        push(travel_eta[a], SimEventKind::ArriveAt, a, s, travel_dest[a], plan_epoch);
    }

    bool gates_open(int s) const {
        for (auto [a, b] : live.poset.leq)
            if (b == s && !ever_started[a]) return false;
        if (opp_gate[s] >= 0 && status[opp_gate[s]] != TaskStatus::Done) return false;
        for (int r : live.reqs[s].forbidden_regions)
            for (int a = 0; a < na; ++a)
                if (alive[a] && region[a] == r) return false;
        for (const GroundedAtom& g : neg_atoms[s])
            for (int x = 0; x < n; ++x) {
                if (status[x] != TaskStatus::Running) continue;
                auto [lo, cnt] = pos_index[x];
                for (int i = 0; i < cnt; ++i) {
                    const GroundedAtom& p = pos_atoms_flat[lo + i];
                    if (p.kind != GroundedAtom::Kind::Region &&
                        p.region == g.region && p.action == g.action)
                        return false;
                }
            }
        return true;
    }

    void rescan(double now) {
        for (int s = 0; s < n; ++s) {
            if (status[s] != TaskStatus::Pending || begin_scheduled[s]) continue;
            if (arrived[s] < static_cast<int>(members[s].size())) continue;
            if (!gates_open(s)) continue;
            begin_scheduled[s] = true;
            push(now + kTimeEps, SimEventKind::BeginExec, -1, s, -1, task_epoch[s]);
        }
    }

    void begin(const Ev& e) {
        int s = e.subtask;
        if (e.epoch != task_epoch[s] || status[s] != TaskStatus::Pending) return;
        begin_scheduled[s] = false;
        if (arrived[s] < static_cast<int>(members[s].size()) || !gates_open(s))
            return;  // picked up again by a later rescan
        record(e);
        status[s] = TaskStatus::Running;
        ever_started[s] = true;
        trace.start[s] = e.t;
        double dur = noisy(live.reqs[s].duration);
        finish_expected[s] = e.t + dur;
        push(finish_expected[s], SimEventKind::EndExec, -1, s, -1, task_epoch[s]);
        for (auto [a, b] : live.poset.leq)
            if (a == s) {
                ++trace.leq_msgs;
                push(e.t, SimEventKind::StartMsg, -1, s, -1, 0);
            }
        for (const auto& set : live.poset.opposed)
            if (std::find(set.begin(), set.end(), s) != set.end()) {
                ++trace.opposed_msgs;
                push(e.t, SimEventKind::StartMsg, -1, s, -1, 0);
            }
    }

    void end(const Ev& e) {
        int s = e.subtask;
        if (e.epoch != task_epoch[s] || status[s] != TaskStatus::Running) return;
        record(e);
        status[s] = TaskStatus::Done;
        trace.finish[s] = e.t;
        for (const auto& set : live.poset.opposed)
            if (std::find(set.begin(), set.end(), s) != set.end()) {
                ++trace.opposed_msgs;
                push(e.t, SimEventKind::StopMsg, -1, s, -1, 0);
            }
        for (int a : members[s]) {
            if (!alive[a]) continue;
            exec_of[a] = -1;
            ready[a] = e.t;
            // s is absent from the itinerary when a re-plan replaced it.
            if (it_idx[a] < itinerary[a].size() && itinerary[a][it_idx[a]] == s)
                ++it_idx[a];
            depart_next(a, e.t);
        }
        rescan(e.t);
    }

    void arrive(const Ev& e) {
        int a = e.agent;
        if (e.epoch != plan_epoch || !alive[a]) return;
        record(e);
        region[a] = e.dest;
        travel_dest[a] = -1;
        ready[a] = e.t;
        int s = e.subtask;
        if (s < 0) {  // repositioning leg after a re-plan
            depart_next(a, e.t);
            return;
        }
        travel_task[a] = -1;
        if (status[s] == TaskStatus::Done) {
            if (it_idx[a] < itinerary[a].size() && itinerary[a][it_idx[a]] == s)
                ++it_idx[a];
            depart_next(a, e.t);
            return;
        }
        exec_of[a] = s;
        ++arrived[s];
        if (arrived[s] == static_cast<int>(members[s].size()) && members[s].size() > 1)
            trace.sync_msgs += members[s].size() - 1;
        rescan(e.t);
    }

    void fail(const Ev& e) {
        int a = e.agent;
        if (!alive[a]) return;
        record(e);
        alive[a] = false;
        double tf = e.t;
        int s = exec_of[a];
        if (s >= 0 && status[s] == TaskStatus::Running) {
            // Interrupted: back to unfinished, survivors released in place.
            ++task_epoch[s];
            status[s] = TaskStatus::Pending;  // ever_started stays true: the
            begin_scheduled[s] = false;       // historical start keeps leq
            arrived[s] = 0;
            for (int m : members[s])
                if (alive[m]) {
                    exec_of[m] = -1;
                    ready[m] = tf;
                }
        } else if (s >= 0) {
            exec_of[a] = -1;
        }
        // Waiting members of pending tasks re-gather under the new plan.
        for (int x = 0; x < n; ++x)
            if (status[x] == TaskStatus::Pending) {
                ++task_epoch[x];
                begin_scheduled[x] = false;
                arrived[x] = 0;
            }
        for (int m = 0; m < na; ++m) {
            if (!alive[m]) continue;
            if (exec_of[m] >= 0 && status[exec_of[m]] != TaskStatus::Running)
                exec_of[m] = -1;
            if (exec_of[m] < 0 && travel_dest[m] < 0)
                ready[m] = std::max(ready[m], tf);
        }

        replan(tf);
    }

    void replan(double tf) {
        std::set<int> excluded;
        for (int a = 0; a < na; ++a)
            if (!alive[a]) excluded.insert(a);
        GroundedPoset next;
        try {
            next = ground_poset(live.poset, sc, excluded);
        } catch (const Error& err) {
            throw Error(ErrorCode::IrrecoverableFailure,
                        "failure leaves a subtask unservable: " +
                            std::string(err.what()));
        }
        next.poset.id = live.poset.id;

        PlanBase base;
        base.excluded = excluded;
        base.horizon = tf;
        for (int a = 0; a < na; ++a) {
            if (exec_of[a] >= 0 && status[exec_of[a]] == TaskStatus::Running) {
                base.agent_region.push_back(live.reqs[exec_of[a]].region);
                base.agent_ready.push_back(finish_expected[exec_of[a]]);
            } else if (travel_dest[a] >= 0) {
                base.agent_region.push_back(travel_dest[a]);
                base.agent_ready.push_back(travel_eta[a]);
            } else {
                base.agent_region.push_back(std::max(region[a], 0));
                base.agent_ready.push_back(std::max(ready[a], tf));
            }
        }
        for (int s = 0; s < n; ++s) {
            if (status[s] == TaskStatus::Done)
                base.frozen.push_back({s, trace.start[s], trace.finish[s], members[s]});
            else if (status[s] == TaskStatus::Running)
                base.frozen.push_back(
                    {s, trace.start[s], finish_expected[s], members[s]});
        }

        auto t0 = std::chrono::steady_clock::now();
        BnbOptions bo;
        bo.budget_seconds = opts.replan_budget_seconds;
        bo.lb_mode = opts.lb_mode;
        BnbResult r = bnb(next, base, bo);
        double spent =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        if (!r.best)
            throw Error(ErrorCode::IrrecoverableFailure,
                        "no recovery schedule found after agent failure");
        trace.replans.push_back({tf, spent, r.makespan});
        live = std::move(next);
        install_plan(*r.best, tf);
        rescan(tf);
    }

    Trace run(const Schedule& plan) {
        status.assign(n, TaskStatus::Pending);
        ever_started.assign(n, false);
        begin_scheduled.assign(n, false);
        task_epoch.assign(n, 0);
        members.assign(n, {});
        arrived.assign(n, 0);
        finish_expected.assign(n, 0);
        opp_gate.assign(n, -1);
        trace.start.assign(n, 0);
        trace.finish.assign(n, 0);
        neg_atoms.assign(n, {});
        for (int s = 0; s < n; ++s) {
            const Subtask& st = live.poset.subtasks[s];
            int lo = static_cast<int>(pos_atoms_flat.size());
            for (const std::string& nm : st.positive)
                pos_atoms_flat.push_back(ground_atom(nm, sc));
            pos_index.push_back({lo, static_cast<int>(pos_atoms_flat.size()) - lo});
            auto add_neg = [&](const std::vector<std::string>& names) {
                for (const std::string& nm : names) {
                    GroundedAtom g = ground_atom(nm, sc);
                    if (g.kind != GroundedAtom::Kind::Region)
                        neg_atoms[s].push_back(g);
                }
            };
            add_neg(st.negative);
            add_neg(st.selfloop_neg);
        }
        alive.assign(na, true);
        region.resize(na);
        ready.assign(na, 0);
        exec_of.assign(na, -1);
        travel_dest.assign(na, -1);
        travel_task.assign(na, -1);
        travel_eta.assign(na, 0);
        itinerary.assign(na, {});
        it_idx.assign(na, 0);
        for (int a = 0; a < na; ++a) region[a] = sc.agents[a].initial_region;

        plan_epoch = -1;  // install_plan bumps to 0
        install_plan(plan, 0);
        for (const AgentFailure& f : opts.failures)
            push(f.time, SimEventKind::Failure, f.agent, -1, -1, 0);

        while (!queue.empty()) {
            Ev e = queue.top();
            queue.pop();
            switch (e.kind) {
                case SimEventKind::ArriveAt: arrive(e); break;
                case SimEventKind::BeginExec: begin(e); break;
                case SimEventKind::EndExec: end(e); break;
                case SimEventKind::StartMsg:
                case SimEventKind::StopMsg:
                    record(e);
                    rescan(e.t);
                    break;
                case SimEventKind::Failure: fail(e); break;
            }
        }
        for (int s = 0; s < n; ++s)
            if (status[s] != TaskStatus::Done)
                throw Error(ErrorCode::Deadlock,
                            "execution stalled before subtask " + std::to_string(s));

        // Induced word: letters ordered by actual start, ties merged.
        std::vector<int> order(n);
        for (int s = 0; s < n; ++s) order[s] = s;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return trace.start[a] < trace.start[b];
        });
        for (int i = 0; i < n;) {
            Letter l = 0;
            int j = i;
            while (j < n && trace.start[order[j]] <= trace.start[order[i]] + 1e-9)
                l |= live.poset.subtasks[order[j++]].pos_mask;
            trace.word.push_back(l);
            i = j;
        }
        trace.makespan = 0;
        for (int s = 0; s < n; ++s)
            trace.makespan = std::max(trace.makespan, trace.finish[s]);
        return std::move(trace);
    }
};

}  // namespace

Trace simulate(const GroundedPoset& gp, const Schedule& plan, const SimOptions& opts) {
    Sim sim(gp, opts);
    return sim.run(plan);
}

}  // namespace mats

#include "mats/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>

namespace mats {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<bool>> closure_of(const Poset& p) {
    int n = static_cast<int>(p.subtasks.size());
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (auto [a, b] : p.leq) r[a][b] = true;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (r[i][k])
                for (int j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = true;
    return r;
}

}  // namespace

ModelFilter serviceable_model_filter(const Nba& nba, const Scenario& s) {
    // Resolve atom regions once; unknown names disqualify their letters.
    auto regions = std::make_shared<std::vector<int>>(nba.atom_names.size(), -2);
    for (std::size_t i = 0; i < nba.atom_names.size(); ++i) {
        try {
            (*regions)[i] = ground_atom(nba.atom_names[i], s).region;
        } catch (const Error&) {
        }
    }
    return [regions](const Guard::MinimalModel& m) {
        if (m.pos == 0) return false;
        int region = -1;
        for (int b = 0; b < 64; ++b) {
            if (!(m.pos >> b & 1)) continue;
            int r = b < static_cast<int>(regions->size()) ? (*regions)[b] : -2;
            if (r == -2) return false;
            if (region == -1) region = r;
            else if (region != r) return false;
        }
        return true;
    };
}

GroundedPoset ground_poset(const Poset& p, const Scenario& s,
                           const std::set<int>& excluded) {
    if (p.subtasks.size() > static_cast<std::size_t>(kMaxSubtasks))
        throw Error(ErrorCode::CapExceeded, "more than 64 subtasks");
    GroundedPoset gp;
    gp.scenario = &s;
    gp.poset = p;
    for (std::size_t i = 0; i < p.subtasks.size(); ++i) {
        const Subtask& st = p.subtasks[i];
        std::vector<std::string> negative = st.negative;
        negative.insert(negative.end(), st.selfloop_neg.begin(), st.selfloop_neg.end());
        ServiceRequirement req = ground(st.positive, negative, s);
        auto cs = coalitions_for(req, s, excluded);
        if (cs.empty())
            throw Error(ErrorCode::InfeasibleForTeam,
                        "no coalition can serve subtask " + std::to_string(i));
        gp.reqs.push_back(std::move(req));
        gp.coalitions.push_back(std::move(cs));
    }
    gp.pre = poset_graph(p).edges;
    return gp;
}

PlanBase PlanBase::fresh(const Scenario& s) {
    PlanBase b;
    for (const AgentModel& a : s.agents) {
        b.agent_region.push_back(a.initial_region);
        b.agent_ready.push_back(0);
    }
    return b;
}

std::uint64_t PlanBase::frozen_mask() const {
    std::uint64_t m = 0;
    for (const FrozenTask& f : frozen) m |= 1ull << f.subtask;
    return m;
}

SearchNode root_node(const GroundedPoset& gp, const PlanBase& base) {
    SearchNode n;
    n.assigned = base.frozen_mask();
    n.coalition_choice.assign(gp.poset.subtasks.size(), -1);
    n.agent_seq.assign(gp.scenario->agents.size(), {});
    return n;
}

std::vector<SearchNode> expand(const SearchNode& node, const GroundedPoset& gp) {
    std::vector<SearchNode> out;
    int n = static_cast<int>(gp.poset.subtasks.size());
    for (int s = 0; s < n; ++s) {
        if (node.assigned >> s & 1) continue;
        bool ready = true;
        for (auto [a, b] : gp.pre)
            if (b == s && !(node.assigned >> a & 1)) { ready = false; break; }
        if (!ready) continue;
        for (int ci = 0; ci < static_cast<int>(gp.coalitions[s].size()); ++ci) {
            SearchNode child = node;
            child.assigned |= 1ull << s;
            child.coalition_choice[s] = ci;
            child.order.push_back(s);
            for (int m : gp.coalitions[s][ci].members) child.agent_seq[m].push_back(s);
            out.push_back(std::move(child));
        }
    }
    return out;
}

namespace {

struct Solver {
    const GroundedPoset& gp;
    const PlanBase& base;
    const SearchNode& node;

    std::vector<int> sched;  // non-frozen assigned subtasks
    std::vector<bool> is_sched, is_frozen;
    std::vector<double> fixed_start, fixed_finish;  // frozen windows
    std::vector<double> lb;                         // per subtask
    struct E { int u, v; double w; };
    std::vector<E> edges;
    struct Upper { int x; double bound; };  // start[x]+dur[x]+eps <= bound
    std::vector<Upper> uppers;
    std::vector<std::vector<bool>> closure;
    bool base_ok = true;

    explicit Solver(const GroundedPoset& g, const PlanBase& b, const SearchNode& nd)
        : gp(g), base(b), node(nd), closure(closure_of(g.poset)) {
        int n = static_cast<int>(gp.poset.subtasks.size());
        is_sched.assign(n, false);
        is_frozen.assign(n, false);
        fixed_start.assign(n, 0);
        fixed_finish.assign(n, 0);
        lb.assign(n, base.horizon);
        for (const FrozenTask& f : base.frozen) {
            is_frozen[f.subtask] = true;
            fixed_start[f.subtask] = f.start;
            fixed_finish[f.subtask] = f.finish;
        }
        for (int s = 0; s < n; ++s)
            if ((node.assigned >> s & 1) && !is_frozen[s]) {
                is_sched[s] = true;
                sched.push_back(s);
            }

        // Agent itineraries: release, then travel between consecutive tasks.
        for (std::size_t ag = 0; ag < node.agent_seq.size(); ++ag) {
            if (base.excluded.count(static_cast<int>(ag))) {
                if (!node.agent_seq[ag].empty()) base_ok = false;
                continue;
            }
            int loc = base.agent_region[ag];
            int prev = -1;
            for (int s : node.agent_seq[ag]) {
                double t = gp.scenario->travel_time(static_cast<int>(ag), loc,
                                                    gp.reqs[s].region);
                if (!std::isfinite(t)) { base_ok = false; break; }
                if (prev < 0)
                    lb[s] = std::max(lb[s], base.agent_ready[ag] + t);
                else
                    edges.push_back({prev, s, gp.reqs[prev].duration + t});
                loc = gp.reqs[s].region;
                prev = s;
            }
        }

        // Precedence: start(a) <= start(b).
        for (auto [a, b] : gp.poset.leq) {
            bool a_in = is_sched[a] || is_frozen[a];
            bool b_in = is_sched[b] || is_frozen[b];
            if (!a_in || !b_in) continue;
            if (is_frozen[a] && is_frozen[b]) continue;  // historical
            if (is_frozen[a]) lb[b] = std::max(lb[b], fixed_start[a]);
            else if (is_frozen[b]) continue;  // honored before the failure
            else edges.push_back({a, b, 0});
        }
    }

    // Ordered finish-before-start options per applicable opposed set.
    // An empty option list means the set is already satisfied.
    std::vector<std::vector<std::pair<int, int>>> opposed_options() const {
        std::vector<std::vector<std::pair<int, int>>> out;
        for (const auto& set : gp.poset.opposed) {
            bool all_in = true;
            for (int m : set)
                if (!is_sched[m] && !is_frozen[m]) { all_in = false; break; }
            if (!all_in) continue;
            bool satisfied = false;
            for (int x : set) {
                for (int y : set)
                    if (x != y && is_frozen[x] && is_frozen[y] &&
                        fixed_finish[x] < fixed_start[y]) {
                        satisfied = true;
                        break;
                    }
                if (satisfied) break;
            }
            if (satisfied) continue;
            std::vector<std::pair<int, int>> opts;
            for (int x : set)
                for (int y : set) {
                    if (x == y) continue;
                    if (is_frozen[y]) continue;     // cannot delay history
                    if (closure[y][x]) continue;    // contradicts leq: cyclic
                    opts.push_back({x, y});
                }
            out.push_back(std::move(opts));
        }
        return out;
    }

    // Least fixpoint under one resolution choice; nullopt when cyclic.
    std::optional<std::vector<double>> solve(
        const std::vector<std::pair<int, int>>& resolution) const {
        int n = static_cast<int>(gp.poset.subtasks.size());
        std::vector<double> start(n, 0);
        std::vector<E> all = edges;
        std::vector<double> low = lb;
        for (auto [x, y] : resolution) {
            if (is_frozen[x]) low[y] = std::max(low[y], fixed_finish[x] + kTimeEps);
            else all.push_back({x, y, gp.reqs[x].duration + kTimeEps});
        }
        for (int s : sched) start[s] = low[s];
        std::size_t iters = 0, limit = sched.size() + 2;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const E& e : all) {
                double cand = start[e.u] + e.w;
                if (cand > start[e.v] + 1e-12) { start[e.v] = cand; changed = true; }
            }
            if (changed && ++iters > limit) return std::nullopt;  // positive cycle
        }
        return start;
    }

    std::optional<Schedule> best_schedule() const {
        if (!base_ok) return std::nullopt;
        auto option_sets = opposed_options();
        for (const auto& o : option_sets)
            if (o.empty()) return std::nullopt;  // no viable resolution
        std::optional<Schedule> best;
        // Exact minimization over resolutions while the product is small;
        // past the cap, remaining sets keep only their first viable option
        // (suboptimal but feasible, which is all large instances need).
        std::size_t combos = 1;
        for (auto& o : option_sets) {
            if (combos > 20000 && o.size() > 1) o.resize(1);
            combos *= std::max<std::size_t>(o.size(), 1);
        }
        std::vector<std::pair<int, int>> resolution;
        std::function<void(std::size_t)> rec = [&](std::size_t i) {
            if (i == option_sets.size()) {
                auto start = solve(resolution);
                if (!start) return;
                double mk = base.horizon;
                int n = static_cast<int>(gp.poset.subtasks.size());
                for (int s = 0; s < n; ++s) {
                    if (is_sched[s]) mk = std::max(mk, (*start)[s] + gp.reqs[s].duration);
                    if (is_frozen[s]) mk = std::max(mk, fixed_finish[s]);
                }
                for (auto [x, y] : resolution)
                    if (!is_frozen[x] && is_frozen[y] &&
                        (*start)[x] + gp.reqs[x].duration >= fixed_start[y])
                        return;
                if (!best || mk < best->makespan - 1e-12) {
                    Schedule sc;
                    sc.start = *start;
                    int nn = static_cast<int>(gp.poset.subtasks.size());
                    sc.duration.assign(nn, 0);
                    for (int s = 0; s < nn; ++s) {
                        sc.duration[s] = gp.reqs[s].duration;
                        if (is_frozen[s]) sc.start[s] = fixed_start[s];
                        if (!is_sched[s] && !is_frozen[s]) sc.start[s] = -1;
                    }
                    sc.coalition_choice = node.coalition_choice;
                    sc.agent_seq = node.agent_seq;
                    sc.makespan = mk;
                    best = std::move(sc);
                }
                return;
            }
            if (option_sets[i].empty()) { rec(i + 1); return; }
            for (const auto& opt : option_sets[i]) {
                resolution.push_back(opt);
                rec(i + 1);
                resolution.pop_back();
            }
        };
        rec(0);
        return best;
    }
};

}  // namespace

std::optional<Schedule> schedule(const SearchNode& node, const GroundedPoset& gp,
                                 const PlanBase& base) {
    Solver sv(gp, base, node);
    return sv.best_schedule();
}

std::optional<Schedule> upper_bound(const SearchNode& node, const GroundedPoset& gp,
                                    const PlanBase& base) {
    const Scenario& s = *gp.scenario;
    int n = static_cast<int>(gp.poset.subtasks.size());
    int na = static_cast<int>(s.agents.size());

    // Replay the node's assignment order to estimate agent timelines.
    std::vector<double> avail = base.agent_ready;
    std::vector<int> loc = base.agent_region;
    double tmax = base.horizon, tsum = 0;
    for (const FrozenTask& f : base.frozen) {
        tmax = std::max(tmax, f.finish);
        tsum += (f.finish - f.start) * f.members.size();
    }
    auto apply = [&](int st, const Coalition& c) {
        double begin = 0;
        for (int m : c.members)
            begin = std::max(begin,
                             avail[m] + s.travel_time(m, loc[m], gp.reqs[st].region));
        begin = std::max(begin, base.horizon);
        double end = begin + gp.reqs[st].duration;
        for (int m : c.members) {
            avail[m] = end;
            loc[m] = gp.reqs[st].region;
        }
        tmax = std::max(tmax, end);
        tsum += gp.reqs[st].duration * gp.reqs[st].participants;
        return end;
    };
    SearchNode cur = node;
    for (int st : node.order) apply(st, gp.coalitions[st][node.coalition_choice[st]]);

    while (true) {
        int best_s = -1, best_c = -1;
        double best_eta = -1;
        for (int st = 0; st < n; ++st) {
            if (cur.assigned >> st & 1) continue;
            bool ready = true;
            for (auto [a, b] : gp.pre)
                if (b == st && !(cur.assigned >> a & 1)) { ready = false; break; }
            if (!ready) continue;
            for (int ci = 0; ci < static_cast<int>(gp.coalitions[st].size()); ++ci) {
                const Coalition& c = gp.coalitions[st][ci];
                double begin = 0;
                bool ok = true;
                for (int m : c.members) {
                    double t = s.travel_time(m, loc[m], gp.reqs[st].region);
                    if (!std::isfinite(t)) { ok = false; break; }
                    begin = std::max(begin, avail[m] + t);
                }
                if (!ok) continue;
                begin = std::max(begin, base.horizon);
                double end = begin + gp.reqs[st].duration;
                double t2 = std::max(tmax, end);
                double s2 = tsum + gp.reqs[st].duration * gp.reqs[st].participants;
                double eta = t2 <= 0 ? 1.0 : s2 / t2;
                if (eta > best_eta + 1e-12) {
                    best_eta = eta;
                    best_s = st;
                    best_c = ci;
                }
            }
        }
        if (best_s < 0) break;
        cur.assigned |= 1ull << best_s;
        cur.coalition_choice[best_s] = best_c;
        cur.order.push_back(best_s);
        for (int m : gp.coalitions[best_s][best_c].members)
            cur.agent_seq[m].push_back(best_s);
        apply(best_s, gp.coalitions[best_s][best_c]);
    }
    std::uint64_t all = gp.poset.subtasks.size() >= 64
                            ? ~0ull
                            : (1ull << gp.poset.subtasks.size()) - 1;
    if (cur.assigned != all) return std::nullopt;  // unreachable travel
    return schedule(cur, gp, base);
}

namespace {

// Per unassigned subtask: the longest duration chain it starts, following
// finish-before-start pairs (two-element opposed sets ordered by leq).
std::vector<double> remaining_chains(const SearchNode& node, const GroundedPoset& gp) {
    int n = static_cast<int>(gp.poset.subtasks.size());
    auto closure = closure_of(gp.poset);
    // Edges that force finish-before-start on unfinished subtasks: ordered
    // pairs that also form a two-element opposed set.
    std::vector<std::vector<int>> succ(n);
    for (const auto& set : gp.poset.opposed) {
        if (set.size() != 2) continue;
        int a = set[0], b = set[1];
        if ((node.assigned >> a & 1) || (node.assigned >> b & 1))
            continue;  // mixed chains fold into the committed part
        // a leq cycle through an opposed pair has no feasible completion;
        // skipping the edges keeps the chain DAG well-founded and any bound
        // is admissible for an infeasible subtree
        if (closure[a][b] && closure[b][a]) continue;
        if (closure[a][b]) succ[a].push_back(b);
        if (closure[b][a]) succ[b].push_back(a);
    }
    std::vector<double> memo(n, -1);
    std::vector<char> on_stack(n, 0);
    std::function<double(int)> longest = [&](int v) -> double {
        if (memo[v] >= 0) return memo[v];
        if (on_stack[v]) return gp.reqs[v].duration;  // cycle via distinct pairs
        on_stack[v] = 1;
        double best = gp.reqs[v].duration;
        for (int w : succ[v]) best = std::max(best, gp.reqs[v].duration + longest(w));
        on_stack[v] = 0;
        return memo[v] = best;
    };
    std::vector<double> out(n, 0);
    for (int v = 0; v < n; ++v)
        if (!(node.assigned >> v & 1)) out[v] = longest(v);
    return out;
}

double remaining_load_bound(const SearchNode& node, const GroundedPoset& gp,
                            const PlanBase& base) {
    double work = 0;
    int n = static_cast<int>(gp.poset.subtasks.size());
    for (int v = 0; v < n; ++v)
        if (!(node.assigned >> v & 1))
            work += gp.reqs[v].duration * gp.reqs[v].participants;
    int agents = static_cast<int>(gp.scenario->agents.size()) -
                 static_cast<int>(base.excluded.size());
    return agents > 0 ? work / agents : kInf;
}

}  // namespace

double lower_bound(const SearchNode& node, const GroundedPoset& gp,
                   const PlanBase& base, LbMode mode) {
    auto sc = schedule(node, gp, base);
    if (!sc) return kInf;
    double committed = sc->makespan;
    auto chains = remaining_chains(node, gp);
    double t1 = 0;
    for (double c : chains) t1 = std::max(t1, c);
    double t2 = remaining_load_bound(node, gp, base);
    double rest = mode == LbMode::Min ? std::min(t1, t2) : std::max(t1, t2);
    double lb = std::max(committed, base.horizon + rest);

    // Earliest physical start of each remaining subtask: every candidate
    // coalition member must first finish its committed itinerary and travel
    // over (triangle inequality holds for shortest-path travel times).
    // Committed finish times come from the resolution-free relaxation, not
    // from sc: a completion may resolve opposed sets differently and finish
    // a committed task earlier than the best committed-only schedule does.
    const Scenario& s = *gp.scenario;
    int na = static_cast<int>(s.agents.size());
    Solver relax(gp, base, node);
    auto rstart = relax.base_ok ? relax.solve({}) : std::nullopt;
    std::vector<double> t0 = base.agent_ready;
    std::vector<int> loc = base.agent_region;
    for (int ag = 0; ag < na; ++ag)
        for (int st : node.agent_seq[ag]) {
            if (rstart)
                t0[ag] = std::max(t0[ag], (*rstart)[st] + gp.reqs[st].duration);
            loc[ag] = gp.reqs[st].region;
        }
    for (const FrozenTask& f : base.frozen)
        for (int m : f.members)
            if (t0[m] < f.finish) {
                t0[m] = f.finish;
                loc[m] = gp.reqs[f.subtask].region;
            }
    int n = static_cast<int>(gp.poset.subtasks.size());
    for (int v = 0; v < n; ++v) {
        if (node.assigned >> v & 1) continue;
        double est = kInf;
        for (const Coalition& c : gp.coalitions[v]) {
            double arrive = base.horizon;
            for (int m : c.members)
                arrive = std::max(arrive,
                                  t0[m] + s.travel_time(m, loc[m], gp.reqs[v].region));
            est = std::min(est, arrive);
        }
        lb = std::max(lb, est + chains[v]);
    }
    return lb;
}

double alt_lower_bound(const SearchNode& node, const GroundedPoset& gp,
                       const PlanBase& base) {
    auto sc = schedule(node, gp, base);
    if (!sc) return kInf;
    // Per-agent committed finish times, from the resolution-free relaxation
    // so the bound holds under every opposed-set resolution.
    Solver relax(gp, base, node);
    auto rstart = relax.base_ok ? relax.solve({}) : std::nullopt;
    std::vector<double> t0 = base.agent_ready;
    for (std::size_t ag = 0; ag < node.agent_seq.size(); ++ag)
        for (int s : node.agent_seq[ag])
            if (rstart)
                t0[ag] = std::max(t0[ag], (*rstart)[s] + gp.reqs[s].duration);
    for (const FrozenTask& f : base.frozen)
        for (int m : f.members) t0[m] = std::max(t0[m], f.finish);

    double sum_t0 = 0, max_t0 = base.horizon;
    int active = 0;
    for (std::size_t ag = 0; ag < t0.size(); ++ag) {
        if (base.excluded.count(static_cast<int>(ag))) continue;
        sum_t0 += t0[ag];
        max_t0 = std::max(max_t0, t0[ag]);
        ++active;
    }
    double work = 0;
    int n = static_cast<int>(gp.poset.subtasks.size());
    for (int v = 0; v < n; ++v)
        if (!(node.assigned >> v & 1))
            work += gp.reqs[v].duration * gp.reqs[v].participants;
    double avg = active > 0 ? (sum_t0 + work) / active : kInf;
    return std::max({sc->makespan, max_t0, avg});
}

BnbResult bnb(const GroundedPoset& gp, const PlanBase& base, const BnbOptions& opts) {
    BnbResult res;
    res.makespan = opts.initial_incumbent;
    auto t_start = Clock::now();
    auto deadline = t_start + std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double>(opts.budget_seconds));
    auto elapsed = [&] {
        return std::chrono::duration<double>(Clock::now() - t_start).count();
    };

    struct QEntry {
        double lb;
        std::size_t seq;
        SearchNode node;
        // priority_queue is a max-heap: invert so top() is min lb, FIFO ties.
        bool operator<(const QEntry& o) const {
            return lb != o.lb ? lb > o.lb : seq > o.seq;
        }
    };
    std::priority_queue<QEntry> queue;

    std::uint64_t all = gp.poset.subtasks.size() >= 64
                            ? ~0ull
                            : (1ull << gp.poset.subtasks.size()) - 1;
    std::size_t seq = 0;
    SearchNode root = root_node(gp, base);
    queue.push({lower_bound(root, gp, base, opts.lb_mode), seq++, std::move(root)});

    // Interchangeable-agent signature: siblings whose coalitions differ only
    // by a relabeling of so-far-identical agents span isomorphic subtrees.
    const Scenario& sc = *gp.scenario;
    std::vector<std::string> agent_sig(sc.agents.size());
    for (std::size_t a = 0; a < sc.agents.size(); ++a) {
        const AgentModel& am = sc.agents[a];
        std::string s = am.type_label + "@" + std::to_string(base.agent_region[a]) +
                        "/" + std::to_string(base.agent_ready[a]) +
                        (base.excluded.count(static_cast<int>(a)) ? "x" : "");
        for (const FrozenTask& f : base.frozen)
            for (int m : f.members)
                if (m == static_cast<int>(a)) s += "!" + std::to_string(f.subtask);
        for (const auto& [act, dur] : am.local_actions)
            s += "|" + act + ":" + std::to_string(dur);
        for (const auto& act : am.collab_actions) s += "|" + act;
        agent_sig[a] = std::move(s);
    }
    auto child_sig = [&](const SearchNode& parent, const SearchNode& child) {
        int s = child.order.back();
        std::vector<std::string> parts;
        for (int m : gp.coalitions[s][child.coalition_choice[s]].members) {
            std::string p = agent_sig[m];
            for (int t : parent.agent_seq[m]) p += ";" + std::to_string(t);
            parts.push_back(std::move(p));
        }
        std::sort(parts.begin(), parts.end());
        std::string sig = std::to_string(s);
        for (auto& p : parts) sig += "#" + p;
        return sig;
    };

    while (!queue.empty()) {
        if (Clock::now() >= deadline) break;
        QEntry top = queue.top();
        queue.pop();
        if (top.lb >= res.makespan - 1e-9) {  // cannot beat the incumbent
            ++res.stats.pruned;
            continue;
        }
        ++res.stats.visited;

        auto ub = top.node.assigned == all ? schedule(top.node, gp, base)
                                           : upper_bound(top.node, gp, base);
        if (ub && ub->makespan < res.makespan - 1e-12) {
            res.makespan = ub->makespan;
            res.best = std::move(ub);
            res.history.push_back({elapsed(), res.makespan});
            if (opts.progress) opts.progress(elapsed(), res.makespan);
        }
        if (top.node.assigned == all) continue;
        std::set<std::string> seen;
        for (SearchNode& child : expand(top.node, gp)) {
            ++res.stats.generated;
            if (!seen.insert(child_sig(top.node, child)).second) {
                ++res.stats.pruned;  // symmetric sibling
                continue;
            }
            double lb = lower_bound(child, gp, base, opts.lb_mode);
            if (lb < res.makespan - 1e-9)
                queue.push({lb, seq++, std::move(child)});
            else
                ++res.stats.pruned;
        }
    }
    res.stats.exhausted = queue.empty();
    while (!queue.empty()) {  // leftovers the bound had already written off
        if (queue.top().lb >= res.makespan - 1e-9) ++res.stats.pruned;
        queue.pop();
    }
    return res;
}

PlanResult plan(const Nba& pruned, const Scenario& s, const PlanOptions& opts) {
    PlanResult res;
    auto t_start = Clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(Clock::now() - t_start).count();
    };

    ComputePosetsOptions po;
    po.budget_seconds = opts.budget_poset_seconds;
    po.opposed_arity = opts.opposed_arity;
    po.model_filter = serviceable_model_filter(pruned, s);
    res.posets = compute_posets(pruned, po);
    if (res.posets.empty()) {
        // A trivially satisfied task (initial state accepting) yields an
        // empty schedule; otherwise the budget ran out before the first run.
        for (int q : pruned.initial)
            if (pruned.accepting[q]) {
                res.best = Schedule{};
                res.makespan = 0;
                res.best_poset = -1;
                return res;
            }
        throw Error(ErrorCode::BudgetExhausted, "no poset found within budget");
    }

    // Ground every poset; remember the failures.
    std::vector<std::optional<GroundedPoset>> grounded(res.posets.size());
    std::size_t ok = 0;
    for (std::size_t i = 0; i < res.posets.size(); ++i) {
        try {
            grounded[i] = ground_poset(res.posets[i], s);
            ++ok;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InfeasibleForTeam &&
                e.code() != ErrorCode::CapExceeded)
                throw;
        }
    }
    if (ok == 0)
        throw Error(ErrorCode::InfeasibleForTeam,
                    "no mined poset is serviceable by this team");

    PlanBase base = PlanBase::fresh(s);
    res.makespan = kInf;
    std::mutex mu;
    std::vector<std::size_t> work_items;
    for (std::size_t i = 0; i < res.posets.size(); ++i)
        if (grounded[i]) work_items.push_back(i);
    double per_poset = opts.budget_bnb_seconds / static_cast<double>(work_items.size());

    double incumbent = kInf;  // guarded by mu; drives the global history
    auto run_one = [&](std::size_t i) {
        BnbOptions bo;
        bo.budget_seconds = per_poset;
        bo.lb_mode = opts.lb_mode;
        {
            std::lock_guard<std::mutex> g(mu);
            bo.initial_incumbent = incumbent;
        }
        bo.progress = [&](double, double mk) {
            std::lock_guard<std::mutex> g(mu);
            if (mk < incumbent - 1e-12) {
                incumbent = mk;
                res.history.push_back({elapsed(), mk});
                if (opts.progress) opts.progress(elapsed(), mk);
            }
        };
        BnbResult r = bnb(*grounded[i], base, bo);
        std::lock_guard<std::mutex> g(mu);
        res.stats.visited += r.stats.visited;
        res.stats.generated += r.stats.generated;
        res.stats.pruned += r.stats.pruned;
        if (r.best && r.makespan < res.makespan - 1e-12) {
            res.makespan = r.makespan;
            res.best = std::move(r.best);
            res.best_poset = static_cast<int>(i);
        }
    };

    int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        for (std::size_t i : work_items) run_one(i);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        std::mutex wm;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                while (true) {
                    std::size_t i;
                    {
                        std::lock_guard<std::mutex> g(wm);
                        if (next >= work_items.size()) return;
                        i = work_items[next++];
                    }
                    run_one(i);
                }
            });
        for (auto& th : pool) th.join();
    }

    if (!res.best)
        throw Error(ErrorCode::BudgetExhausted,
                    "no feasible schedule found within budget");
    std::sort(res.history.begin(), res.history.end());
    return res;
}

}  // namespace mats

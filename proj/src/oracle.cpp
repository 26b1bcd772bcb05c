#include "mats/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Edge {
    int u, v;
    double w;
};

// Earliest starts under difference constraints, or nullopt when cyclic.
std::optional<std::vector<double>> relax(int n, const std::vector<double>& lb,
                                         const std::vector<Edge>& edges) {
    std::vector<double> start = lb;
    for (int pass = 0; pass <= n + 1; ++pass) {
        bool changed = false;
        for (const Edge& e : edges)
            if (start[e.u] + e.w > start[e.v] + 1e-12) {
                start[e.v] = start[e.u] + e.w;
                changed = true;
            }
        if (!changed) return start;
    }
    return std::nullopt;
}

}  // namespace

std::optional<OracleResult> exact_schedule(const GroundedPoset& gp,
                                           const OracleOptions& opts) {
    const Scenario& s = *gp.scenario;
    int n = static_cast<int>(gp.poset.subtasks.size());
    int na = static_cast<int>(s.agents.size());
    if (static_cast<std::size_t>(n) > opts.max_subtasks ||
        static_cast<std::size_t>(na) > opts.max_agents)
        throw Error(ErrorCode::CapExceeded, "instance too large for the oracle");

    std::optional<OracleResult> best;

    std::vector<int> choice(n, 0);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    // Opposed resolutions: index of the ordered (x, y) pair per set.
    std::vector<std::vector<std::pair<int, int>>> opp_pairs;
    for (const auto& set : gp.poset.opposed) {
        std::vector<std::pair<int, int>> pairs;
        for (int x : set)
            for (int y : set)
                if (x != y) pairs.push_back({x, y});
        opp_pairs.push_back(std::move(pairs));
    }

    auto eval_fixed = [&](const std::vector<int>& order) {
        // Agent sequences from the order and the chosen coalitions.
        std::vector<double> lb(n, 0);
        std::vector<Edge> edges;
        std::vector<int> loc(na);
        std::vector<int> prev(na, -1);
        for (int ag = 0; ag < na; ++ag) loc[ag] = s.agents[ag].initial_region;
        for (int st : order) {
            const Coalition& c = gp.coalitions[st][choice[st]];
            for (int ag : c.members) {
                double t = s.travel_time(ag, loc[ag], gp.reqs[st].region);
                if (!std::isfinite(t)) return;
                if (prev[ag] < 0)
                    lb[st] = std::max(lb[st], t);
                else
                    edges.push_back({prev[ag], st, gp.reqs[prev[ag]].duration + t});
                loc[ag] = gp.reqs[st].region;
                prev[ag] = st;
            }
        }
        for (auto [a, b] : gp.poset.leq) edges.push_back({a, b, 0});

        std::vector<std::size_t> pick(opp_pairs.size(), 0);
        while (true) {
            std::vector<Edge> all = edges;
            for (std::size_t i = 0; i < opp_pairs.size(); ++i) {
                auto [x, y] = opp_pairs[i][pick[i]];
                all.push_back({x, y, gp.reqs[x].duration + kTimeEps});
            }
            auto start = relax(n, lb, all);
            if (start) {
                double mk = 0;
                for (int st = 0; st < n; ++st)
                    mk = std::max(mk, (*start)[st] + gp.reqs[st].duration);
                if (!best || mk < best->makespan - 1e-12) {
                    best = OracleResult{mk, *start, choice};
                }
            }
            std::size_t i = 0;
            for (; i < pick.size(); ++i) {
                if (++pick[i] < opp_pairs[i].size()) break;
                pick[i] = 0;
            }
            if (i == pick.size()) break;
        }
    };

    while (true) {
        std::sort(perm.begin(), perm.end());
        do {
            eval_fixed(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));

        int i = 0;
        for (; i < n; ++i) {
            if (++choice[i] < static_cast<int>(gp.coalitions[i].size())) break;
            choice[i] = 0;
        }
        if (i == n || n == 0) break;
    }
    if (n == 0) return OracleResult{0, {}, {}};
    return best;
}

std::optional<double> exact_optimum(const GroundedPoset& gp,
                                    const OracleOptions& opts) {
    auto r = exact_schedule(gp, opts);
    if (!r) return std::nullopt;
    return r->makespan;
}

}  // namespace mats

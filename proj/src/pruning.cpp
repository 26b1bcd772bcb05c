#include "mats/pruning.hpp"

#include <algorithm>
#include <optional>

namespace mats {

namespace {

bool has_accepting_path(const Nba& nba) {
    std::vector<bool> seen(nba.num_states, false);
    std::vector<int> stack(nba.initial.begin(), nba.initial.end());
    for (int q : stack) seen[q] = true;
    while (!stack.empty()) {
        int q = stack.back();
        stack.pop_back();
        if (nba.accepting[q]) return true;
        for (const auto& [dst, g] : nba.out[q])
            if (!seen[dst]) { seen[dst] = true; stack.push_back(dst); }
    }
    return false;
}

}  // namespace

Nba prune_infeasible(const Nba& nba, const Scenario& s, PruneReport* report) {
    // Per-atom feasibility; unknown names fail grounding here.
    std::vector<bool> feasible(nba.atom_names.size());
    for (std::size_t i = 0; i < nba.atom_names.size(); ++i)
        feasible[i] = atom_feasible(ground_atom(nba.atom_names[i], s), s);

    Nba out = nba;
    std::size_t removed = 0;
    for (int q = 0; q < out.num_states; ++q) {
        std::vector<std::pair<int, Guard>> kept;
        for (auto& [dst, g] : out.out[q]) {
            Letter support = g.support();
            std::vector<Cube> cubes;
            for (Letter m : g.minterms()) {
                bool ok = true;
                for (int b = 0; b < 64 && ok; ++b)
                    if (m >> b & 1 && !feasible[b]) ok = false;
                if (ok) cubes.push_back(Cube{m, support & ~m});
            }
            Guard filtered(std::move(cubes));
            if (filtered.satisfiable()) kept.push_back({dst, std::move(filtered)});
            else ++removed;
        }
        out.out[q] = std::move(kept);
    }
    if (report) report->infeasible_edges_removed += removed;
    return out;
}

Nba prune_invalid_states(const Nba& nba, PruneReport* report) {
    int n = nba.num_states;
    std::vector<bool> fwd(n, false), bwd(n, false);
    std::vector<int> stack;
    for (int q : nba.initial)
        if (!fwd[q]) { fwd[q] = true; stack.push_back(q); }
    while (!stack.empty()) {
        int q = stack.back();
        stack.pop_back();
        for (const auto& [dst, g] : nba.out[q])
            if (!fwd[dst]) { fwd[dst] = true; stack.push_back(dst); }
    }
    std::vector<std::vector<int>> rev(n);
    for (int q = 0; q < n; ++q)
        for (const auto& [dst, g] : nba.out[q]) rev[dst].push_back(q);
    for (int q = 0; q < n; ++q)
        if (nba.accepting[q] && !bwd[q]) { bwd[q] = true; stack.push_back(q); }
    while (!stack.empty()) {
        int q = stack.back();
        stack.pop_back();
        for (int src : rev[q])
            if (!bwd[src]) { bwd[src] = true; stack.push_back(src); }
    }

    std::vector<int> remap(n, -1);
    Nba out;
    out.atom_names = nba.atom_names;
    for (int q = 0; q < n; ++q)
        if (fwd[q] && bwd[q]) remap[q] = out.num_states++;
    out.accepting.assign(out.num_states, false);
    out.out.resize(out.num_states);
    for (int q = 0; q < n; ++q) {
        if (remap[q] < 0) continue;
        out.accepting[remap[q]] = nba.accepting[q];
        for (const auto& [dst, g] : nba.out[q])
            if (remap[dst] >= 0) out.out[remap[q]].push_back({remap[dst], g});
    }
    for (int q : nba.initial)
        if (remap[q] >= 0) out.initial.push_back(remap[q]);
    std::sort(out.initial.begin(), out.initial.end());
    if (report) report->invalid_states_removed += n - out.num_states;
    return out;
}

Nba prune_decomposable(const Nba& nba, PruneReport* report) {
    int n = nba.num_states;
    // Fast edge lookup.
    std::vector<std::vector<const Guard*>> g(n, std::vector<const Guard*>(n, nullptr));
    for (int q = 0; q < n; ++q)
        for (const auto& [dst, gd] : nba.out[q]) g[q][dst] = &gd;

    // Assignments over the atom set `mask` satisfying `keep`; nullopt when
    // the enumeration would be too wide to be worth it (edge then stays).
    constexpr int kJointCap = 16;
    auto models_over = [](const Guard& keep, Letter mask)
        -> std::optional<std::vector<Letter>> {
        std::vector<int> bits;
        for (int b = 0; b < kMaxAtoms; ++b)
            if (mask >> b & 1) bits.push_back(b);
        if (static_cast<int>(bits.size()) > kJointCap) return std::nullopt;
        std::vector<Letter> out;
        for (Letter k = 0; k < (1ull << bits.size()); ++k) {
            Letter l = 0;
            for (std::size_t i = 0; i < bits.size(); ++i)
                if (k >> i & 1) l |= 1ull << bits[i];
            if (keep.eval(l)) out.push_back(l);
        }
        return out;
    };

    auto decomposable = [&](int i, int j) {
        const Guard* gij = g[i][j];
        for (int k = 0; k < n; ++k) {
            if (k == i || k == j) continue;
            const Guard* gik = g[i][k];
            const Guard* gkj = g[k][j];
            if (!gik || !gkj) continue;
            // Decomposability in the stutter reading: every letter that
            // crosses (i,j) directly must drive both detour legs, so that
            // reading the letter twice takes the detour instead.  Removal
            // then only serializes words, never loses them.  The check
            // quantifies over the joint support: atoms outside an edge's
            // own support are free, not false, so support-local minterms
            // would miss letters that break the implication.
            Letter joint = gij->support() | gik->support() | gkj->support();
            auto direct = models_over(*gij, joint);
            if (!direct) continue;
            bool safe = !direct->empty();
            for (Letter m : *direct)
                if (!gik->eval(m) || !gkj->eval(m)) { safe = false; break; }
            if (safe) return true;
        }
        return false;
    };

    // Sequential removal against the live edge set: the detour that
    // justifies a removal must itself still be present, so cascades cannot
    // strand a word (mutually-decomposable edge pairs would otherwise both
    // disappear).
    Nba out = nba;
    std::size_t removed = 0;
    for (int i = 0; i < n; ++i) {
        for (auto it = out.out[i].begin(); it != out.out[i].end();) {
            int j = it->first;
            if (i != j && decomposable(i, j)) {
                g[i][j] = nullptr;
                it = out.out[i].erase(it);
                ++removed;
            } else {
                ++it;
            }
        }
    }
    if (report) report->decomposable_edges_removed += removed;
    return out;
}

Nba prune(const Nba& nba, const Scenario& s, PruneReport& report) {
    report.states_before = nba.num_states;
    report.edges_before = nba.edge_count();
    if (!has_accepting_path(nba))
        throw Error(ErrorCode::Unsatisfiable,
                    "the task automaton has no accepting path");
    Nba b = prune_infeasible(nba, s, &report);
    if (!has_accepting_path(b))
        throw Error(ErrorCode::InfeasibleForTeam,
                    "no accepting path survives team-feasibility pruning");
    b = prune_invalid_states(b, &report);
    b = prune_decomposable(b, &report);
    b = prune_invalid_states(b, &report);
    report.states_after = b.num_states;
    report.edges_after = b.edge_count();
    return b;
}

}  // namespace mats

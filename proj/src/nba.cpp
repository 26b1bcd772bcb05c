#include "mats/nba.hpp"

#include <algorithm>
#include <map>

namespace mats {

const Guard* Nba::edge(int from, int to) const {
    for (const auto& [dst, g] : out[from])
        if (dst == to) return &g;
    return nullptr;
}

Guard& Nba::edge_ref(int from, int to) {
    auto& lst = out[from];
    auto it = std::lower_bound(lst.begin(), lst.end(), to,
                               [](const auto& e, int v) { return e.first < v; });
    if (it == lst.end() || it->first != to)
        it = lst.insert(it, {to, Guard::falsity()});
    return it->second;
}

std::size_t Nba::edge_count() const {
    std::size_t n = 0;
    for (const auto& lst : out) n += lst.size();
    return n;
}

int Nba::atom_id(const std::string& name) const {
    for (std::size_t i = 0; i < atom_names.size(); ++i)
        if (atom_names[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

// One disjunct of the expansion law: a conjunction of literals to consume
// now, and the obligations to carry to the next position.
struct Disjunct {
    Cube now;
    std::vector<FormulaId> next;  // sorted, unique
};

std::vector<FormulaId> merge_obligations(const std::vector<FormulaId>& a,
                                         const std::vector<FormulaId>& b) {
    std::vector<FormulaId> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Splits top-level conjunctions into the obligation set, dropping True.
void flatten_and(const FormulaArena& a, FormulaId f, std::vector<FormulaId>& out) {
    const FormulaNode& n = a.node(f);
    if (n.kind == FormulaKind::And) {
        flatten_and(a, n.lhs, out);
        flatten_and(a, n.rhs, out);
        return;
    }
    if (n.kind == FormulaKind::True) return;
    out.push_back(f);
}

std::vector<FormulaId> obligation_set(const FormulaArena& a, FormulaId f) {
    std::vector<FormulaId> v;
    flatten_and(a, f, v);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

struct Translator {
    const FormulaArena& arena;
    std::map<std::uint32_t, int> atom_id;  // formula atom index -> nba atom id
    std::vector<std::string> atom_names;
    std::map<FormulaId, std::vector<Disjunct>> expand_cache;

    int atom_bit(std::uint32_t formula_atom) {
        auto it = atom_id.find(formula_atom);
        if (it != atom_id.end()) return it->second;
        if (atom_names.size() >= kMaxAtoms)
            throw Error(ErrorCode::CapExceeded,
                        "formula mentions more than 64 propositions");
        int id = static_cast<int>(atom_names.size());
        atom_names.push_back(arena.atom_name(formula_atom));
        atom_id[formula_atom] = id;
        return id;
    }

    const std::vector<Disjunct>& expand(FormulaId f) {
        auto it = expand_cache.find(f);
        if (it != expand_cache.end()) return it->second;
        std::vector<Disjunct> out;
        const FormulaNode& n = arena.node(f);
        switch (n.kind) {
        case FormulaKind::True:
            out.push_back({Cube{}, {}});
            break;
        case FormulaKind::False:
            break;
        case FormulaKind::Atom: {
            Cube c;
            c.pos = 1ull << atom_bit(n.atom);
            out.push_back({c, {}});
            break;
        }
        case FormulaKind::Not: {
            const FormulaNode& m = arena.node(n.lhs);
            if (m.kind != FormulaKind::Atom)
                throw Error(ErrorCode::NonCoSafe,
                            "translate expects positive normal form");
            Cube c;
            c.neg = 1ull << atom_bit(m.atom);
            out.push_back({c, {}});
            break;
        }
        case FormulaKind::And: {
            const auto lhs = expand(n.lhs);  // copies: recursion may mutate cache
            const auto rhs = expand(n.rhs);
            for (const Disjunct& a : lhs)
                for (const Disjunct& b : rhs) {
                    Cube c{a.now.pos | b.now.pos, a.now.neg | b.now.neg};
                    if (!c.consistent()) continue;
                    out.push_back({c, merge_obligations(a.next, b.next)});
                }
            break;
        }
        case FormulaKind::Or: {
            const auto lhs = expand(n.lhs);
            const auto rhs = expand(n.rhs);
            out = lhs;
            out.insert(out.end(), rhs.begin(), rhs.end());
            break;
        }
        case FormulaKind::Next:
            out.push_back({Cube{}, obligation_set(arena, n.lhs)});
            break;
        case FormulaKind::Until: {
            // a U b  =  b | (a & X(a U b))
            out = expand(n.rhs);
            const auto lhs = expand(n.lhs);
            for (const Disjunct& a : lhs) {
                std::vector<FormulaId> nx = a.next;
                auto pos = std::lower_bound(nx.begin(), nx.end(), f);
                if (pos == nx.end() || *pos != f) nx.insert(pos, f);
                out.push_back({a.now, std::move(nx)});
            }
            break;
        }
        case FormulaKind::Eventually: {
            // F a  =  a | X F a
            out = expand(n.lhs);
            out.push_back({Cube{}, {f}});
            break;
        }
        }
        // Deduplicate (cheap insurance against blowup from shared structure).
        std::sort(out.begin(), out.end(), [](const Disjunct& a, const Disjunct& b) {
            if (!(a.now == b.now)) return a.now < b.now;
            return a.next < b.next;
        });
        out.erase(std::unique(out.begin(), out.end(),
                              [](const Disjunct& a, const Disjunct& b) {
                                  return a.now == b.now && a.next == b.next;
                              }),
                  out.end());
        return expand_cache.emplace(f, std::move(out)).first->second;
    }
};

}  // namespace

Nba translate(const FormulaArena& arena, FormulaId f) {
    Translator tr{arena};
    // Force deterministic atom numbering: first-occurrence order in f.
    for (std::uint32_t a : collect_atoms(arena, f)) tr.atom_bit(a);

    std::map<std::vector<FormulaId>, int> state_id;
    std::vector<std::vector<FormulaId>> states;
    std::vector<int> work;
    auto intern_state = [&](std::vector<FormulaId> obligations) {
        auto it = state_id.find(obligations);
        if (it != state_id.end()) return it->second;
        int id = static_cast<int>(states.size());
        state_id.emplace(obligations, id);
        states.push_back(std::move(obligations));
        work.push_back(id);
        return id;
    };

    Nba nba;
    int init = intern_state(obligation_set(arena, f));
    nba.initial = {init};

    // Worklist construction.  For a state {g1..gk} the outgoing edges are
    // the consistent cross-products of the gi expansions.
    std::vector<std::map<int, Guard>> edges;  // per source: dst -> guard
    while (!work.empty()) {
        int q = work.back();
        work.pop_back();
        std::vector<Disjunct> combos{{Cube{}, {}}};
        bool dead = false;
        for (FormulaId g : states[q]) {
            const std::vector<Disjunct>& parts = tr.expand(g);
            std::vector<Disjunct> next_combos;
            for (const Disjunct& acc : combos)
                for (const Disjunct& p : parts) {
                    Cube c{acc.now.pos | p.now.pos, acc.now.neg | p.now.neg};
                    if (!c.consistent()) continue;
                    next_combos.push_back({c, merge_obligations(acc.next, p.next)});
                }
            combos = std::move(next_combos);
            if (combos.empty()) { dead = true; break; }
        }
        if (static_cast<std::size_t>(q) >= edges.size()) edges.resize(q + 1);
        if (dead) continue;
        for (const Disjunct& d : combos) {
            int dst = intern_state(d.next);
            if (static_cast<std::size_t>(q) >= edges.size()) edges.resize(q + 1);
            auto [it, inserted] = edges[q].try_emplace(dst, Guard({d.now}));
            if (!inserted) it->second = it->second.disjoin(Guard({d.now}));
        }
    }

    nba.num_states = static_cast<int>(states.size());
    nba.accepting.assign(nba.num_states, false);
    nba.out.resize(nba.num_states);
    edges.resize(nba.num_states);
    for (int q = 0; q < nba.num_states; ++q) {
        if (states[q].empty()) nba.accepting[q] = true;
        for (auto& [dst, g] : edges[q])
            if (g.satisfiable()) nba.out[q].push_back({dst, std::move(g)});
    }
    nba.atom_names = tr.atom_names;
    return nba;
}

bool accepts(const Nba& nba, const std::vector<Letter>& word) {
    Letter universe = nba.atom_universe_mask();
    for (Letter l : word)
        if (l & ~universe)
            throw Error(ErrorCode::Generic, "letter uses atoms outside the automaton");
    std::vector<bool> cur(nba.num_states, false);
    for (int q : nba.initial) cur[q] = true;
    for (Letter l : word) {
        std::vector<bool> nxt(nba.num_states, false);
        for (int q = 0; q < nba.num_states; ++q) {
            if (!cur[q]) continue;
            for (const auto& [dst, g] : nba.out[q])
                if (!nxt[dst] && g.eval(l)) nxt[dst] = true;
        }
        cur = std::move(nxt);
    }
    for (int q = 0; q < nba.num_states; ++q)
        if (cur[q] && nba.accepting[q]) return true;
    return false;
}

bool accepts_stutter(const Nba& nba, const std::vector<Letter>& word) {
    Letter universe = nba.atom_universe_mask();
    for (Letter l : word)
        if (l & ~universe)
            throw Error(ErrorCode::Generic, "letter uses atoms outside the automaton");
    std::vector<bool> cur(nba.num_states, false);
    for (int q : nba.initial) cur[q] = true;
    for (Letter l : word) {
        std::vector<bool> nxt(nba.num_states, false);
        // consume once, then close under further consumptions of l
        std::vector<int> stack;
        for (int q = 0; q < nba.num_states; ++q) {
            if (!cur[q]) continue;
            for (const auto& [dst, g] : nba.out[q])
                if (!nxt[dst] && g.eval(l)) { nxt[dst] = true; stack.push_back(dst); }
        }
        while (!stack.empty()) {
            int q = stack.back();
            stack.pop_back();
            for (const auto& [dst, g] : nba.out[q])
                if (!nxt[dst] && g.eval(l)) { nxt[dst] = true; stack.push_back(dst); }
        }
        cur = std::move(nxt);
    }
    for (int q = 0; q < nba.num_states; ++q)
        if (cur[q] && nba.accepting[q]) return true;
    return false;
}

}  // namespace mats

#include "mats/poset.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

namespace mats {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::vector<bool>> leq_closure(int n,
                                           const std::vector<std::pair<int, int>>& leq) {
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (auto [a, b] : leq) r[a][b] = true;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (r[i][k])
                for (int j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = true;
    return r;
}

std::vector<std::string> mask_to_names(const Nba& nba, Letter m) {
    std::vector<std::string> out;
    for (int b = 0; b < 64; ++b)
        if (m >> b & 1) out.push_back(nba.atom_names[b]);
    return out;
}

}  // namespace

PosetGraph poset_graph(const Poset& p) {
    int n = static_cast<int>(p.subtasks.size());
    auto closure = leq_closure(n, p.leq);
    PosetGraph g;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (!closure[a][b]) continue;
            bool covering = true;
            for (int c = 0; c < n && covering; ++c)
                if (c != a && c != b && closure[a][c] && closure[c][b]) covering = false;
            if (covering) g.edges.push_back({a, b});
        }
    g.opposed = p.opposed;
    std::vector<bool> has_pred(n, false);
    for (auto [a, b] : g.edges) has_pred[b] = true;
    for (int v = 0; v < n; ++v)
        if (!has_pred[v]) g.roots.push_back(v);
    return g;
}

bool word_satisfies(const Poset& p, const std::vector<double>& start,
                    const std::vector<double>& duration) {
    for (auto [a, b] : p.leq)
        if (start[a] > start[b]) return false;
    for (const auto& set : p.opposed) {
        bool ok = false;
        for (int a : set) {
            for (int b : set) {
                if (a == b) continue;
                if (start[a] + duration[a] < start[b]) { ok = true; break; }
            }
            if (ok) break;
        }
        if (!ok) return false;
    }
    return true;
}

std::vector<std::vector<Subtask>> decompose_run(const Nba& nba,
                                                const std::vector<int>& run,
                                                std::size_t cap,
                                                const ModelFilter& filter) {
    std::size_t steps = run.empty() ? 0 : run.size() - 1;
    std::vector<std::vector<Subtask>> variants{{}};
    for (std::size_t l = 0; l < steps; ++l) {
        int src = run[l], dst = run[l + 1];
        const Guard* g = nba.edge(src, dst);
        if (!g || !g->satisfiable())
            throw Error(ErrorCode::Generic, "run uses a missing transition");
        auto models = g->minimal_models();
        if (filter)
            models.erase(std::remove_if(models.begin(), models.end(),
                                        [&](const auto& m) { return !filter(m); }),
                         models.end());

        // Minimal waiting constraint of the source state's self-loop.
        bool has_selfloop = false;
        Guard::MinimalModel wait{};
        if (const Guard* sl = nba.edge(src, src); sl && sl->satisfiable()) {
            auto wm = sl->minimal_models();
            if (!wm.empty()) {
                has_selfloop = true;
                wait = wm.front();
                for (const auto& m : wm)
                    if (popcount64(m.pos) < popcount64(wait.pos) ||
                        (popcount64(m.pos) == popcount64(wait.pos) && m.pos < wait.pos))
                        wait = m;
            }
        }

        std::vector<std::vector<Subtask>> next;
        for (const auto& variant : variants) {
            for (const auto& m : models) {
                if (next.size() >= cap) break;
                Subtask st;
                st.pos_mask = m.pos;
                st.neg_mask = m.neg;
                st.positive = mask_to_names(nba, m.pos);
                st.negative = mask_to_names(nba, m.neg);
                st.has_selfloop = has_selfloop;
                if (has_selfloop) {
                    st.selfloop_pos_mask = wait.pos;
                    st.selfloop_neg_mask = wait.neg;
                    st.selfloop_pos = mask_to_names(nba, wait.pos);
                    st.selfloop_neg = mask_to_names(nba, wait.neg);
                }
                auto v = variant;
                v.push_back(std::move(st));
                next.push_back(std::move(v));
            }
            if (next.size() >= cap) break;
        }
        variants = std::move(next);
        if (variants.empty()) return variants;
    }
    return variants;
}

namespace {

// Enumerates leq-respecting index orders (lexicographically smallest first).
// Returns false when the cap was hit.
bool linear_extensions(int n, const std::vector<std::vector<bool>>& closure,
                       std::size_t cap, std::vector<std::vector<int>>& out) {
    std::vector<int> indeg(n, 0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b && closure[a][b]) ++indeg[b];
    std::vector<int> order;
    std::vector<bool> used(n, false);
    bool complete = true;
    std::function<void()> rec = [&]() {
        if (!complete) return;
        if (order.size() == static_cast<std::size_t>(n)) {
            if (out.size() >= cap) { complete = false; return; }
            out.push_back(order);
            return;
        }
        for (int v = 0; v < n; ++v) {
            if (used[v] || indeg[v] != 0) continue;
            used[v] = true;
            order.push_back(v);
            for (int w = 0; w < n; ++w)
                if (w != v && closure[v][w]) --indeg[w];
            rec();
            for (int w = 0; w < n; ++w)
                if (w != v && closure[v][w]) ++indeg[w];
            order.pop_back();
            used[v] = false;
            if (!complete) return;
        }
    };
    rec();
    return complete;
}

std::vector<Letter> word_letters(const std::vector<Subtask>& subtasks,
                                 const std::vector<int>& order) {
    std::vector<Letter> l;
    l.reserve(order.size());
    for (int i : order) l.push_back(subtasks[i].pos_mask);
    return l;
}

}  // namespace

CheckResult check_accepting(const Nba& nba, const Poset& p, std::size_t max_words) {
    int n = static_cast<int>(p.subtasks.size());
    auto closure = leq_closure(n, p.leq);
    for (int i = 0; i < n; ++i)
        if (closure[i][i]) return CheckResult::NotAccepting;  // cyclic "poset"
    std::vector<std::vector<int>> words;
    if (!linear_extensions(n, closure, max_words, words))
        return CheckResult::Indeterminate;
    for (const auto& w : words)
        if (!accepts_stutter(nba, word_letters(p.subtasks, w)))
            return CheckResult::NotAccepting;
    return CheckResult::Accepting;
}

namespace {

// Plain-acceptance witness: for each word position, the automaton state the
// accepting run leaves when consuming that letter.  Used to intersect
// self-loop constraints across the poset language.
bool witness_sources(const Nba& nba, const std::vector<Letter>& letters,
                     std::vector<int>& sources) {
    std::size_t L = letters.size();
    std::vector<std::vector<int>> parent(L + 1, std::vector<int>(nba.num_states, -2));
    for (int q : nba.initial) parent[0][q] = -1;
    for (std::size_t i = 0; i < L; ++i) {
        for (int q = 0; q < nba.num_states; ++q) {
            if (parent[i][q] == -2) continue;
            for (const auto& [dst, g] : nba.out[q])
                if (parent[i + 1][dst] == -2 && g.eval(letters[i]))
                    parent[i + 1][dst] = q;
        }
    }
    int fin = -1;
    for (int q = 0; q < nba.num_states; ++q)
        if (parent[L][q] != -2 && nba.accepting[q]) { fin = q; break; }
    if (fin < 0) return false;
    sources.assign(L, -1);
    int cur = fin;
    for (std::size_t i = L; i > 0; --i) {
        sources[i - 1] = parent[i][cur];
        cur = parent[i][cur];
    }
    return true;
}

struct Miner {
    const Nba& nba;
    const ComputePosetsOptions& opts;
    Clock::time_point deadline;
    std::set<std::vector<Letter>> global_words;
    std::vector<Poset> posets;
    bool stop = false;

    bool out_of_time() const { return Clock::now() >= deadline; }

    bool accepted(std::map<std::vector<int>, bool>& cache,
                  const std::vector<Subtask>& subtasks, const std::vector<int>& w) {
        auto it = cache.find(w);
        if (it != cache.end()) return it->second;
        bool r = accepts_stutter(nba, word_letters(subtasks, w));
        cache.emplace(w, r);
        return r;
    }

    void process_variant(const std::vector<int>& run, std::vector<Subtask> subtasks) {
        int n = static_cast<int>(subtasks.size());
        if (n == 0) return;
        std::vector<int> base(n);
        for (int i = 0; i < n; ++i) base[i] = i;
        if (global_words.count(word_letters(subtasks, base))) return;

        std::map<std::vector<int>, bool> cache;
        cache[base] = true;  // the decomposed run's own word is accepting

        // Adjacent-swap relaxation (queue closure).
        std::set<std::vector<int>> language{base};
        std::vector<std::vector<int>> queue{base};
        std::set<std::pair<int, int>> relaxed, confirmed;  // I1, I2
        bool capped = false;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            if (out_of_time()) { capped = true; break; }  // fallback, stay sound
            std::vector<int> w = queue[qi];
            for (int i = 0; i + 1 < n; ++i) {
                std::pair<int, int> pair{w[i], w[i + 1]};
                std::swap(w[i], w[i + 1]);
                if (accepted(cache, subtasks, w)) {
                    relaxed.insert(pair);
                    if (!language.count(w)) {
                        if (language.size() >= opts.max_words) capped = true;
                        else {
                            language.insert(w);
                            queue.push_back(w);
                        }
                    }
                } else {
                    confirmed.insert(pair);
                }
                std::swap(w[i], w[i + 1]);
            }
            if (capped) break;
        }

        std::vector<std::pair<int, int>> leq;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                std::pair<int, int> pr{a, b};
                bool removed = relaxed.count(pr) && !confirmed.count(pr);
                if (!removed) leq.push_back(pr);
            }

        // Opposed sets: a candidate stays opposed unless the base word with
        // the members merged into one union letter is still accepting.
        std::vector<std::vector<int>> opposed;
        int arity = std::min(opts.opposed_arity, n);
        std::vector<int> members;
        std::function<void(int)> gen = [&](int from) {
            if (static_cast<int>(members.size()) >= 2) {
                Letter uni = 0;
                for (int m : members) uni |= subtasks[m].pos_mask;
                std::vector<Letter> letters;
                bool first = true;
                for (int i = 0; i < n; ++i) {
                    if (std::find(members.begin(), members.end(), i) != members.end()) {
                        if (first) { letters.push_back(uni); first = false; }
                        continue;
                    }
                    letters.push_back(subtasks[i].pos_mask);
                }
                if (!accepts_stutter(nba, letters)) opposed.push_back(members);
            }
            if (static_cast<int>(members.size()) >= arity) return;
            for (int v = from; v < n; ++v) {
                members.push_back(v);
                gen(v + 1);
                members.pop_back();
            }
        };
        gen(0);
        // Drop supersets of retained sets (their constraint is implied).
        std::vector<std::vector<int>> minimal;
        for (const auto& s : opposed) {
            bool redundant = false;
            for (const auto& t : opposed) {
                if (t.size() >= s.size() || t == s) continue;
                if (std::includes(s.begin(), s.end(), t.begin(), t.end())) {
                    redundant = true;
                    break;
                }
            }
            if (!redundant) minimal.push_back(s);
        }

        Poset p;
        p.subtasks = std::move(subtasks);
        p.leq = std::move(leq);
        p.opposed = std::move(minimal);
        p.source_run = run;

        // Verify Lemma-1 style soundness on the final relations; fall back
        // to the total order of the seed run when relaxation overshot.
        auto closure = leq_closure(n, p.leq);
        std::vector<std::vector<int>> words;
        bool complete = !capped && linear_extensions(n, closure, opts.max_words, words);
        bool sound = complete;
        if (complete)
            for (const auto& w : words)
                if (!accepted(cache, p.subtasks, w)) { sound = false; break; }
        if (!sound) {
            p.leq.clear();
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b) p.leq.push_back({a, b});
            words.assign(1, base);
        }
        p.language_size = words.size();

        // Disjointness across posets: skip the variant when any word of its
        // language is already covered.
        std::vector<std::vector<Letter>> letter_seqs;
        letter_seqs.reserve(words.size());
        for (const auto& w : words) {
            auto ls = word_letters(p.subtasks, w);
            if (global_words.count(ls)) return;
            letter_seqs.push_back(std::move(ls));
        }

        // Weaken self-loop constraints to what every word of the language
        // actually needs (intersection over witness runs).
        if (words.size() <= 2000) {
            std::vector<Letter> ipos(n, ~0ull), ineg(n, ~0ull);
            bool all_witnessed = true;
            for (const auto& w : words) {
                std::vector<int> sources;
                if (!witness_sources(nba, word_letters(p.subtasks, w), sources)) {
                    all_witnessed = false;
                    break;
                }
                for (int i = 0; i < n; ++i) {
                    int src = sources[i];
                    int subtask = w[i];
                    Letter wp = 0, wn = 0;
                    if (const Guard* sl = nba.edge(src, src); sl && sl->satisfiable()) {
                        auto wm = sl->minimal_models();
                        if (!wm.empty()) {
                            auto best = wm.front();
                            for (const auto& m : wm)
                                if (popcount64(m.pos) < popcount64(best.pos) ||
                                    (popcount64(m.pos) == popcount64(best.pos) &&
                                     m.pos < best.pos))
                                    best = m;
                            wp = best.pos;
                            wn = best.neg;
                        }
                    }
                    ipos[subtask] &= wp;
                    ineg[subtask] &= wn;
                }
            }
            if (all_witnessed) {
                for (int i = 0; i < n; ++i) {
                    Subtask& st = p.subtasks[i];
                    st.selfloop_pos_mask &= ipos[i];
                    st.selfloop_neg_mask &= ineg[i];
                    st.selfloop_pos = mask_to_names(nba, st.selfloop_pos_mask);
                    st.selfloop_neg = mask_to_names(nba, st.selfloop_neg_mask);
                }
            }
        }

        p.id = static_cast<int>(posets.size());
        for (auto& ls : letter_seqs) global_words.insert(std::move(ls));
        posets.push_back(std::move(p));
        if (opts.on_poset && !opts.on_poset(posets.back())) stop = true;
        if (posets.size() >= opts.max_posets) stop = true;
    }

    void process_run(const std::vector<int>& run) {
        for (auto& variant :
             decompose_run(nba, run, opts.variant_cap, opts.model_filter)) {
            if (stop || out_of_time()) return;
            process_variant(run, std::move(variant));
        }
    }
};

}  // namespace

std::vector<Poset> compute_posets(const Nba& nba, const ComputePosetsOptions& opts) {
    Miner miner{nba, opts,
                Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(opts.budget_seconds))};

    // Edges whose every minimal model is filtered out cannot be walked.
    auto usable = [&](const Guard& g) {
        if (!opts.model_filter) return true;
        try {
            for (const auto& m : g.minimal_models())
                if (opts.model_filter(m)) return true;
            return false;
        } catch (const Error&) {
            return true;  // support too wide to enumerate; let the run try
        }
    };

    // Distance to acceptance steers the DFS toward short accepting runs.
    int n = nba.num_states;
    std::vector<int> dist(n, n + 1);
    {
        std::vector<std::vector<int>> rev(n);
        for (int q = 0; q < n; ++q)
            for (const auto& [dst, g] : nba.out[q])
                if (usable(g)) rev[dst].push_back(q);
        std::vector<int> frontier;
        for (int q = 0; q < n; ++q)
            if (nba.accepting[q]) { dist[q] = 0; frontier.push_back(q); }
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            int q = frontier[i];
            for (int src : rev[q])
                if (dist[src] > dist[q] + 1) {
                    dist[src] = dist[q] + 1;
                    frontier.push_back(src);
                }
        }
    }

    std::vector<std::vector<int>> succ(n);
    for (int q = 0; q < n; ++q) {
        for (const auto& [dst, g] : nba.out[q])
            if (dst != q && dist[dst] <= n && usable(g)) succ[q].push_back(dst);
        std::sort(succ[q].begin(), succ[q].end(),
                  [&](int a, int b) { return dist[a] != dist[b] ? dist[a] < dist[b] : a < b; });
    }

    // Iterative DFS over simple paths; a path is yielded when it reaches an
    // accepting state and is not extended past it (co-safe tasks).
    std::vector<bool> on_path(n, false);
    for (int init : nba.initial) {
        if (miner.stop || miner.out_of_time()) break;
        if (dist[init] > n) continue;
        std::vector<int> path{init};
        std::vector<std::size_t> next_child{0};
        on_path[init] = true;
        if (nba.accepting[init]) {
            // Empty word satisfies the task; nothing to schedule from here,
            // but other initial states may still need work.
            on_path[init] = false;
            continue;
        }
        while (!path.empty()) {
            if (miner.stop || miner.out_of_time()) break;
            int q = path.back();
            if (next_child.back() >= succ[q].size()) {
                on_path[q] = false;
                path.pop_back();
                next_child.pop_back();
                continue;
            }
            int dst = succ[q][next_child.back()++];
            if (on_path[dst]) continue;
            path.push_back(dst);
            if (nba.accepting[dst]) {
                miner.process_run(path);
                path.pop_back();
                continue;
            }
            on_path[dst] = true;
            next_child.push_back(0);
        }
        for (int q : path) on_path[q] = false;
    }
    return std::move(miner.posets);
}

}  // namespace mats

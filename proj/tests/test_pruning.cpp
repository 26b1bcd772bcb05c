#include "doctest.h"

#include "mats/pruning.hpp"
#include "support/testkit.hpp"

using namespace mats;
using testkit::Rng;
using testkit::TableAut;

namespace {

Nba prune_stages(const Nba& in, const Scenario& s, PruneReport* rep = nullptr) {
    Nba a = prune_infeasible(in, s, rep);
    a = prune_invalid_states(a, rep);
    a = prune_decomposable(a, rep);
    return prune_invalid_states(a, rep);
}

bool letter_feasible(const Nba& nba, Letter l, const Scenario& s) {
    for (std::size_t i = 0; i < nba.atom_names.size(); ++i)
        if ((l >> i & 1) && !atom_feasible(ground_atom(nba.atom_names[i], s), s))
            return false;
    return true;
}

}  // namespace

TEST_CASE("pruning is sound and complete up to stuttering (randomized)") {
    Rng rng(5001);
    for (int it = 0; it < 80; ++it) {
        Scenario team = testkit::random_team(rng);
        auto atoms = testkit::random_atom_universe(rng);
        Nba b = testkit::random_nba(atoms, 8, rng);
        Nba bp = prune_stages(b, team);

        TableAut tb = TableAut::build(b);
        TableAut tp = TableAut::build(bp);

        // soundness: L(B-) subset of L(B), exact over all word lengths
        std::vector<int> witness;
        CHECK_MESSAGE(testkit::contained_in(tp, tb, &witness),
                      "iteration " << it << " witness length " << witness.size());

        // completeness: every team-feasible accepted word of B up to length 3
        // has a stutter expansion accepted by B-
        std::vector<int> w;
        auto rec = [&](auto&& self, int depth) -> void {
            if (tb.accepts(w)) {
                bool feasible = true;
                for (int l : w)
                    if (!letter_feasible(b, static_cast<Letter>(l), team))
                        feasible = false;
                if (feasible) CHECK(tp.accepts_stutter(w));
            }
            if (depth == 0) return;
            for (int l = 0; l < tb.letters; ++l) {
                w.push_back(l);
                self(self, depth - 1);
                w.pop_back();
            }
        };
        rec(rec, 3);
    }
}

TEST_CASE("prune_infeasible restricts guards to generatable minterms") {
    Scenario s = load_scenario(R"({
        "regions": ["b", "r1", "r2"],
        "behaviors": [],
        "agents": [{"id": "g", "type": "t", "initial": "b",
                    "local_actions": {"a": 1.0, "b": 1.0}, "collab_actions": []}],
        "distances": {"t": {"b,r1": 3.0}}
    })");
    // r2 unreachable: every b_r2 minterm dies, a_r1 survives
    Nba n;
    n.atom_names = {"a_r1", "b_r2"};
    n.num_states = 2;
    n.initial = {0};
    n.accepting = {false, true};
    n.out.resize(2);
    n.edge_ref(0, 1) = Guard({Cube{0b01, 0}, Cube{0b10, 0}});  // a_r1 | b_r2
    n.edge_ref(1, 1) = Guard::truth();

    PruneReport rep;
    Nba p = prune_infeasible(n, s, &rep);
    const Guard* g = p.edge(0, 1);
    REQUIRE(g != nullptr);
    CHECK(g->eval(0b01));
    CHECK(!g->eval(0b10));
    CHECK(!g->eval(0b11));  // letters containing the infeasible atom die too

    // an edge whose guard requires the infeasible atom disappears
    Nba n2 = n;
    n2.out[0].clear();
    n2.edge_ref(0, 1) = Guard({Cube{0b10, 0}});
    Nba p2 = prune_infeasible(n2, s, &rep);
    CHECK(p2.edge(0, 1) == nullptr);
}

TEST_CASE("prune_invalid_states trims and renumbers") {
    Nba n;
    n.atom_names = {"p"};
    n.num_states = 4;  // 0 -> 1 -> 2(acc); 3 unreachable; 1 also -> 3? no
    n.initial = {0};
    n.accepting = {false, false, true, false};
    n.out.resize(4);
    n.edge_ref(0, 1) = Guard::truth();
    n.edge_ref(1, 2) = Guard({Cube{1, 0}});
    n.edge_ref(2, 2) = Guard::truth();
    n.edge_ref(0, 3) = Guard::truth();  // 3 is a dead end
    PruneReport rep;
    Nba p = prune_invalid_states(n, &rep);
    CHECK(p.num_states == 3);
    CHECK(rep.invalid_states_removed == 1);
    CHECK(p.initial == std::vector<int>{0});
    int n_acc = 0;
    for (int q = 0; q < p.num_states; ++q) n_acc += p.accepting[q];
    CHECK(n_acc == 1);
    CHECK(p.edge_count() == 3);
    // language unchanged
    CHECK(accepts(p, {0, 1}));
    CHECK(!accepts(p, {0, 0}));
}

TEST_CASE("prune_decomposable removes a shortcut covered by a detour") {
    // 0 --p&q--> 2(acc), with detour 0 --p--> 1 --q--> 2 where the letter
    // p&q also drives both detour legs
    Nba n;
    n.atom_names = {"p", "q"};
    n.num_states = 3;
    n.initial = {0};
    n.accepting = {false, false, true};
    n.out.resize(3);
    n.edge_ref(0, 1) = Guard({Cube{0b01, 0}});        // p
    n.edge_ref(1, 2) = Guard({Cube{0b10, 0}});        // q
    n.edge_ref(0, 2) = Guard({Cube{0b11, 0}});        // p & q
    n.edge_ref(2, 2) = Guard::truth();
    PruneReport rep;
    Nba p = prune_decomposable(n, &rep);
    CHECK(rep.decomposable_edges_removed == 1);
    CHECK(p.edge(0, 2) == nullptr);
    // the direct word survives via stuttering
    CHECK(!accepts(p, {0b11}));
    CHECK(accepts_stutter(p, {0b11}));
}

TEST_CASE("stutter-unsafe shortcuts are kept") {
    // detour exists but the shortcut letter does not drive the second leg:
    // removing 0->2 would lose the word (p&q)
    Nba n;
    n.atom_names = {"p", "q"};
    n.num_states = 3;
    n.initial = {0};
    n.accepting = {false, false, true};
    n.out.resize(3);
    n.edge_ref(0, 1) = Guard({Cube{0b01, 0}});            // p
    n.edge_ref(1, 2) = Guard({Cube{0b10, 0b01}});         // q & !p
    n.edge_ref(0, 2) = Guard({Cube{0b11, 0}});            // p & q
    n.edge_ref(2, 2) = Guard::truth();
    PruneReport rep;
    Nba p = prune_decomposable(n, &rep);
    CHECK(p.edge(0, 2) != nullptr);
    CHECK(accepts_stutter(p, {0b11}));
}

TEST_CASE("full prune pipeline error taxonomy") {
    Scenario s = load_scenario(R"({
        "regions": ["b", "r1", "far"],
        "behaviors": [],
        "agents": [{"id": "g", "type": "t", "initial": "b",
                    "local_actions": {"a": 1.0}, "collab_actions": []}],
        "distances": {"t": {"b,r1": 3.0}}
    })");

    Nba dead;  // no accepting path at all
    dead.atom_names = {"a_r1"};
    dead.num_states = 2;
    dead.initial = {0};
    dead.accepting = {false, false};
    dead.out.resize(2);
    dead.edge_ref(0, 1) = Guard::truth();
    PruneReport rep;
    try {
        prune(dead, s, rep);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Unsatisfiable);
    }

    Nba blocked;  // satisfiable, but the only path needs an unreachable region
    blocked.atom_names = {"a_far"};
    blocked.num_states = 2;
    blocked.initial = {0};
    blocked.accepting = {false, true};
    blocked.out.resize(2);
    blocked.edge_ref(0, 1) = Guard({Cube{1, 0}});
    blocked.edge_ref(1, 1) = Guard::truth();
    try {
        prune(blocked, s, rep);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InfeasibleForTeam);
    }
}

TEST_CASE("prune reports consistent counters") {
    Rng rng(5002);
    int succeeded = 0;
    for (int it = 0; it < 60; ++it) {
        Scenario team = testkit::random_team(rng);
        Nba b = testkit::random_nba(testkit::random_atom_universe(rng), 6, rng);
        PruneReport rep;
        Nba p;
        try {
            p = prune(b, team, rep);
        } catch (const Error& e) {
            CHECK((e.code() == ErrorCode::Unsatisfiable ||
                   e.code() == ErrorCode::InfeasibleForTeam));
            continue;
        }
        ++succeeded;
        CHECK(rep.states_before == static_cast<std::size_t>(b.num_states));
        CHECK(rep.edges_before == b.edge_count());
        CHECK(rep.edges_after == p.edge_count());
        CHECK(rep.states_after == static_cast<std::size_t>(p.num_states));
        CHECK(rep.edges_after <= rep.edges_before);
        CHECK(rep.edge_reduction() >= 0.0);
        CHECK(rep.edge_reduction() <= 1.0);
    }
    CHECK(succeeded > 0);
}

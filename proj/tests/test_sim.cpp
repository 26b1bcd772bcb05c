#include "doctest.h"

#include <cmath>

#include "mats/fixtures.hpp"
#include "mats/oracle.hpp"
#include "mats/pruning.hpp"
#include "mats/sim.hpp"
#include "support/testkit.hpp"

using namespace mats;

namespace {

struct Mission {
    Scenario scenario;
    GroundedPoset gp;
    Schedule plan;
};

Mission toy_mission(const std::string& ltl) {
    Mission m;
    m.scenario = load_scenario(fixtures::slurp("toy_2x2.json"));
    FormulaArena a;
    FormulaId f = to_pnf(a, parse_formula(a, ltl));
    PruneReport rep;
    Nba pruned = prune(translate(a, f), m.scenario, rep);
    PlanOptions opts;
    opts.budget_poset_seconds = 5.0;
    opts.budget_bnb_seconds = 10.0;
    PlanResult res = plan(pruned, m.scenario, opts);
    m.gp = ground_poset(res.posets[res.best_poset], m.scenario);
    m.plan = *res.best;
    return m;
}

std::size_t analytic_messages(const GroundedPoset& gp) {
    std::size_t n = gp.poset.leq.size();
    for (const auto& set : gp.poset.opposed) n += 2 * set.size();
    return n;
}

int agent_index(const Scenario& s, const std::string& id) {
    for (std::size_t i = 0; i < s.agents.size(); ++i)
        if (s.agents[i].id == id) return static_cast<int>(i);
    return -1;
}

}  // namespace

TEST_CASE("noiseless execution reproduces the schedule") {
    Mission m = toy_mission(fixtures::slurp("phi4.ltl"));
    SimOptions so;
    Trace t = simulate(m.gp, m.plan, so);
    REQUIRE(t.start.size() == m.plan.start.size());
    for (std::size_t i = 0; i < t.start.size(); ++i) {
        CHECK(t.start[i] == doctest::Approx(m.plan.start[i]).epsilon(1e-3));
        CHECK(t.finish[i] ==
              doctest::Approx(m.plan.start[i] + m.plan.duration[i]).epsilon(1e-3));
    }
    CHECK(t.makespan == doctest::Approx(m.plan.makespan).epsilon(1e-3));
    CHECK(word_satisfies(m.gp.poset, t.start, [&] {
        std::vector<double> d(t.start.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = t.finish[i] - t.start[i];
        return d;
    }()));
    CHECK(t.replans.empty());
}

TEST_CASE("message counts are analytic") {
    Mission m = toy_mission(fixtures::slurp("phi4.ltl"));
    SimOptions so;
    so.noise = 0.3;
    so.seed = 42;
    Trace t = simulate(m.gp, m.plan, so);
    CHECK(t.leq_msgs == m.gp.poset.leq.size());
    std::size_t opp = 0;
    for (const auto& set : m.gp.poset.opposed) opp += 2 * set.size();
    CHECK(t.opposed_msgs == opp);
    CHECK(t.leq_msgs + t.opposed_msgs == analytic_messages(m.gp));
    std::size_t sync = 0;
    for (std::size_t i = 0; i < m.gp.reqs.size(); ++i)
        if (m.gp.reqs[i].participants > 1) sync += m.gp.reqs[i].participants - 1;
    CHECK(t.sync_msgs == sync);
}

TEST_CASE("noisy executions stay valid and reproducible") {
    Mission m = toy_mission(fixtures::slurp("phi4.ltl"));
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        SimOptions so;
        so.noise = 0.5;
        so.seed = seed;
        Trace t = simulate(m.gp, m.plan, so);
        std::vector<double> dur(t.start.size());
        for (std::size_t i = 0; i < dur.size(); ++i)
            dur[i] = t.finish[i] - t.start[i];
        CHECK(word_satisfies(m.gp.poset, t.start, dur));
        CHECK(!t.word.empty());

        Trace again = simulate(m.gp, m.plan, so);
        CHECK(again.makespan == doctest::Approx(t.makespan));
        CHECK(again.events.size() == t.events.size());
    }
}

TEST_CASE("induced word is accepted by the task automaton") {
    Scenario s = load_scenario(fixtures::slurp("toy_2x2.json"));
    FormulaArena a;
    FormulaId f = to_pnf(a, parse_formula(a, fixtures::slurp("phi4.ltl")));
    PruneReport rep;
    Nba pruned = prune(translate(a, f), s, rep);
    PlanOptions opts;
    opts.budget_poset_seconds = 5.0;
    opts.budget_bnb_seconds = 10.0;
    PlanResult res = plan(pruned, s, opts);
    GroundedPoset gp = ground_poset(res.posets[res.best_poset], s);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SimOptions so;
        so.noise = 0.4;
        so.seed = seed;
        Trace t = simulate(gp, *res.best, so);
        CHECK(accepts_stutter(pruned, t.word));
    }
}

TEST_CASE("failure of a redundant agent is absorbed by re-planning") {
    Mission m = toy_mission("F mark_r1 && F mark_r3");
    int a2 = agent_index(m.scenario, "a2");
    REQUIRE(a2 >= 0);
    SimOptions so;
    so.failures = {{a2, 0.0}};
    Trace t = simulate(m.gp, m.plan, so);
    REQUIRE(t.replans.size() == 1);
    CHECK(t.replans[0].spent < 5.0);
    for (std::size_t i = 0; i < t.finish.size(); ++i) CHECK(t.finish[i] > 0.0);

    // the replanned mission is optimal for the residual instance
    auto residual = ground_poset(m.gp.poset, m.scenario, {a2});
    auto opt = exact_optimum(residual);
    REQUIRE(opt.has_value());
    CHECK(std::abs(t.makespan - *opt) < 1e-3);
}

TEST_CASE("failure of the only capable agent is irrecoverable") {
    Mission m = toy_mission(fixtures::slurp("phi4.ltl"));  // act1 needs a1
    int a1 = agent_index(m.scenario, "a1");
    SimOptions so;
    so.failures = {{a1, 0.0}};
    try {
        simulate(m.gp, m.plan, so);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IrrecoverableFailure);
    }
}

TEST_CASE("late failure keeps completed history intact") {
    Mission m = toy_mission("F mark_r1 && F mark_r3");
    SimOptions so;
    Trace clean = simulate(m.gp, m.plan, so);
    // fail whichever agent finishes a task first, right after that finish
    double first_finish = 1e18;
    int first_task = -1;
    for (std::size_t i = 0; i < clean.finish.size(); ++i)
        if (clean.finish[i] < first_finish) {
            first_finish = clean.finish[i];
            first_task = static_cast<int>(i);
        }
    REQUIRE(first_task >= 0);
    int a2 = agent_index(m.scenario, "a2");
    so.failures = {{a2, first_finish + 0.5}};
    Trace t = simulate(m.gp, m.plan, so);
    for (std::size_t i = 0; i < t.finish.size(); ++i) CHECK(t.finish[i] > 0.0);
    std::vector<double> dur(t.start.size());
    for (std::size_t i = 0; i < dur.size(); ++i) dur[i] = t.finish[i] - t.start[i];
    CHECK(word_satisfies(m.gp.poset, t.start, dur));
}

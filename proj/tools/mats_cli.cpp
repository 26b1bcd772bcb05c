// Command-line front end: translate / prune / posets / plan / simulate /
// oracle over scenario JSON + sc-LTL task files.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mats/fixtures.hpp"
#include "mats/hoa.hpp"
#include "mats/oracle.hpp"
#include "mats/planner.hpp"
#include "mats/sim.hpp"

using nlohmann::json;
using namespace mats;

namespace {

std::string slurp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Generic, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw Error(ErrorCode::Generic, "cannot write " + out);
    f << text;
}

Nba translated(const std::string& ltl) {
    FormulaArena arena;
    FormulaId f = parse_formula(arena, ltl);
    return translate(arena, to_pnf(arena, f));
}

json poset_json(const Poset& p) {
    json jp;
    jp["id"] = p.id;
    jp["language_size"] = p.language_size;
    jp["subtasks"] = json::array();
    for (const Subtask& st : p.subtasks)
        jp["subtasks"].push_back({{"positive", st.positive},
                                  {"negative", st.negative},
                                  {"selfloop_pos", st.selfloop_pos},
                                  {"selfloop_neg", st.selfloop_neg}});
    jp["leq"] = json::array();
    for (auto [a, b] : p.leq) jp["leq"].push_back({a, b});
    jp["opposed"] = p.opposed;
    return jp;
}

std::string poset_dot(const Poset& p) {
    PosetGraph g = poset_graph(p);
    std::ostringstream dot;
    dot << "digraph poset {\n  rankdir=LR;\n";
    for (std::size_t i = 0; i < p.subtasks.size(); ++i) {
        std::string label;
        for (const std::string& a : p.subtasks[i].positive)
            label += (label.empty() ? "" : "&") + a;
        dot << "  s" << i << " [label=\"" << i << ": " << label << "\"];\n";
    }
    for (auto [a, b] : g.edges) dot << "  s" << a << " -> s" << b << ";\n";
    for (std::size_t k = 0; k < g.opposed.size(); ++k)
        for (std::size_t i = 0; i + 1 < g.opposed[k].size(); ++i)
            dot << "  s" << g.opposed[k][i] << " -> s" << g.opposed[k][i + 1]
                << " [dir=none style=dashed label=\"!=" << k << "\"];\n";
    dot << "}\n";
    return dot.str();
}

json report_json(const PruneReport& r) {
    return {{"states_before", r.states_before},
            {"edges_before", r.edges_before},
            {"states_after", r.states_after},
            {"edges_after", r.edges_after},
            {"infeasible_edges_removed", r.infeasible_edges_removed},
            {"decomposable_edges_removed", r.decomposable_edges_removed},
            {"invalid_states_removed", r.invalid_states_removed},
            {"edge_reduction", r.edge_reduction()}};
}

json plan_json(const PlanResult& res, const Scenario& sc, const GroundedPoset& gp) {
    json j;
    j["poset_id"] = res.best_poset;
    j["makespan"] = res.makespan;
    j["subtasks"] = json::array();
    const Schedule& s = *res.best;
    for (std::size_t i = 0; i < gp.poset.subtasks.size(); ++i) {
        json st;
        st["id"] = i;
        st["positive"] = gp.poset.subtasks[i].positive;
        st["region"] = sc.region_names[gp.reqs[i].region];
        st["start"] = s.start[i];
        st["duration"] = s.duration[i];
        json members = json::array();
        if (s.coalition_choice[i] >= 0)
            for (int m : gp.coalitions[i][s.coalition_choice[i]].members)
                members.push_back(sc.agents[m].id);
        st["agents"] = members;
        j["subtasks"].push_back(st);
    }
    j["history"] = json::array();
    for (auto [t, mk] : res.history) j["history"].push_back({{"t", t}, {"makespan", mk}});
    j["stats"] = {{"visited", res.stats.visited},
                  {"generated", res.stats.generated},
                  {"pruned", res.stats.pruned}};
    return j;
}

std::string gantt_csv(const Schedule& s, const Scenario& sc, const GroundedPoset& gp) {
    std::ostringstream csv;
    csv << "agent,subtask,region,start,finish\n";
    for (std::size_t a = 0; a < s.agent_seq.size(); ++a)
        for (int st : s.agent_seq[a])
            csv << sc.agents[a].id << "," << st << ","
                << sc.region_names[gp.reqs[st].region] << "," << s.start[st] << ","
                << s.start[st] + s.duration[st] << "\n";
    return csv.str();
}

json trace_json(const Trace& tr, const Scenario& sc) {
    static const char* kinds[] = {"arrive", "start_msg", "stop_msg",
                                  "begin",  "end",       "failure"};
    json j;
    j["makespan"] = tr.makespan;
    j["messages"] = {{"leq", tr.leq_msgs},
                     {"opposed", tr.opposed_msgs},
                     {"sync", tr.sync_msgs}};
    j["events"] = json::array();
    for (const SimEvent& e : tr.events) {
        json je{{"t", e.t}, {"kind", kinds[static_cast<int>(e.kind)]}};
        if (e.agent >= 0) je["agent"] = sc.agents[e.agent].id;
        if (e.subtask >= 0) je["subtask"] = e.subtask;
        j["events"].push_back(je);
    }
    j["replans"] = json::array();
    for (const ReplanRecord& r : tr.replans)
        j["replans"].push_back(
            {{"at", r.at}, {"seconds", r.spent}, {"makespan", r.makespan}});
    j["subtasks"] = json::array();
    for (std::size_t i = 0; i < tr.start.size(); ++i)
        j["subtasks"].push_back({{"start", tr.start[i]}, {"finish", tr.finish[i]}});
    return j;
}

int exit_code(const Error& e) {
    switch (e.code()) {
        case ErrorCode::Unsatisfiable: return 2;
        case ErrorCode::InfeasibleForTeam: return 3;
        case ErrorCode::BudgetExhausted: return 4;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scheduling of collaborative sc-LTL tasks"};
    app.require_subcommand(1);

    std::string ltl, ltl_file, scenario_file, hoa_in, out, gantt, failures_arg;
    double budget_poset = 30, budget_bnb = 60, noise = 0;
    std::uint64_t seed = 0;
    std::string lb_mode = "min";
    int opposed_arity = 3, jobs = 1;
    bool dot = false;

    auto add_task_opts = [&](CLI::App* c) {
        c->add_option("--ltl", ltl, "task formula text");
        c->add_option("--ltl-file", ltl_file, "task formula file");
        c->add_option("-o,--out", out, "output file (default stdout)");
    };

    auto* t_cmd = app.add_subcommand("translate", "sc-LTL to HOA");
    add_task_opts(t_cmd);

    auto* pr_cmd = app.add_subcommand("prune", "team-aware automaton pruning");
    add_task_opts(pr_cmd);
    pr_cmd->add_option("--hoa", hoa_in, "input automaton instead of a formula");
    pr_cmd->add_option("--scenario", scenario_file, "scenario JSON")->required();

    auto* po_cmd = app.add_subcommand("posets", "mine task posets");
    add_task_opts(po_cmd);
    po_cmd->add_option("--scenario", scenario_file, "prune against this team first");
    po_cmd->add_option("--budget-poset", budget_poset, "mining budget [s]");
    po_cmd->add_option("--opposed-arity", opposed_arity, "largest opposed set");
    po_cmd->add_flag("--dot", dot, "emit graphviz instead of JSON");

    auto* pl_cmd = app.add_subcommand("plan", "full pipeline to a schedule");
    add_task_opts(pl_cmd);
    pl_cmd->add_option("--scenario", scenario_file, "scenario JSON")->required();
    pl_cmd->add_option("--budget-poset", budget_poset, "mining budget [s]");
    pl_cmd->add_option("--budget-bnb", budget_bnb, "search budget [s]");
    pl_cmd->add_option("--lb-mode", lb_mode, "min|max combination of T1,T2")
        ->check(CLI::IsMember({"min", "max"}));
    pl_cmd->add_option("--opposed-arity", opposed_arity, "largest opposed set");
    pl_cmd->add_option("--jobs", jobs, "posets searched in parallel");
    pl_cmd->add_option("--gantt", gantt, "also write a gantt CSV");

    auto* si_cmd = app.add_subcommand("simulate", "plan, then execute with noise");
    add_task_opts(si_cmd);
    si_cmd->add_option("--scenario", scenario_file, "scenario JSON")->required();
    si_cmd->add_option("--budget-poset", budget_poset, "mining budget [s]");
    si_cmd->add_option("--budget-bnb", budget_bnb, "search budget [s]");
    si_cmd->add_option("--seed", seed, "noise seed");
    si_cmd->add_option("--noise", noise, "duration noise amplitude, e.g. 0.5");
    si_cmd->add_option("--failures", failures_arg,
                       "agent failures as id:time[,id:time...]");

    auto* or_cmd = app.add_subcommand("oracle", "exact optimum (small instances)");
    add_task_opts(or_cmd);
    or_cmd->add_option("--scenario", scenario_file, "scenario JSON")->required();
    or_cmd->add_option("--budget-poset", budget_poset, "mining budget [s]");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!ltl_file.empty()) ltl = slurp_file(ltl_file);

        if (t_cmd->parsed()) {
            emit(out, export_hoa_string(translated(ltl)));
            return 0;
        }

        Scenario sc = load_scenario(slurp_file(scenario_file));

        if (pr_cmd->parsed()) {
            Nba in = hoa_in.empty() ? translated(ltl) : import_hoa_file(hoa_in);
            PruneReport rep;
            Nba pruned = prune(in, sc, rep);
            json j = report_json(rep);
            j["hoa"] = export_hoa_string(pruned);
            emit(out, j.dump(2) + "\n");
            return 0;
        }

        PruneReport rep;
        Nba pruned = prune(translated(ltl), sc, rep);

        if (po_cmd->parsed()) {
            ComputePosetsOptions po;
            po.budget_seconds = budget_poset;
            po.opposed_arity = opposed_arity;
            auto posets = compute_posets(pruned, po);
            if (dot) {
                std::string all;
                for (const Poset& p : posets) all += poset_dot(p);
                emit(out, all);
            } else {
                json j = json::array();
                for (const Poset& p : posets) j.push_back(poset_json(p));
                emit(out, j.dump(2) + "\n");
            }
            return 0;
        }

        PlanOptions opts;
        opts.budget_poset_seconds = budget_poset;
        opts.budget_bnb_seconds = budget_bnb;
        opts.lb_mode = lb_mode == "max" ? LbMode::Max : LbMode::Min;
        opts.opposed_arity = opposed_arity;
        opts.jobs = jobs;
        opts.progress = [](double t, double mk) {
            std::cerr << "t=" << t << " incumbent=" << mk << "\n";
        };

        if (or_cmd->parsed()) {
            // Exact optimum of the first serviceable poset.
            ComputePosetsOptions po;
            po.budget_seconds = budget_poset;
            auto posets = compute_posets(pruned, po);
            for (const Poset& p : posets) {
                try {
                    GroundedPoset gp = ground_poset(p, sc);
                    auto opt = exact_optimum(gp);
                    if (!opt) continue;
                    emit(out, json{{"poset_id", p.id}, {"makespan", *opt}}.dump(2) + "\n");
                    return 0;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::InfeasibleForTeam) throw;
                }
            }
            throw Error(ErrorCode::InfeasibleForTeam, "no serviceable poset");
        }

        PlanResult res = plan(pruned, sc, opts);
        GroundedPoset gp = ground_poset(res.posets[res.best_poset], sc);

        if (pl_cmd->parsed()) {
            if (!gantt.empty()) emit(gantt, gantt_csv(*res.best, sc, gp));
            emit(out, plan_json(res, sc, gp).dump(2) + "\n");
            return 0;
        }

        // simulate
        SimOptions so;
        so.seed = seed;
        so.noise = noise;
        so.lb_mode = opts.lb_mode;
        std::stringstream fs(failures_arg);
        std::string item;
        while (std::getline(fs, item, ',')) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw Error(ErrorCode::Syntax, "failure spec must be id:time");
            std::string id = item.substr(0, colon);
            int agent = -1;
            for (std::size_t a = 0; a < sc.agents.size(); ++a)
                if (sc.agents[a].id == id) agent = static_cast<int>(a);
            if (agent < 0) throw Error(ErrorCode::Syntax, "unknown agent " + id);
            so.failures.push_back({agent, std::stod(item.substr(colon + 1))});
        }
        Trace tr = simulate(gp, *res.best, so);
        emit(out, trace_json(tr, sc).dump(2) + "\n");
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

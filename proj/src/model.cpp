#include "mats/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace mats {

using nlohmann::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int Scenario::region(const std::string& name) const {
    auto it = region_index.find(name);
    if (it == region_index.end())
        throw Error(ErrorCode::UnknownAtom, "unknown region '" + name + "'");
    return it->second;
}

const CollabBehavior* Scenario::behavior(const std::string& name) const {
    auto it = behavior_index.find(name);
    if (it == behavior_index.end()) return nullptr;
    return &behaviors[it->second];
}

double Scenario::travel_time(int agent, int from, int to) const {
    const auto& m = travel.at(agents[agent].type_label);
    return m[from][to];
}

bool Scenario::reachable(int agent, int region) const {
    return std::isfinite(travel_time(agent, agents[agent].initial_region, region));
}

Scenario load_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Syntax, std::string("scenario JSON: ") + e.what());
    }
    Scenario s;
    for (const auto& r : j.at("regions")) {
        std::string name = r.is_object() ? r.at("name").get<std::string>()
                                         : r.get<std::string>();
        if (s.region_index.count(name))
            throw Error(ErrorCode::Syntax, "duplicate region '" + name + "'");
        s.region_index[name] = static_cast<int>(s.region_names.size());
        s.region_names.push_back(name);
    }
    int n = static_cast<int>(s.region_names.size());

    for (const auto& b : j.value("behaviors", json::array())) {
        CollabBehavior cb;
        cb.name = b.at("name").get<std::string>();
        for (const auto& r : b.at("requires")) cb.required.push_back(r.get<std::string>());
        std::sort(cb.required.begin(), cb.required.end());
        cb.duration = b.at("duration").get<double>();
        if (s.behavior_index.count(cb.name))
            throw Error(ErrorCode::Syntax, "duplicate behavior '" + cb.name + "'");
        s.behavior_index[cb.name] = static_cast<int>(s.behaviors.size());
        s.behaviors.push_back(std::move(cb));
    }

    for (const auto& a : j.at("agents")) {
        AgentModel am;
        am.id = a.at("id").get<std::string>();
        am.type_label = a.at("type").get<std::string>();
        am.initial_region = s.region(a.at("initial").get<std::string>());
        json locals = a.value("local_actions", json::object());
        for (auto it = locals.begin(); it != locals.end(); ++it)
            am.local_actions[it.key()] = it.value().get<double>();
        for (const auto& c : a.value("collab_actions", json::array()))
            am.collab_actions.insert(c.get<std::string>());
        s.agents.push_back(std::move(am));
    }

    // Distance tables per agent type, then all-pairs shortest paths.
    const auto& dists = j.at("distances");
    for (auto it = dists.begin(); it != dists.end(); ++it) {
        std::vector<std::vector<double>> m(n, std::vector<double>(n, kInf));
        for (int i = 0; i < n; ++i) m[i][i] = 0;
        for (auto e = it.value().begin(); e != it.value().end(); ++e) {
            std::string key = e.key();
            auto comma = key.find(',');
            if (comma == std::string::npos)
                throw Error(ErrorCode::Syntax, "distance key '" + key + "' is not 'r1,r2'");
            int r1 = s.region(key.substr(0, comma));
            int r2 = s.region(key.substr(comma + 1));
            double w = e.value().get<double>();
            if (w < 0) throw Error(ErrorCode::Syntax, "negative travel time");
            m[r1][r2] = std::min(m[r1][r2], w);
            m[r2][r1] = std::min(m[r2][r1], w);
        }
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) {
                if (!std::isfinite(m[i][k])) continue;
                for (int jj = 0; jj < n; ++jj)
                    if (m[i][k] + m[k][jj] < m[i][jj]) m[i][jj] = m[i][k] + m[k][jj];
            }
        s.travel[it.key()] = std::move(m);
    }
    for (const AgentModel& a : s.agents)
        if (!s.travel.count(a.type_label))
            throw Error(ErrorCode::Syntax,
                        "agent '" + a.id + "' has no distance table for type '" +
                            a.type_label + "'");
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Generic, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["regions"] = json::array();
    for (const auto& r : s.region_names) j["regions"].push_back({{"name", r}});
    j["behaviors"] = json::array();
    for (const auto& b : s.behaviors)
        j["behaviors"].push_back(
            {{"name", b.name}, {"requires", b.required}, {"duration", b.duration}});
    j["agents"] = json::array();
    for (const auto& a : s.agents) {
        json ja{{"id", a.id},
                {"type", a.type_label},
                {"initial", s.region_names[a.initial_region]},
                {"collab_actions", std::vector<std::string>(a.collab_actions.begin(),
                                                            a.collab_actions.end())}};
        ja["local_actions"] = json::object();
        for (const auto& [k, v] : a.local_actions) ja["local_actions"][k] = v;
        j["agents"].push_back(ja);
    }
    j["distances"] = json::object();
    for (const auto& [type, m] : s.travel) {
        json jd = json::object();
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t k = i + 1; k < m.size(); ++k)
                if (std::isfinite(m[i][k]))
                    jd[s.region_names[i] + "," + s.region_names[k]] = m[i][k];
        j["distances"][type] = jd;
    }
    return j.dump(2);
}

GroundedAtom ground_atom(const std::string& name, const Scenario& s) {
    if (s.region_index.count(name)) {
        GroundedAtom a;
        a.kind = GroundedAtom::Kind::Region;
        a.region = s.region_index.at(name);
        return a;
    }
    auto us = name.rfind('_');
    while (us != std::string::npos) {
        std::string action = name.substr(0, us);
        std::string region = name.substr(us + 1);
        if (s.region_index.count(region)) {
            GroundedAtom a;
            a.region = s.region_index.at(region);
            a.action = action;
            if (s.behavior(action)) {
                a.kind = GroundedAtom::Kind::Collab;
                return a;
            }
            for (const AgentModel& ag : s.agents)
                if (ag.local_actions.count(action)) {
                    a.kind = GroundedAtom::Kind::Local;
                    return a;
                }
        }
        us = us == 0 ? std::string::npos : name.rfind('_', us - 1);
    }
    throw Error(ErrorCode::UnknownAtom, "unknown proposition name '" + name + "'");
}

ServiceRequirement ground(const std::vector<std::string>& positive,
                          const std::vector<std::string>& negative,
                          const Scenario& s) {
    ServiceRequirement req;
    int region = -1;
    for (const std::string& name : positive) {
        GroundedAtom a = ground_atom(name, s);
        if (region == -1) region = a.region;
        else if (region != a.region)
            throw Error(ErrorCode::InfeasibleForTeam,
                        "subtask atoms span regions '" + s.region_names[region] +
                            "' and '" + s.region_names[a.region] + "'");
        switch (a.kind) {
        case GroundedAtom::Kind::Region:
            break;  // pure presence
        case GroundedAtom::Kind::Local: {
            req.needed.push_back(a.action);
            double d = 0;
            for (const AgentModel& ag : s.agents) {
                auto it = ag.local_actions.find(a.action);
                if (it != ag.local_actions.end()) d = std::max(d, it->second);
            }
            req.duration = std::max(req.duration, d);
            break;
        }
        case GroundedAtom::Kind::Collab: {
            const CollabBehavior* b = s.behavior(a.action);
            req.needed.insert(req.needed.end(), b->required.begin(), b->required.end());
            req.duration = std::max(req.duration, b->duration);
            break;
        }
        }
    }
    if (region == -1)
        throw Error(ErrorCode::Generic, "subtask has no positive atoms");
    req.region = region;
    std::sort(req.needed.begin(), req.needed.end());
    req.participants = req.needed.empty() ? 1 : static_cast<int>(req.needed.size());
    for (const std::string& name : negative) {
        GroundedAtom a = ground_atom(name, s);
        if (a.kind == GroundedAtom::Kind::Region)
            req.forbidden_regions.push_back(a.region);
    }
    std::sort(req.forbidden_regions.begin(), req.forbidden_regions.end());
    req.forbidden_regions.erase(
        std::unique(req.forbidden_regions.begin(), req.forbidden_regions.end()),
        req.forbidden_regions.end());
    return req;
}

namespace {

void enumerate_coalitions(const ServiceRequirement& req, const Scenario& s,
                          const std::set<int>& excluded, std::size_t slot,
                          Coalition& partial, std::set<std::vector<int>>& seen,
                          std::vector<Coalition>& out) {
    if (slot == req.needed.size()) {
        Coalition c = partial;
        std::vector<std::size_t> order(c.members.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return c.members[a] < c.members[b]; });
        Coalition sorted;
        for (std::size_t i : order) {
            sorted.members.push_back(c.members[i]);
            sorted.roles.push_back(c.roles[i]);
        }
        if (seen.insert(sorted.members).second) out.push_back(std::move(sorted));
        return;
    }
    const std::string& action = req.needed[slot];
    // Identical consecutive slots: enforce increasing agent ids to avoid
    // permuted duplicates of the same member set.
    int min_agent = 0;
    if (slot > 0 && req.needed[slot - 1] == action && !partial.members.empty())
        min_agent = partial.members.back() + 1;
    for (int ag = min_agent; ag < static_cast<int>(s.agents.size()); ++ag) {
        if (excluded.count(ag)) continue;
        const AgentModel& am = s.agents[ag];
        bool capable = am.local_actions.count(action) || am.collab_actions.count(action);
        if (!capable) continue;
        if (!s.reachable(ag, req.region)) continue;
        if (std::find(partial.members.begin(), partial.members.end(), ag) !=
            partial.members.end())
            continue;
        partial.members.push_back(ag);
        partial.roles.push_back(action);
        enumerate_coalitions(req, s, excluded, slot + 1, partial, seen, out);
        partial.members.pop_back();
        partial.roles.pop_back();
    }
}

}  // namespace

std::vector<Coalition> coalitions_for(const ServiceRequirement& req, const Scenario& s,
                                      const std::set<int>& excluded) {
    std::vector<Coalition> out;
    if (req.needed.empty()) {
        for (int ag = 0; ag < static_cast<int>(s.agents.size()); ++ag) {
            if (excluded.count(ag)) continue;
            if (!s.reachable(ag, req.region)) continue;
            out.push_back(Coalition{{ag}, {""}});
        }
        return out;
    }
    Coalition partial;
    std::set<std::vector<int>> seen;
    enumerate_coalitions(req, s, excluded, 0, partial, seen, out);
    std::sort(out.begin(), out.end(), [](const Coalition& a, const Coalition& b) {
        return a.members < b.members;
    });
    return out;
}

bool atom_feasible(const GroundedAtom& atom, const Scenario& s,
                   const std::set<int>& excluded) {
    switch (atom.kind) {
    case GroundedAtom::Kind::Region:
        for (int ag = 0; ag < static_cast<int>(s.agents.size()); ++ag)
            if (!excluded.count(ag) && s.reachable(ag, atom.region)) return true;
        return false;
    case GroundedAtom::Kind::Local:
        for (int ag = 0; ag < static_cast<int>(s.agents.size()); ++ag)
            if (!excluded.count(ag) && s.agents[ag].local_actions.count(atom.action) &&
                s.reachable(ag, atom.region))
                return true;
        return false;
    case GroundedAtom::Kind::Collab: {
        ServiceRequirement req;
        req.region = atom.region;
        const CollabBehavior* b = s.behavior(atom.action);
        req.needed = b->required;
        return !coalitions_for(req, s, excluded).empty();
    }
    }
    return false;
}

}  // namespace mats

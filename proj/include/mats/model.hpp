#pragma once

// Team and workspace model: regions of interest, per-agent-type transition
// graphs (travel times in seconds), agent capabilities, and collaborative
// behaviors.  Also the grounding of service propositions:
//   <region>            agent presence at the region
//   <action>_<region>   local action or collaborative behavior at the region

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mats/errors.hpp"

namespace mats {

struct CollabBehavior {
    std::string name;
    std::vector<std::string> required;  // primitive action multiset, sorted
    double duration = 0;
};

struct AgentModel {
    std::string id;
    std::string type_label;
    int initial_region = 0;
    std::map<std::string, double> local_actions;  // action -> duration
    std::set<std::string> collab_actions;         // primitive collab capabilities
};

struct Scenario {
    std::vector<std::string> region_names;
    std::map<std::string, int> region_index;
    std::vector<AgentModel> agents;
    std::vector<CollabBehavior> behaviors;
    std::map<std::string, int> behavior_index;
    // travel[type][from][to] in seconds; infinity when unreachable
    std::map<std::string, std::vector<std::vector<double>>> travel;

    int region(const std::string& name) const;
    const CollabBehavior* behavior(const std::string& name) const;
    double travel_time(int agent, int from, int to) const;
    bool reachable(int agent, int region) const;
};

Scenario load_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);
std::string scenario_to_json(const Scenario& s);

struct GroundedAtom {
    enum class Kind { Region, Local, Collab };
    Kind kind{};
    int region = 0;
    std::string action;  // local action or behavior name; empty for Region
};

// Throws UnknownAtom when the name matches neither a region nor a declared
// <action>_<region> pattern.
GroundedAtom ground_atom(const std::string& name, const Scenario& s);

// The grounded requirement of one subtask.
struct ServiceRequirement {
    int region = 0;
    std::vector<std::string> needed;  // primitive action slots, sorted
    int participants = 1;
    double duration = 0;
    std::vector<int> forbidden_regions;  // sorted region ids
};

// positive: atoms that define the service; negative: atoms that must stay
// false while it executes (region atoms land in forbidden_regions).
ServiceRequirement ground(const std::vector<std::string>& positive,
                          const std::vector<std::string>& negative,
                          const Scenario& s);

struct Coalition {
    std::vector<int> members;             // agent indices, sorted
    std::vector<std::string> roles;       // roles[i] = action of members[i]
};

// Minimal coalitions: bijective covers of req.needed by distinct capable
// agents that can reach req.region.  Deterministic order; excluded agents
// are skipped (used for failure adaptation).
std::vector<Coalition> coalitions_for(const ServiceRequirement& req,
                                      const Scenario& s,
                                      const std::set<int>& excluded = {});

// Capability + reachability feasibility of a single positive atom.
bool atom_feasible(const GroundedAtom& atom, const Scenario& s,
                   const std::set<int>& excluded = {});

}  // namespace mats

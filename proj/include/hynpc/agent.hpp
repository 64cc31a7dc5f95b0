#pragma once

#include "hynpc/goals.hpp"
#include "hynpc/pddl.hpp"
#include "hynpc/planner.hpp"
#include "hynpc/reasoner.hpp"
#include "hynpc/world.hpp"

#include <json.hpp>

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hynpc::agent {

/// Predicate image of a relation; each arg is "pred" or "succ".
struct RelationBinding {
    std::string predicate;
    std::vector<std::string> args;
};

/// Environment action for a planning schema; `target` indexes the action's arguments.
struct ActionBinding {
    world::ActionKind kind = world::ActionKind::noop;
    std::optional<std::size_t> target;
};

/// How continuous positions become planning locations.
struct LocationBinding {
    std::set<world::EntityType> anchor_types;
    std::string location_type = "Location";
    std::string object_prefix = "loc_";
    std::string open_area_object = "open_area";
    std::string open_area_type = "OpenArea";
    std::string at_predicate = "located";
    std::string anchor_predicate = "anchor";
};

struct DomainBinding {
    pddl::Domain domain;
    std::map<world::EntityType, std::string> entity_type_map;
    std::map<world::RelationType, RelationBinding> relation_pred_map;
    std::map<std::string, std::string> property_pred_map;
    std::map<std::string, std::string> flag_pred_map;
    LocationBinding locations;
    std::string self_predicate = "self";
    std::map<std::string, ActionBinding> action_map;
};

class BindingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every referenced type, predicate and schema exists with the right arity, and every
/// schema of the domain has an action mapping.
void check_binding(const DomainBinding& binding);

DomainBinding load_binding(std::string_view json_text, pddl::Domain domain);
/// Reads the binding and the domain file it names (relative to the binding's directory).
DomainBinding load_binding_file(const std::string& path);

/// Directory of the bundled domain and binding files.
std::string data_dir();
DomainBinding default_binding();

/// Planning location object -> position.
using LocationTable = std::map<std::string, world::Vec2>;

world::EnvAction map_plan_action(const DomainBinding& binding, const planner::GroundAction& action,
                                 const std::string& actor, const LocationTable& locations);

struct TraceEvent {
    std::uint64_t tick = 0;
    std::string agent;
    std::string kind;
    nlohmann::ordered_json payload = nlohmann::ordered_json::object();

    /// One JSON line without the trailing newline.
    std::string to_json() const;
};

struct IterationOutcome {
    std::optional<world::EnvAction> emitted;
    bool rethought = false;
    bool replanned = false;
    std::vector<TraceEvent> events;
};

struct ControllerOptions {
    planner::SearchConfig search;
    /// Entities of unmapped types are an error when strict, skipped otherwise.
    bool strict = true;
    std::size_t prompt_cap = 0;
};

/// One agent: memory stream, live planning problem, goal, plan and current action.
class AgentController {
public:
    AgentController(std::string uid, reasoner::PersonalityProfile profile, const DomainBinding& binding,
                    std::vector<goals::GeneralGoal> registry, ControllerOptions options = {});

    /// Rebuilds objects and init from the world; true iff either changed.
    bool sync_ap_problem(const world::WorldState& world);

    IterationOutcome update(const world::WorldState& world, reasoner::Backend& backend);

    /// Status of the current action after the world stepped.
    void observe(const world::ActionStatus& status);

    const std::string& uid() const { return uid_; }
    const reasoner::MemoryStream& stream() const { return stream_; }
    const pddl::ProblemSpec& problem() const { return problem_; }
    const std::optional<goals::GroundGoalOption>& current_goal() const { return goal_; }
    const std::deque<planner::GroundAction>& plan() const { return plan_; }
    const std::optional<world::EnvAction>& current_action() const { return action_; }
    const std::optional<world::ActionStatus>& last_status() const { return last_status_; }
    const LocationTable& locations() const { return locations_; }
    /// Option ids in the order they were adopted.
    const std::vector<std::string>& goal_history() const { return history_; }
    /// No plan left and nothing in progress.
    bool idle() const { return plan_.empty() && !action_; }

private:
    std::string uid_;
    reasoner::MemoryStream stream_;
    const DomainBinding& binding_;
    std::vector<goals::GeneralGoal> registry_;
    ControllerOptions options_;

    pddl::ProblemSpec problem_;
    LocationTable locations_;
    std::optional<goals::GroundGoalOption> goal_;
    std::deque<planner::GroundAction> plan_;
    std::optional<world::EnvAction> action_;
    std::optional<world::ActionStatus> last_status_;
    std::vector<std::string> history_;

    std::set<std::string> excluded_;
    bool force_rethink_ = false;
    bool action_failed_ = false;
};

}  // namespace hynpc::agent

#pragma once

#include "hynpc/pddl.hpp"
#include "hynpc/world.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hynpc::goals {

inline constexpr std::string_view kDoNothing = "DoNothing";

enum class ConditionKind { entity_of_type, has_relation, has_property, world_flag, always };

/// One test over a candidate binding. `slot` selects the bound entity.
struct Condition {
    ConditionKind kind = ConditionKind::always;
    std::size_t slot = 0;
    std::vector<world::EntityType> types;                  // entity_of_type
    world::RelationType relation = world::RelationType::burning;  // has_relation
    bool as_pred = false;                                  // has_relation: entity is pred (else succ)
    bool exists = false;                                   // entity_of_type: any entity in the world, no slot
    std::string name;                                      // has_property / world_flag
    bool negated = false;
};

/// Goal literal with `{k}` placeholders for bound uids.
struct LiteralTemplate {
    bool positive = true;
    std::string predicate;
    std::vector<std::string> args;
};

struct GeneralGoal {
    std::string name;
    /// Allowed entity types per parameter slot; an empty list accepts any entity.
    std::vector<std::vector<world::EntityType>> params;
    /// Disjunction of conjunctions. Empty means always applicable.
    std::vector<std::vector<Condition>> applicability;
    /// Extra slots after the parameters, bound to the least-uid entity of the given types.
    std::vector<std::vector<world::EntityType>> witnesses;
    std::string phrase;
    std::vector<LiteralTemplate> ap_goal;
};

struct GroundGoalOption {
    /// `Name(uid,...)`, or `Name` for parameterless goals.
    std::string id;
    std::string goal;
    std::vector<std::string> bindings;
    std::string phrase;
    std::vector<pddl::Literal> ap_goal;

    bool operator==(const GroundGoalOption&) const = default;
};

class GoalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// DoNothing, SavePerson, PutOutFire, HealPerson, CallFirefighters.
std::vector<GeneralGoal> builtin_registry();

/// Throws GoalError if a placeholder refers past the parameter and witness slots.
void check_goal(const GeneralGoal& goal);

/// DoNothing first, then every applicable binding in registry order and uid order.
/// Throws GoalError when a witness slot has no candidate.
std::vector<GroundGoalOption> instantiate_all(const world::WorldState& world, const std::vector<GeneralGoal>& registry);

std::vector<pddl::Literal> planner_goal_of(const GroundGoalOption& option);

/// JSON registry: goals with the same name replace builtins, others are appended.
/// With `"replace_builtins": true` the builtins are dropped.
std::vector<GeneralGoal> load_registry(std::string_view json_text);
std::vector<GeneralGoal> load_registry_file(const std::string& path);

}  // namespace hynpc::goals

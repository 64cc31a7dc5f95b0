#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hynpc::world {

enum class EntityType { person, firefighter, paramedic, car, fire, extinguisher, safe_zone, generic };

/// "Person", "Firefighter", ..., "SafeZone", "Generic".
std::string_view to_string(EntityType type);
std::optional<EntityType> entity_type_from(std::string_view name);
/// Types that can act (submit environment actions).
bool is_agent_type(EntityType type);

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2&) const = default;
};

double distance(Vec2 a, Vec2 b);

struct Entity {
    std::string uid;
    EntityType type = EntityType::generic;
    /// Raw `agent_type` from the scenario, e.g. "AGFireExtinguisher".
    std::string agent_type;
    Vec2 position;
    bool running = true;
    /// Boolean properties: `can_be_moved`, `healed`, and the derived `trapped` / `carried`.
    std::map<std::string, bool> properties;

    bool flag(const std::string& name) const;
    bool operator==(const Entity&) const = default;
};

enum class RelationType { burning, inside_of, carrying, injured };

/// "Burning", "InsideOf", "Carrying", "Injured".
std::string_view to_string(RelationType type);
std::optional<RelationType> relation_type_from(std::string_view name);

struct Relation {
    std::string uid;
    RelationType type = RelationType::burning;
    std::string pred;
    std::string succ;

    bool operator==(const Relation&) const = default;
};

struct SimConfig {
    double move_speed = 2.0;
    double arrival_radius = 0.5;
    int extinguish_ticks = 3;
    /// Occupants of a container burning for `hazard_ticks` ticks become injured.
    bool hazard_enabled = false;
    int hazard_ticks = 5;

    bool operator==(const SimConfig&) const = default;
};

/// Per-actor progress of an ongoing ExtinguishFire.
struct ExtinguishProgress {
    std::string fire;
    int ticks = 0;

    bool operator==(const ExtinguishProgress&) const = default;
};

struct WorldState {
    std::map<std::string, Entity> entities;
    std::map<std::string, Relation> relations;
    /// World flags such as `firefighters_called`.
    std::set<std::string> flags;
    std::uint64_t tick = 0;
    SimConfig config;
    std::map<std::string, ExtinguishProgress> extinguishing;
    /// Consecutive ticks each container has been burning (hazard rule).
    std::map<std::string, int> burn_ticks;

    const Entity* find(std::string_view uid) const;
    bool has_relation(RelationType type, std::string_view pred, std::string_view succ) const;
    /// Uid of the entity carrying `uid`, if any.
    std::optional<std::string> carrier_of(std::string_view uid) const;
    std::vector<const Relation*> relations_of(RelationType type) const;

    bool operator==(const WorldState&) const = default;
};

inline constexpr std::string_view kFirefightersCalled = "firefighters_called";

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LoadOptions {
    /// Unknown agent types are an error when strict, a Generic entity otherwise.
    bool strict = true;
};

WorldState load_scenario(std::string_view json_text, const LoadOptions& options = {});
WorldState load_scenario_file(const std::string& path, const LoadOptions& options = {});

/// Recomputes the derived `trapped` and `carried` properties.
void refresh_derived(WorldState& world);

enum class ActionKind { move_to, take, drop, extinguish_fire, call_firefighters, heal, noop };

std::string_view to_string(ActionKind kind);

struct EnvAction {
    ActionKind kind = ActionKind::noop;
    std::string actor;
    /// Entity uid for Take/Drop/ExtinguishFire/Heal. For MoveTo, the destination entity
    /// when `point` is unset, otherwise just a label for the point.
    std::string target;
    std::optional<Vec2> point;

    /// `MoveTo(x)`, `Take(x)`, `CallFirefighters` ...
    std::string str() const;
    /// Short English phrase for prompts, e.g. "taking 'Sim_01_FireExtinguisher_0'".
    std::string describe() const;
    bool operator==(const EnvAction&) const = default;
};

enum class FailReason {
    not_colocated,
    no_extinguisher_held,
    unknown_target,
    already_carried,
    unknown_actor,
    immobile,
    not_movable,
    not_carried,
    not_injured,
};

/// "NotColocated", "NoExtinguisherHeld", ...
std::string_view to_string(FailReason reason);

struct ActionStatus {
    enum class State { in_progress, done, failed };
    State state = State::in_progress;
    std::optional<FailReason> reason;

    static ActionStatus in_progress() { return {State::in_progress, std::nullopt}; }
    static ActionStatus done() { return {State::done, std::nullopt}; }
    static ActionStatus failed(FailReason r) { return {State::failed, r}; }

    /// "InProgress", "Done" or "Failed(<reason>)".
    std::string str() const;
    bool operator==(const ActionStatus&) const = default;
};

/// True once the action has finished, successfully or not.
bool action_complete(const ActionStatus& status);

struct ChangeEvent {
    enum class Kind { entity_added, entity_removed, relation_added, relation_removed, flag_set, flag_cleared };
    Kind kind;
    std::string key;

    bool operator==(const ChangeEvent&) const = default;
};

struct StepResult {
    WorldState world;
    std::map<std::string, ActionStatus> statuses;
    std::vector<ChangeEvent> changes;
};

/// Advances the world by one tick, applying `submissions` in the given order.
/// Throws std::invalid_argument if an actor appears twice.
StepResult step(const WorldState& world, const std::vector<EnvAction>& submissions);

struct Perception {
    std::string key;
    std::string text;
    bool live = true;

    bool operator==(const Perception&) const = default;
};

class UnknownObserver : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything in the world as sentences: entities, then relations, then flags, each by key.
std::vector<Perception> perceptions(const WorldState& world, std::string_view observer);

}  // namespace hynpc::world

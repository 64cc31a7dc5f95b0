#include "hynpc/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hynpc::world {

std::string_view to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::move_to: return "MoveTo";
        case ActionKind::take: return "Take";
        case ActionKind::drop: return "Drop";
        case ActionKind::extinguish_fire: return "ExtinguishFire";
        case ActionKind::call_firefighters: return "CallFirefighters";
        case ActionKind::heal: return "Heal";
        case ActionKind::noop: return "Noop";
    }
    return "Noop";
}

namespace {

std::string format_point(Vec2 p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.2f, %.2f)", p.x, p.y);
    return buf;
}

}  // namespace

std::string EnvAction::str() const {
    std::string out(to_string(kind));
    if (kind == ActionKind::call_firefighters || kind == ActionKind::noop) return out;
    return out + "(" + (target.empty() && point ? format_point(*point) : target) + ")";
}

std::string EnvAction::describe() const {
    std::string what = target.empty() && point ? format_point(*point) : "'" + target + "'";
    switch (kind) {
        case ActionKind::move_to: return "moving to " + what;
        case ActionKind::take: return "taking " + what;
        case ActionKind::drop: return "dropping " + what;
        case ActionKind::extinguish_fire: return "putting out " + what;
        case ActionKind::call_firefighters: return "calling the firefighters";
        case ActionKind::heal: return "healing " + what;
        case ActionKind::noop: return "waiting";
    }
    return "waiting";
}

std::string_view to_string(FailReason reason) {
    switch (reason) {
        case FailReason::not_colocated: return "NotColocated";
        case FailReason::no_extinguisher_held: return "NoExtinguisherHeld";
        case FailReason::unknown_target: return "UnknownTarget";
        case FailReason::already_carried: return "AlreadyCarried";
        case FailReason::unknown_actor: return "UnknownActor";
        case FailReason::immobile: return "Immobile";
        case FailReason::not_movable: return "NotMovable";
        case FailReason::not_carried: return "NotCarried";
        case FailReason::not_injured: return "NotInjured";
    }
    return "Unknown";
}

std::string ActionStatus::str() const {
    switch (state) {
        case State::in_progress: return "InProgress";
        case State::done: return "Done";
        case State::failed: return "Failed(" + std::string(to_string(reason.value_or(FailReason::unknown_target))) + ")";
    }
    return "InProgress";
}

bool action_complete(const ActionStatus& status) { return status.state != ActionStatus::State::in_progress; }

namespace {

void remove_entity(WorldState& w, const std::string& uid) {
    w.entities.erase(uid);
    std::erase_if(w.relations, [&](const auto& kv) { return kv.second.pred == uid || kv.second.succ == uid; });
    w.burn_ticks.erase(uid);
    std::erase_if(w.extinguishing, [&](const auto& kv) { return kv.first == uid || kv.second.fire == uid; });
}

bool holds_extinguisher(const WorldState& w, const std::string& actor) {
    for (const auto& [_, r] : w.relations) {
        if (r.type != RelationType::carrying || r.pred != actor) continue;
        const Entity* item = w.find(r.succ);
        if (item != nullptr && item->type == EntityType::extinguisher) return true;
    }
    return false;
}

class Executor {
public:
    explicit Executor(WorldState& w) : w_(w) {}

    ActionStatus run(const EnvAction& a) {
        auto actor_it = w_.entities.find(a.actor);
        if (actor_it == w_.entities.end() || !is_agent_type(actor_it->second.type)) {
            return ActionStatus::failed(FailReason::unknown_actor);
        }
        const Entity& actor = actor_it->second;
        const bool carried = w_.carrier_of(a.actor).has_value();
        if (carried && a.kind != ActionKind::noop && a.kind != ActionKind::call_firefighters) {
            return ActionStatus::failed(FailReason::immobile);
        }
        switch (a.kind) {
            case ActionKind::noop: return ActionStatus::done();
            case ActionKind::call_firefighters:
                w_.flags.insert(std::string(kFirefightersCalled));
                return ActionStatus::done();
            case ActionKind::move_to: return move_to(a, actor);
            case ActionKind::take: return take(a, actor);
            case ActionKind::drop: return drop(a);
            case ActionKind::extinguish_fire: return extinguish(a, actor);
            case ActionKind::heal: return heal(a, actor);
        }
        return ActionStatus::failed(FailReason::unknown_target);
    }

    const std::set<std::string>& extinguishing_actors() const { return extinguishing_; }

private:
    const Entity* target_of(const EnvAction& a) const {
        if (a.target == a.actor) return nullptr;
        return w_.find(a.target);
    }

    bool colocated(const Entity& x, const Entity& y) const {
        return distance(x.position, y.position) <= w_.config.arrival_radius;
    }

    ActionStatus move_to(const EnvAction& a, const Entity& actor) {
        if (actor.flag("trapped")) return ActionStatus::failed(FailReason::immobile);
        Vec2 goal;
        if (a.point) {
            goal = *a.point;
        } else if (const Entity* t = target_of(a)) {
            goal = t->position;
        } else {
            return ActionStatus::failed(FailReason::unknown_target);
        }
        Entity& mover = w_.entities.at(a.actor);
        const double d = distance(mover.position, goal);
        if (d <= w_.config.move_speed) {
            mover.position = goal;
        } else {
            const double f = w_.config.move_speed / d;
            mover.position = {mover.position.x + (goal.x - mover.position.x) * f,
                              mover.position.y + (goal.y - mover.position.y) * f};
        }
        return distance(mover.position, goal) <= w_.config.arrival_radius ? ActionStatus::done()
                                                                           : ActionStatus::in_progress();
    }

    ActionStatus take(const EnvAction& a, const Entity& actor) {
        const Entity* t = target_of(a);
        if (t == nullptr) return ActionStatus::failed(FailReason::unknown_target);
        if (!colocated(actor, *t)) return ActionStatus::failed(FailReason::not_colocated);
        if (t->type != EntityType::person && !t->flag("can_be_moved")) {
            return ActionStatus::failed(FailReason::not_movable);
        }
        if (w_.carrier_of(t->uid)) return ActionStatus::failed(FailReason::already_carried);
        const std::string uid = t->uid;
        std::erase_if(w_.relations, [&](const auto& kv) {
            return kv.second.type == RelationType::inside_of && kv.second.succ == uid;
        });
        Relation r{"Carrying_" + a.actor + "_" + uid, RelationType::carrying, a.actor, uid};
        w_.relations.insert_or_assign(r.uid, r);
        w_.entities.at(uid).position = actor.position;
        return ActionStatus::done();
    }

    ActionStatus drop(const EnvAction& a) {
        if (target_of(a) == nullptr) return ActionStatus::failed(FailReason::unknown_target);
        auto n = std::erase_if(w_.relations, [&](const auto& kv) {
            return kv.second.type == RelationType::carrying && kv.second.pred == a.actor && kv.second.succ == a.target;
        });
        return n > 0 ? ActionStatus::done() : ActionStatus::failed(FailReason::not_carried);
    }

    ActionStatus extinguish(const EnvAction& a, const Entity& actor) {
        const Entity* fire = target_of(a);
        if (fire == nullptr || fire->type != EntityType::fire) return ActionStatus::failed(FailReason::unknown_target);
        if (!holds_extinguisher(w_, a.actor)) return ActionStatus::failed(FailReason::no_extinguisher_held);
        if (!colocated(actor, *fire)) return ActionStatus::failed(FailReason::not_colocated);
        auto& progress = w_.extinguishing[a.actor];
        if (progress.fire != a.target) progress = {a.target, 0};
        ++progress.ticks;
        extinguishing_.insert(a.actor);
        if (progress.ticks < w_.config.extinguish_ticks) return ActionStatus::in_progress();
        remove_entity(w_, a.target);
        return ActionStatus::done();
    }

    ActionStatus heal(const EnvAction& a, const Entity& actor) {
        const Entity* t = target_of(a);
        if (t == nullptr) return ActionStatus::failed(FailReason::unknown_target);
        if (!colocated(actor, *t)) return ActionStatus::failed(FailReason::not_colocated);
        auto n = std::erase_if(w_.relations, [&](const auto& kv) {
            return kv.second.type == RelationType::injured && kv.second.succ == a.target;
        });
        if (n == 0) return ActionStatus::failed(FailReason::not_injured);
        w_.entities.at(a.target).properties["healed"] = true;
        return ActionStatus::done();
    }

    WorldState& w_;
    std::set<std::string> extinguishing_;
};

// Uncarried persons standing in a safe zone are inside it; leaving removes the relation.
void update_safe_zones(WorldState& w) {
    std::vector<const Entity*> zones;
    for (const auto& [_, e] : w.entities) {
        if (e.type == EntityType::safe_zone) zones.push_back(&e);
    }
    for (const auto& [uid, e] : w.entities) {
        if (e.type != EntityType::person) continue;
        std::string zone;
        if (!w.carrier_of(uid)) {
            for (const Entity* z : zones) {
                if (distance(z->position, e.position) <= w.config.arrival_radius) {
                    zone = z->uid;
                    break;
                }
            }
        }
        std::erase_if(w.relations, [&](const auto& kv) {
            const Relation& r = kv.second;
            if (r.type != RelationType::inside_of || r.succ != uid || r.pred == zone) return false;
            const Entity* container = w.find(r.pred);
            return container != nullptr && container->type == EntityType::safe_zone;
        });
        if (!zone.empty() && !w.has_relation(RelationType::inside_of, zone, uid)) {
            Relation r{"InsideOf_" + zone + "_" + uid, RelationType::inside_of, zone, uid};
            w.relations.insert_or_assign(r.uid, r);
        }
    }
}

void apply_hazard(WorldState& w) {
    if (!w.config.hazard_enabled) return;
    std::set<std::string> burning;
    for (const auto* r : w.relations_of(RelationType::burning)) burning.insert(r->succ);
    std::erase_if(w.burn_ticks, [&](const auto& kv) { return !burning.count(kv.first); });
    for (const auto& c : burning) ++w.burn_ticks[c];
    std::vector<Relation> added;
    for (const auto* r : w.relations_of(RelationType::inside_of)) {
        if (!burning.count(r->pred) || w.burn_ticks[r->pred] < w.config.hazard_ticks) continue;
        const Entity& occupant = w.entities.at(r->succ);
        if (occupant.type != EntityType::person || occupant.flag("healed")) continue;
        bool injured = std::any_of(w.relations.begin(), w.relations.end(), [&](const auto& kv) {
            return kv.second.type == RelationType::injured && kv.second.succ == r->succ;
        });
        if (!injured) added.push_back({"Injured_" + r->pred + "_" + r->succ, RelationType::injured, r->pred, r->succ});
    }
    for (auto& r : added) w.relations.insert_or_assign(r.uid, r);
}

template <typename Map>
void diff_keys(const Map& before, const Map& after, ChangeEvent::Kind added, ChangeEvent::Kind removed,
               const std::string& prefix, std::vector<ChangeEvent>& out) {
    for (const auto& [k, _] : before) {
        if (!after.count(k)) out.push_back({removed, prefix + k});
    }
    for (const auto& [k, _] : after) {
        if (!before.count(k)) out.push_back({added, prefix + k});
    }
}

}  // namespace

StepResult step(const WorldState& world, const std::vector<EnvAction>& submissions) {
    std::set<std::string> actors;
    for (const auto& a : submissions) {
        if (!actors.insert(a.actor).second) {
            throw std::invalid_argument("actor '" + a.actor + "' submitted more than one action");
        }
    }

    StepResult result;
    WorldState w = world;
    Executor exec(w);
    for (const auto& a : submissions) result.statuses[a.actor] = exec.run(a);
    std::erase_if(w.extinguishing, [&](const auto& kv) { return !exec.extinguishing_actors().count(kv.first); });

    for (const auto* r : w.relations_of(RelationType::carrying)) {
        w.entities.at(r->succ).position = w.entities.at(r->pred).position;
    }
    update_safe_zones(w);
    apply_hazard(w);
    refresh_derived(w);
    ++w.tick;

    diff_keys(world.entities, w.entities, ChangeEvent::Kind::entity_added, ChangeEvent::Kind::entity_removed,
              "entity:", result.changes);
    diff_keys(world.relations, w.relations, ChangeEvent::Kind::relation_added, ChangeEvent::Kind::relation_removed,
              "relation:", result.changes);
    for (const auto& f : world.flags) {
        if (!w.flags.count(f)) result.changes.push_back({ChangeEvent::Kind::flag_cleared, "flag:" + f});
    }
    for (const auto& f : w.flags) {
        if (!world.flags.count(f)) result.changes.push_back({ChangeEvent::Kind::flag_set, "flag:" + f});
    }
    result.world = std::move(w);
    return result;
}

}  // namespace hynpc::world

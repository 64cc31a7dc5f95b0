#include "hynpc/world.hpp"

namespace hynpc::world {

namespace {

std::string_view noun(EntityType type) {
    switch (type) {
        case EntityType::person: return "a person";
        case EntityType::firefighter: return "a firefighter";
        case EntityType::paramedic: return "a paramedic";
        case EntityType::car: return "a car";
        case EntityType::fire: return "a fire";
        case EntityType::extinguisher: return "an extinguisher";
        case EntityType::safe_zone: return "a safe zone";
        case EntityType::generic: return "a thing";
    }
    return "a thing";
}

std::string quoted(const std::string& s) { return "'" + s + "'"; }

std::string relation_text(const Relation& r) {
    switch (r.type) {
        case RelationType::burning: return quoted(r.pred) + " is burning " + quoted(r.succ);
        case RelationType::inside_of: return quoted(r.succ) + " is inside of " + quoted(r.pred);
        case RelationType::carrying: return quoted(r.pred) + " is carrying " + quoted(r.succ);
        case RelationType::injured: return quoted(r.succ) + " is injured";
    }
    return {};
}

std::string flag_text(const std::string& flag) {
    if (flag == kFirefightersCalled) return "The firefighters have been called";
    return "The flag " + quoted(flag) + " is set";
}

}  // namespace

std::vector<Perception> perceptions(const WorldState& world, std::string_view observer) {
    if (world.find(observer) == nullptr) {
        throw UnknownObserver("unknown observer '" + std::string(observer) + "'");
    }
    std::vector<Perception> out;
    out.reserve(world.entities.size() + world.relations.size() + world.flags.size());
    for (const auto& [uid, e] : world.entities) {
        out.push_back({"entity:" + uid, "There is " + std::string(noun(e.type)) + " called " + quoted(uid), true});
    }
    for (const auto& [uid, r] : world.relations) out.push_back({"relation:" + uid, relation_text(r), true});
    for (const auto& f : world.flags) out.push_back({"flag:" + f, flag_text(f), true});
    return out;
}

}  // namespace hynpc::world

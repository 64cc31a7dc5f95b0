#include "hynpc/world.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hynpc::world {

namespace {

using nlohmann::json;

struct TypeName {
    EntityType type;
    std::string_view name;
};

constexpr TypeName kTypeNames[] = {
    {EntityType::person, "Person"},           {EntityType::firefighter, "Firefighter"},
    {EntityType::paramedic, "Paramedic"},     {EntityType::car, "Car"},
    {EntityType::fire, "Fire"},               {EntityType::extinguisher, "Extinguisher"},
    {EntityType::safe_zone, "SafeZone"},      {EntityType::generic, "Generic"},
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Scenario agent_type -> entity type. The "AG" class prefix is optional.
std::optional<EntityType> map_agent_type(std::string_view agent_type) {
    std::string_view name = agent_type;
    if (name.size() > 2 && name.substr(0, 2) == "AG") name.remove_prefix(2);
    static const std::map<std::string, EntityType> aliases = {
        {"person", EntityType::person},          {"commonperson", EntityType::person},
        {"forwardperson", EntityType::person},   {"firefighter", EntityType::firefighter},
        {"paramedic", EntityType::paramedic},    {"car", EntityType::car},
        {"commoncar", EntityType::car},          {"fire", EntityType::fire},
        {"fireextinguisher", EntityType::extinguisher}, {"extinguisher", EntityType::extinguisher},
        {"safezone", EntityType::safe_zone},
    };
    auto it = aliases.find(lower(name));
    if (it == aliases.end()) return std::nullopt;
    return it->second;
}

const json& require(const json& object, const char* key, const std::string& where) {
    if (!object.is_object() || !object.contains(key)) {
        throw ScenarioError(where + ": missing required field '" + key + "'");
    }
    return object.at(key);
}

std::string require_string(const json& object, const char* key, const std::string& where) {
    const json& value = require(object, key, where);
    if (!value.is_string() || value.get_ref<const std::string&>().empty()) {
        throw ScenarioError(where + ": field '" + key + "' must be a non-empty string");
    }
    return value.get<std::string>();
}

bool read_bool(const json& value, const std::string& where) {
    if (value.is_boolean()) return value.get<bool>();
    if (value.is_string()) {
        std::string s = lower(value.get<std::string>());
        if (s == "true") return true;
        if (s == "false") return false;
    }
    throw ScenarioError(where + ": expected a boolean");
}

double read_number(const json& value, const std::string& where) {
    if (!value.is_number()) throw ScenarioError(where + ": expected a number");
    double v = value.get<double>();
    if (!std::isfinite(v)) throw ScenarioError(where + ": number is not finite");
    return v;
}

void read_config(const json& doc, SimConfig& config) {
    if (!doc.contains("sim_config")) return;
    const json& c = doc.at("sim_config");
    if (!c.is_object()) throw ScenarioError("sim_config: expected an object");
    auto positive = [](double v, const char* name) {
        if (!(v > 0)) throw ScenarioError(std::string("sim_config.") + name + ": must be positive");
        return v;
    };
    if (c.contains("move_speed")) config.move_speed = positive(read_number(c["move_speed"], "sim_config.move_speed"), "move_speed");
    if (c.contains("arrival_radius")) {
        config.arrival_radius = positive(read_number(c["arrival_radius"], "sim_config.arrival_radius"), "arrival_radius");
    }
    if (c.contains("extinguish_ticks")) {
        config.extinguish_ticks = static_cast<int>(
            positive(read_number(c["extinguish_ticks"], "sim_config.extinguish_ticks"), "extinguish_ticks"));
    }
    if (c.contains("hazard_enabled")) config.hazard_enabled = read_bool(c["hazard_enabled"], "sim_config.hazard_enabled");
    if (c.contains("hazard_ticks")) {
        config.hazard_ticks =
            static_cast<int>(positive(read_number(c["hazard_ticks"], "sim_config.hazard_ticks"), "hazard_ticks"));
    }
}

Entity read_agent(const std::string& key, const json& entry, const LoadOptions& options) {
    const std::string where = "agent '" + key + "'";
    if (!entry.is_object()) throw ScenarioError(where + ": expected an object");
    Entity e;
    e.uid = require_string(entry, "UID", where);
    e.agent_type = require_string(entry, "agent_type", where);
    e.running = read_bool(require(entry, "running", where), where + ".running");
    if (auto type = map_agent_type(e.agent_type)) {
        e.type = *type;
    } else if (options.strict) {
        throw ScenarioError(where + ": unknown agent_type '" + e.agent_type + "'");
    } else {
        e.type = EntityType::generic;
    }

    const json& front = require(entry, "front_end_parameters", where);
    const json& pos = require(front, "position", where + ".front_end_parameters");
    if (!pos.is_array() || pos.size() < 2 || pos.size() > 3) {
        throw ScenarioError(where + ": position must be an array of 2 or 3 numbers");
    }
    e.position = {read_number(pos[0], where + ".position"), read_number(pos[1], where + ".position")};
    if (pos.size() == 3) read_number(pos[2], where + ".position");

    if (front.contains("map_web_app") && front["map_web_app"].is_object() &&
        front["map_web_app"].contains("can_be_moved")) {
        e.properties["can_be_moved"] = read_bool(front["map_web_app"]["can_be_moved"], where + ".can_be_moved");
    }
    if (entry.contains("can_be_moved")) e.properties["can_be_moved"] = read_bool(entry["can_be_moved"], where);
    if (entry.contains("properties")) {
        const json& props = entry["properties"];
        if (!props.is_object()) throw ScenarioError(where + ": properties must be an object");
        for (const auto& [name, value] : props.items()) {
            if (name == "trapped" || name == "carried") continue;  // derived
            e.properties[name] = read_bool(value, where + ".properties." + name);
        }
    }
    return e;
}

}  // namespace

std::string_view to_string(EntityType type) {
    for (const auto& t : kTypeNames) {
        if (t.type == type) return t.name;
    }
    return "Generic";
}

std::optional<EntityType> entity_type_from(std::string_view name) {
    for (const auto& t : kTypeNames) {
        if (t.name == name) return t.type;
    }
    return std::nullopt;
}

bool is_agent_type(EntityType type) {
    return type == EntityType::person || type == EntityType::firefighter || type == EntityType::paramedic;
}

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool Entity::flag(const std::string& name) const {
    auto it = properties.find(name);
    return it != properties.end() && it->second;
}

std::string_view to_string(RelationType type) {
    switch (type) {
        case RelationType::burning: return "Burning";
        case RelationType::inside_of: return "InsideOf";
        case RelationType::carrying: return "Carrying";
        case RelationType::injured: return "Injured";
    }
    return "Burning";
}

std::optional<RelationType> relation_type_from(std::string_view name) {
    for (auto t : {RelationType::burning, RelationType::inside_of, RelationType::carrying, RelationType::injured}) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

const Entity* WorldState::find(std::string_view uid) const {
    auto it = entities.find(std::string(uid));
    return it == entities.end() ? nullptr : &it->second;
}

bool WorldState::has_relation(RelationType type, std::string_view pred, std::string_view succ) const {
    return std::any_of(relations.begin(), relations.end(), [&](const auto& kv) {
        return kv.second.type == type && kv.second.pred == pred && kv.second.succ == succ;
    });
}

std::optional<std::string> WorldState::carrier_of(std::string_view uid) const {
    for (const auto& [_, r] : relations) {
        if (r.type == RelationType::carrying && r.succ == uid) return r.pred;
    }
    return std::nullopt;
}

std::vector<const Relation*> WorldState::relations_of(RelationType type) const {
    std::vector<const Relation*> out;
    for (const auto& [_, r] : relations) {
        if (r.type == type) out.push_back(&r);
    }
    return out;
}

void refresh_derived(WorldState& world) {
    std::set<std::string> burning;
    for (const auto* r : world.relations_of(RelationType::burning)) burning.insert(r->succ);
    for (auto& [uid, e] : world.entities) {
        e.properties.erase("trapped");
        e.properties.erase("carried");
    }
    for (const auto& [_, r] : world.relations) {
        if (r.type == RelationType::carrying) {
            world.entities.at(r.succ).properties["carried"] = true;
        } else if (r.type == RelationType::inside_of && burning.count(r.pred) &&
                   world.entities.at(r.succ).type == EntityType::person) {
            world.entities.at(r.succ).properties["trapped"] = true;
        }
    }
}

WorldState load_scenario(std::string_view json_text, const LoadOptions& options) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ScenarioError("scenario: expected a JSON object");

    WorldState world;
    read_config(doc, world.config);

    if (doc.contains("agents")) {
        const json& agents = doc["agents"];
        if (!agents.is_object()) throw ScenarioError("agents: expected an object");
        for (const auto& [key, entry] : agents.items()) {
            Entity e = read_agent(key, entry, options);
            bool injured = e.flag("injured");
            e.properties.erase("injured");
            std::string uid = e.uid;
            if (!world.entities.emplace(uid, std::move(e)).second) {
                throw ScenarioError("duplicate entity UID '" + uid + "'");
            }
            if (injured) {
                Relation r{uid + "_Injured", RelationType::injured, uid, uid};
                world.relations.emplace(r.uid, r);
            }
        }
    }

    if (doc.contains("relations")) {
        const json& relations = doc["relations"];
        if (!relations.is_object()) throw ScenarioError("relations: expected an object");
        for (const auto& [key, entry] : relations.items()) {
            const std::string where = "relation '" + key + "'";
            if (!entry.is_object()) throw ScenarioError(where + ": expected an object");
            Relation r;
            r.uid = require_string(entry, "UID", where);
            std::string type = require_string(entry, "type", where);
            if (type.rfind("REL", 0) != 0) throw ScenarioError(where + ": type must start with REL");
            auto rel_type = relation_type_from(std::string_view(type).substr(3));
            if (!rel_type) throw ScenarioError(where + ": unknown relation type '" + type + "'");
            r.type = *rel_type;
            r.pred = require_string(entry, "rel_pred", where);
            r.succ = require_string(entry, "rel_succ", where);
            for (const auto* end : {&r.pred, &r.succ}) {
                if (!world.entities.count(*end)) {
                    throw ScenarioError(where + ": references unknown entity '" + *end + "'");
                }
            }
            if (r.type == RelationType::carrying && world.carrier_of(r.succ)) {
                throw ScenarioError(where + ": '" + r.succ + "' is already carried");
            }
            if (world.relations.count(r.uid)) throw ScenarioError("duplicate relation UID '" + r.uid + "'");
            world.relations.emplace(r.uid, r);
        }
    }

    if (doc.contains("flags")) {
        const json& flags = doc["flags"];
        if (!flags.is_array()) throw ScenarioError("flags: expected an array");
        for (const auto& f : flags) {
            if (!f.is_string()) throw ScenarioError("flags: expected strings");
            world.flags.insert(f.get<std::string>());
        }
    }

    for (const auto* r : world.relations_of(RelationType::carrying)) {
        world.entities.at(r->succ).position = world.entities.at(r->pred).position;
    }
    refresh_derived(world);
    return world;
}

WorldState load_scenario_file(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return load_scenario(text.str(), options);
}

}  // namespace hynpc::world

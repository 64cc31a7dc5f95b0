#include "hynpc/agent.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef HYNPC_DATA_DIR
#define HYNPC_DATA_DIR "data"
#endif

namespace hynpc::agent {

namespace {

using nlohmann::json;

const pddl::PredicateSchema& predicate(const pddl::Domain& d, const std::string& name, std::size_t arity,
                                       const std::string& where) {
    const pddl::PredicateSchema* p = d.find_predicate(name);
    if (p == nullptr) throw BindingError(where + ": predicate '" + name + "' is not in the domain");
    if (p->params.size() != arity) {
        throw BindingError(where + ": predicate '" + name + "' takes " + std::to_string(p->params.size()) +
                           " arguments, binding supplies " + std::to_string(arity));
    }
    return *p;
}

void require_type(const pddl::Domain& d, const std::string& type, const std::string& where) {
    if (!d.types.contains(type)) throw BindingError(where + ": type '" + type + "' is not in the domain");
}

std::optional<world::ActionKind> action_kind_from(std::string_view name) {
    for (auto k : {world::ActionKind::move_to, world::ActionKind::take, world::ActionKind::drop,
                   world::ActionKind::extinguish_fire, world::ActionKind::call_firefighters, world::ActionKind::heal,
                   world::ActionKind::noop}) {
        if (world::to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::string read_text(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw BindingError(std::string("cannot open ") + what + " '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

}  // namespace

void check_binding(const DomainBinding& b) {
    const pddl::Domain& d = b.domain;
    for (const auto& [type, name] : b.entity_type_map) require_type(d, name, "entity type " + std::string(world::to_string(type)));
    for (const auto& [type, rb] : b.relation_pred_map) {
        const std::string where = "relation " + std::string(world::to_string(type));
        predicate(d, rb.predicate, rb.args.size(), where);
        for (const auto& a : rb.args) {
            if (a != "pred" && a != "succ") throw BindingError(where + ": argument must be \"pred\" or \"succ\"");
        }
    }
    for (const auto& [prop, pred] : b.property_pred_map) predicate(d, pred, 1, "property " + prop);
    for (const auto& [flag, pred] : b.flag_pred_map) predicate(d, pred, 0, "flag " + flag);
    const auto& lb = b.locations;
    require_type(d, lb.location_type, "locations");
    require_type(d, lb.open_area_type, "locations");
    predicate(d, lb.at_predicate, 2, "locations");
    predicate(d, lb.anchor_predicate, 2, "locations");
    for (auto t : lb.anchor_types) {
        if (!b.entity_type_map.count(t)) {
            throw BindingError("anchor type " + std::string(world::to_string(t)) + " has no planning type");
        }
    }
    predicate(d, b.self_predicate, 1, "self");

    for (const auto& [name, ab] : b.action_map) {
        const pddl::ActionSchema* schema = d.find_action(name);
        if (schema == nullptr) throw BindingError("action map: schema '" + name + "' is not in the domain");
        if (ab.target && *ab.target >= schema->params.size()) {
            throw BindingError("action map: target of '" + name + "' is out of range");
        }
        if (ab.kind == world::ActionKind::move_to &&
            (!ab.target || !d.types.is_subtype(schema->params[*ab.target].type, lb.location_type))) {
            throw BindingError("action map: MoveTo for '" + name + "' must target a " + lb.location_type);
        }
        bool needs_target = ab.kind != world::ActionKind::call_firefighters && ab.kind != world::ActionKind::noop;
        if (needs_target && !ab.target) throw BindingError("action map: '" + name + "' needs a target argument");
    }
    for (const auto& a : d.actions) {
        if (!b.action_map.count(a.name)) throw BindingError("action map: schema '" + a.name + "' is not mapped");
    }
}

DomainBinding load_binding(std::string_view json_text, pddl::Domain domain) {
    DomainBinding b;
    b.domain = std::move(domain);
    try {
        json j = json::parse(json_text);
        for (const auto& [k, v] : j.at("entity_type_map").items()) {
            auto t = world::entity_type_from(k);
            if (!t) throw BindingError("entity_type_map: unknown entity type '" + k + "'");
            b.entity_type_map[*t] = v.get<std::string>();
        }
        for (const auto& [k, v] : j.at("relation_pred_map").items()) {
            auto t = world::relation_type_from(k);
            if (!t) throw BindingError("relation_pred_map: unknown relation type '" + k + "'");
            b.relation_pred_map[*t] = {v.at("predicate").get<std::string>(), v.at("args").get<std::vector<std::string>>()};
        }
        b.property_pred_map = j.value("property_pred_map", std::map<std::string, std::string>{});
        b.flag_pred_map = j.value("flag_pred_map", std::map<std::string, std::string>{});
        const json& loc = j.at("locations");
        for (const auto& name : loc.at("anchor_types")) {
            auto t = world::entity_type_from(name.get<std::string>());
            if (!t) throw BindingError("locations: unknown anchor type " + name.dump());
            b.locations.anchor_types.insert(*t);
        }
        b.locations.location_type = loc.value("location_type", b.locations.location_type);
        b.locations.object_prefix = loc.value("object_prefix", b.locations.object_prefix);
        if (loc.contains("open_area")) {
            b.locations.open_area_object = loc["open_area"].value("object", b.locations.open_area_object);
            b.locations.open_area_type = loc["open_area"].value("type", b.locations.open_area_type);
        }
        b.locations.at_predicate = loc.value("at_predicate", b.locations.at_predicate);
        b.locations.anchor_predicate = loc.value("anchor_predicate", b.locations.anchor_predicate);
        b.self_predicate = j.value("self_predicate", b.self_predicate);
        for (const auto& [name, v] : j.at("action_map").items()) {
            auto kind = action_kind_from(v.at("kind").get<std::string>());
            if (!kind) throw BindingError("action_map: unknown kind for '" + name + "'");
            ActionBinding ab{*kind, std::nullopt};
            if (v.contains("target")) ab.target = v["target"].get<std::size_t>();
            b.action_map[name] = ab;
        }
    } catch (const json::exception& e) {
        throw BindingError(std::string("binding: ") + e.what());
    }
    check_binding(b);
    return b;
}

DomainBinding load_binding_file(const std::string& path) {
    const std::string text = read_text(path, "binding");
    std::string domain_file;
    try {
        domain_file = json::parse(text).at("domain").get<std::string>();
    } catch (const json::exception& e) {
        throw BindingError(std::string("binding: ") + e.what());
    }
    std::filesystem::path domain_path = std::filesystem::path(path).parent_path() / domain_file;
    return load_binding(text, pddl::parse_domain(read_text(domain_path.string(), "domain")));
}

std::string data_dir() {
    if (const char* env = std::getenv("HYNPC_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return HYNPC_DATA_DIR;
}

DomainBinding default_binding() { return load_binding_file(data_dir() + "/firefighter_binding.json"); }

world::EnvAction map_plan_action(const DomainBinding& binding, const planner::GroundAction& action,
                                 const std::string& actor, const LocationTable& locations) {
    auto it = binding.action_map.find(action.schema);
    if (it == binding.action_map.end()) throw BindingError("no environment action for schema '" + action.schema + "'");
    const ActionBinding& ab = it->second;
    world::EnvAction env{ab.kind, actor, {}, std::nullopt};
    if (ab.target) {
        if (*ab.target >= action.args.size()) throw BindingError("plan action " + action.str() + " lacks its target");
        env.target = action.args[*ab.target];
    }
    if (ab.kind == world::ActionKind::move_to) {
        auto loc = locations.find(env.target);
        if (loc == locations.end()) throw BindingError("unknown location '" + env.target + "' in " + action.str());
        env.point = loc->second;
    }
    return env;
}

std::string TraceEvent::to_json() const {
    nlohmann::ordered_json j;
    j["tick"] = tick;
    j["agent"] = agent;
    j["kind"] = kind;
    j["payload"] = payload;
    return j.dump();
}

}  // namespace hynpc::agent

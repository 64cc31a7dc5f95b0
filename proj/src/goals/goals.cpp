#include "hynpc/goals.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hynpc::goals {

using world::EntityType;
using world::RelationType;

namespace {

Condition property(const char* name) {
    Condition c;
    c.kind = ConditionKind::has_property;
    c.name = name;
    return c;
}

LiteralTemplate lit(std::string predicate, std::vector<std::string> args) {
    return {true, std::move(predicate), std::move(args)};
}

std::string substitute(const std::string& text, const std::vector<std::string>& bindings) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '{') {
            auto close = text.find('}', i);
            if (close != std::string::npos && close > i + 1) {
                std::string digits = text.substr(i + 1, close - i - 1);
                if (std::all_of(digits.begin(), digits.end(), ::isdigit) && digits.size() < 6) {
                    std::size_t k = std::stoul(digits);
                    if (k < bindings.size()) {
                        out += bindings[k];
                        i = close;
                        continue;
                    }
                }
            }
        }
        out += text[i];
    }
    return out;
}

void check_placeholders(const std::string& text, std::size_t slots, const std::string& goal) {
    for (std::size_t i = text.find('{'); i != std::string::npos; i = text.find('{', i + 1)) {
        auto close = text.find('}', i);
        if (close == std::string::npos) continue;
        std::string digits = text.substr(i + 1, close - i - 1);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) continue;
        if (digits.size() >= 6 || std::stoul(digits) >= slots) {
            throw GoalError("goal '" + goal + "': placeholder {" + digits + "} has no slot");
        }
    }
}

bool type_in(EntityType t, const std::vector<EntityType>& types) {
    return types.empty() || std::find(types.begin(), types.end(), t) != types.end();
}

bool test(const Condition& c, const world::WorldState& w, const std::vector<std::string>& bound) {
    bool result = true;
    const world::Entity* e = c.slot < bound.size() ? w.find(bound[c.slot]) : nullptr;
    switch (c.kind) {
        case ConditionKind::always: result = true; break;
        case ConditionKind::entity_of_type:
            if (c.exists) {
                result = std::any_of(w.entities.begin(), w.entities.end(),
                                     [&](const auto& kv) { return type_in(kv.second.type, c.types); });
            } else {
                result = e != nullptr && type_in(e->type, c.types);
            }
            break;
        case ConditionKind::has_property: result = e != nullptr && e->flag(c.name); break;
        case ConditionKind::world_flag: result = w.flags.count(c.name) > 0; break;
        case ConditionKind::has_relation:
            result = e != nullptr && std::any_of(w.relations.begin(), w.relations.end(), [&](const auto& kv) {
                         const auto& r = kv.second;
                         return r.type == c.relation && (c.as_pred ? r.pred : r.succ) == e->uid;
                     });
            break;
    }
    return c.negated ? !result : result;
}

bool applicable(const GeneralGoal& g, const world::WorldState& w, const std::vector<std::string>& bound) {
    if (g.applicability.empty()) return true;
    return std::any_of(g.applicability.begin(), g.applicability.end(), [&](const auto& conj) {
        return std::all_of(conj.begin(), conj.end(), [&](const Condition& c) { return test(c, w, bound); });
    });
}

GroundGoalOption make_option(const GeneralGoal& g, const world::WorldState& w, std::vector<std::string> bound) {
    GroundGoalOption o;
    o.goal = g.name;
    o.id = g.name;
    if (!bound.empty()) {
        o.id += "(";
        for (std::size_t i = 0; i < bound.size(); ++i) o.id += (i ? "," : "") + bound[i];
        o.id += ")";
    }
    o.bindings = bound;
    for (const auto& types : g.witnesses) {
        std::string witness;
        for (const auto& [uid, e] : w.entities) {
            if (type_in(e.type, types)) {
                witness = uid;
                break;
            }
        }
        if (witness.empty()) throw GoalError("goal " + o.id + ": no entity available to bind a witness slot");
        bound.push_back(witness);
    }
    o.phrase = substitute(g.phrase, bound);
    for (const auto& t : g.ap_goal) {
        pddl::Literal l{t.positive, {t.predicate, {}}};
        for (const auto& a : t.args) l.atom.args.push_back(substitute(a, bound));
        o.ap_goal.push_back(std::move(l));
    }
    return o;
}

void enumerate(const GeneralGoal& g, const world::WorldState& w, std::vector<std::string>& bound,
               std::vector<GroundGoalOption>& out) {
    if (bound.size() == g.params.size()) {
        if (applicable(g, w, bound)) out.push_back(make_option(g, w, bound));
        return;
    }
    for (const auto& [uid, e] : w.entities) {
        if (!type_in(e.type, g.params[bound.size()])) continue;
        bound.push_back(uid);
        enumerate(g, w, bound, out);
        bound.pop_back();
    }
}

}  // namespace

std::vector<GeneralGoal> builtin_registry() {
    std::vector<GeneralGoal> r;
    r.push_back({std::string(kDoNothing), {}, {}, {}, "Do nothing", {}});

    r.push_back({"SavePerson",
                 {{EntityType::person}},
                 {{property("trapped")}, {property("carried")}},
                 {{EntityType::safe_zone}},
                 "Take {0} out of the fire",
                 {lit("inside", {"{0}", "{1}"})}});

    r.push_back({"PutOutFire", {{EntityType::fire}}, {}, {}, "Put out {0}", {lit("extinguished", {"{0}"})}});

    Condition injured;
    injured.kind = ConditionKind::has_relation;
    injured.relation = RelationType::injured;
    r.push_back({"HealPerson", {{EntityType::person}}, {{injured}}, {}, "Heal {0}", {lit("healed", {"{0}"})}});

    Condition not_called;
    not_called.kind = ConditionKind::world_flag;
    not_called.name = std::string(world::kFirefightersCalled);
    not_called.negated = true;
    Condition fire_somewhere;
    fire_somewhere.kind = ConditionKind::entity_of_type;
    fire_somewhere.types = {EntityType::fire};
    fire_somewhere.exists = true;
    r.push_back({"CallFirefighters", {}, {{not_called, fire_somewhere}}, {}, "Call the firefighters", {lit("firefighters-called", {})}});
    return r;
}

void check_goal(const GeneralGoal& goal) {
    if (goal.name.empty()) throw GoalError("goal with empty name");
    const std::size_t slots = goal.params.size() + goal.witnesses.size();
    check_placeholders(goal.phrase, slots, goal.name);
    for (const auto& t : goal.ap_goal) {
        if (t.predicate.empty()) throw GoalError("goal '" + goal.name + "': literal without predicate");
        for (const auto& a : t.args) check_placeholders(a, slots, goal.name);
    }
    for (const auto& conj : goal.applicability) {
        for (const auto& c : conj) {
            bool needs_slot = c.kind != ConditionKind::always && c.kind != ConditionKind::world_flag && !c.exists;
            if (needs_slot && c.slot >= goal.params.size()) {
                throw GoalError("goal '" + goal.name + "': condition refers to missing slot " + std::to_string(c.slot));
            }
        }
    }
}

std::vector<GroundGoalOption> instantiate_all(const world::WorldState& world, const std::vector<GeneralGoal>& registry) {
    std::vector<GroundGoalOption> out;
    auto nothing = std::find_if(registry.begin(), registry.end(), [](const auto& g) { return g.name == kDoNothing; });
    const GeneralGoal fallback{std::string(kDoNothing), {}, {}, {}, "Do nothing", {}};
    out.push_back(make_option(nothing == registry.end() ? fallback : *nothing, world, {}));
    for (const auto& g : registry) {
        if (g.name == kDoNothing) continue;
        std::vector<std::string> bound;
        enumerate(g, world, bound, out);
    }
    return out;
}

std::vector<pddl::Literal> planner_goal_of(const GroundGoalOption& option) { return option.ap_goal; }

namespace {

using nlohmann::json;

std::vector<EntityType> read_types(const json& j, const std::string& where) {
    std::vector<EntityType> out;
    if (!j.is_array()) throw GoalError(where + ": expected a list of entity types");
    for (const auto& t : j) {
        auto type = t.is_string() ? world::entity_type_from(t.get<std::string>()) : std::nullopt;
        if (!type) throw GoalError(where + ": unknown entity type " + t.dump());
        out.push_back(*type);
    }
    return out;
}

Condition read_condition(const json& j, const std::string& where) {
    static const std::map<std::string, ConditionKind> kinds = {
        {"entity-of-type", ConditionKind::entity_of_type}, {"has-relation", ConditionKind::has_relation},
        {"has-property", ConditionKind::has_property},     {"world-flag", ConditionKind::world_flag},
        {"always", ConditionKind::always},
    };
    Condition c;
    auto kind = kinds.find(j.value("kind", ""));
    if (kind == kinds.end()) throw GoalError(where + ": unknown condition kind");
    c.kind = kind->second;
    if (j.contains("slot") && j["slot"] == "any") {
        c.exists = true;
    } else {
        c.slot = j.value("slot", 0u);
    }
    c.negated = j.value("negated", false);
    c.name = j.value("name", "");
    if (c.exists && c.kind != ConditionKind::entity_of_type) {
        throw GoalError(where + ": only entity-of-type accepts \"slot\": \"any\"");
    }
    if (c.kind == ConditionKind::entity_of_type) c.types = read_types(j.value("types", json::array()), where);
    if (c.kind == ConditionKind::has_relation) {
        auto rel = world::relation_type_from(j.value("relation", ""));
        if (!rel) throw GoalError(where + ": unknown relation type");
        c.relation = *rel;
        c.as_pred = j.value("role", "succ") == "pred";
    }
    if ((c.kind == ConditionKind::has_property || c.kind == ConditionKind::world_flag) && c.name.empty()) {
        throw GoalError(where + ": condition needs a name");
    }
    return c;
}

GeneralGoal read_goal(const json& j) {
    GeneralGoal g;
    g.name = j.value("name", "");
    const std::string where = "goal '" + g.name + "'";
    for (const auto& p : j.value("params", json::array())) g.params.push_back(read_types(p, where));
    for (const auto& w : j.value("witnesses", json::array())) g.witnesses.push_back(read_types(w, where));
    for (const auto& conj : j.value("applicability", json::array())) {
        std::vector<Condition> cs;
        for (const auto& c : conj) cs.push_back(read_condition(c, where));
        g.applicability.push_back(std::move(cs));
    }
    g.phrase = j.value("phrase", "");
    for (const auto& l : j.value("ap_goal", json::array())) {
        LiteralTemplate t;
        t.positive = l.value("positive", true);
        t.predicate = l.value("predicate", "");
        t.args = l.value("args", std::vector<std::string>{});
        g.ap_goal.push_back(std::move(t));
    }
    check_goal(g);
    return g;
}

}  // namespace

std::vector<GeneralGoal> load_registry(std::string_view json_text) {
    try {
        json doc = json::parse(json_text);
        std::vector<GeneralGoal> registry;
        if (!doc.value("replace_builtins", false)) registry = builtin_registry();
        for (const auto& entry : doc.value("goals", json::array())) {
            GeneralGoal g = read_goal(entry);
            auto same = std::find_if(registry.begin(), registry.end(), [&](const auto& x) { return x.name == g.name; });
            if (same != registry.end()) {
                *same = std::move(g);
            } else {
                registry.push_back(std::move(g));
            }
        }
        return registry;
    } catch (const json::exception& e) {
        throw GoalError(std::string("goal registry: ") + e.what());
    }
}

std::vector<GeneralGoal> load_registry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GoalError("cannot open goal registry '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return load_registry(text.str());
}

}  // namespace hynpc::goals

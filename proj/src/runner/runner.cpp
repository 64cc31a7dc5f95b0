#include "hynpc/runner.hpp"

#include "hynpc/chat.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

namespace hynpc::runner {

using nlohmann::ordered_json;

std::map<std::string, reasoner::PersonalityProfile> preset_profiles() {
    return {
        {"CI", {"", "person", "I am trapped inside a burning car. My priority is to get out of the fire alive."}},
        {"CO",
         {"", "person",
          "My duty is to prioritize safety above all. I want to help, but if there is someone more qualified to do "
          "it, I won't do anything that could endanger myself."}},
        {"FP", {"", "firefighter", "My duty is to put out fires and, above all, to save people."}},
        {"FF", {"", "firefighter", "My duty is to save people and, above all, to put out fires."}},
        {"PA", {"", "paramedic", "My duty is to heal injured people and to keep everyone safe from harm."}},
    };
}

reasoner::PersonalityProfile preset_profile(const std::string& code, const std::string& agent_name) {
    auto presets = preset_profiles();
    auto it = presets.find(code);
    if (it == presets.end()) {
        std::string valid;
        for (const auto& [k, _] : presets) valid += (valid.empty() ? "" : ", ") + k;
        throw ConfigError("unknown profile '" + code + "' (valid: " + valid + ")");
    }
    it->second.agent_name = agent_name;
    return it->second;
}

std::string llm_endpoint(const RunConfig& config) {
    if (!config.llm_url.empty()) return config.llm_url;
    if (const char* env = std::getenv("HYNPC_LLM_URL"); env != nullptr && *env != '\0') return env;
    return "http://localhost:1234";
}

std::unique_ptr<reasoner::Backend> make_backend(const std::string& spec, const RunConfig& config) {
    try {
        if (spec.rfind("scripted:", 0) == 0) return std::make_unique<reasoner::ScriptedBackend>(spec.substr(9));
        if (spec.rfind("replay:", 0) == 0) {
            return std::make_unique<reasoner::ReplayBackend>(reasoner::ReplayBackend::from_file(spec.substr(7)));
        }
        if (spec == "llm") {
            return std::make_unique<chat::ChatBackend>(llm_endpoint(config), config.llm_timeout, config.llm_model);
        }
        if (spec.rfind("llm:", 0) == 0) {
            return std::make_unique<chat::ChatBackend>(spec.substr(4), config.llm_timeout, config.llm_model);
        }
    } catch (const std::exception& e) {
        throw ConfigError("backend '" + spec + "': " + e.what());
    }
    throw ConfigError("unknown backend '" + spec + "' (expected scripted:<policy>, replay:<file>, llm or llm:<url>)");
}

bool termination_reached(const std::string& predicate, const world::WorldState& world) {
    if (predicate == "fire-extinguished") {
        return std::none_of(world.entities.begin(), world.entities.end(),
                            [](const auto& e) { return e.second.type == world::EntityType::fire; });
    }
    if (predicate == "firefighters-called") return world.flags.count(std::string(world::kFirefightersCalled)) > 0;
    if (predicate.rfind("safe:", 0) == 0) {
        const std::string uid = predicate.substr(5);
        for (const auto* r : world.relations_of(world::RelationType::inside_of)) {
            const world::Entity* zone = world.find(r->pred);
            if (r->succ == uid && zone != nullptr && zone->type == world::EntityType::safe_zone) return true;
        }
        return false;
    }
    throw ConfigError("unknown termination predicate '" + predicate +
                      "' (expected fire-extinguished, firefighters-called or safe:<uid>)");
}

std::string RunSummary::to_json() const {
    ordered_json j;
    j["ticks"] = ticks;
    j["terminated"] = terminated;
    j["fire_extinguished"] = fire_extinguished();
    j["fires_remaining"] = fires_remaining;
    j["people_in_safe_zone"] = people_in_safe_zone;
    j["firefighters_called"] = firefighters_called;
    j["rethinks"] = rethinks;
    j["replans"] = replans;
    j["actions"] = actions;
    j["llm_calls"] = model_calls;
    j["warnings"] = warnings;
    j["invariant_violations"] = invariant_violations;
    j["agents"] = ordered_json::array();
    for (const auto& a : agents) {
        ordered_json x;
        x["uid"] = a.uid;
        x["goal_history"] = a.goal_history;
        x["final_goal"] = a.final_goal ? ordered_json(*a.final_goal) : ordered_json(nullptr);
        x["rethinks"] = a.rethinks;
        x["replans"] = a.replans;
        x["actions"] = a.actions;
        x["warnings"] = a.warnings;
        x["llm_calls"] = a.model_calls;
        j["agents"].push_back(x);
    }
    return j.dump(2);
}

namespace {

struct Slot {
    std::unique_ptr<reasoner::Backend> backend;
    std::unique_ptr<reasoner::RecordingBackend> recorder;
    std::unique_ptr<agent::AgentController> controller;
    AgentSummary summary;

    reasoner::Backend& active() { return recorder ? static_cast<reasoner::Backend&>(*recorder) : *backend; }
};

// Carrying exclusivity and conservation (only fires extinguished this tick may vanish).
std::size_t check_invariants(const world::WorldState& before, const world::StepResult& after,
                             const std::vector<world::EnvAction>& submissions) {
    std::size_t violations = 0;
    std::map<std::string, int> carried;
    for (const auto* r : after.world.relations_of(world::RelationType::carrying)) {
        if (++carried[r->succ] > 1) ++violations;
        if (after.world.entities.at(r->succ).position != after.world.entities.at(r->pred).position) ++violations;
    }
    std::set<std::string> extinguished;
    for (const auto& a : submissions) {
        if (a.kind == world::ActionKind::extinguish_fire && after.statuses.at(a.actor).state == world::ActionStatus::State::done) {
            extinguished.insert(a.target);
        }
    }
    for (const auto& [uid, e] : before.entities) {
        if (!after.world.entities.count(uid) && !(e.type == world::EntityType::fire && extinguished.count(uid))) {
            ++violations;
        }
    }
    for (const auto& [uid, _] : after.world.entities) {
        if (!before.entities.count(uid)) ++violations;
    }
    return violations;
}

}  // namespace

RunSummary run(const RunConfig& config) {
    if (config.max_ticks < 1) throw ConfigError("max_ticks must be at least 1");
    world::WorldState world;
    agent::DomainBinding binding;
    std::vector<goals::GeneralGoal> registry;
    try {
        world = world::load_scenario_file(config.scenario_path, {config.strict_scenario});
        binding = config.binding_path.empty() ? agent::default_binding() : agent::load_binding_file(config.binding_path);
        registry = config.goals_path.empty() ? goals::builtin_registry() : goals::load_registry_file(config.goals_path);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }

    if (config.termination == Termination::predicate) termination_reached(config.until, world);

    std::vector<AgentSpec> specs = config.agents;
    std::sort(specs.begin(), specs.end(), [](const auto& a, const auto& b) { return a.uid < b.uid; });
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const AgentSpec& spec = specs[i];
        if (i > 0 && specs[i - 1].uid == spec.uid) throw ConfigError("agent '" + spec.uid + "' configured twice");
        const world::Entity* e = world.find(spec.uid);
        if (e == nullptr) throw ConfigError("agent '" + spec.uid + "' is not in the scenario");
        if (!world::is_agent_type(e->type)) {
            throw ConfigError("entity '" + spec.uid + "' is a " + std::string(world::to_string(e->type)) +
                              " and cannot act");
        }
        reasoner::PersonalityProfile profile;
        if (spec.traits) {
            profile = {spec.uid, spec.agent_type.value_or("person"), *spec.traits};
            if (profile.traits.empty()) throw ConfigError("agent '" + spec.uid + "': empty traits");
        } else {
            profile = preset_profile(spec.profile, spec.uid);
        }
        Slot slot;
        slot.backend = make_backend(spec.backend, config);
        if (!config.record_path.empty()) slot.recorder = std::make_unique<reasoner::RecordingBackend>(*slot.backend);
        agent::ControllerOptions options;
        options.search = config.search;
        options.prompt_cap = config.prompt_cap;
        slot.controller = std::make_unique<agent::AgentController>(spec.uid, profile, binding, registry, options);
        slot.summary.uid = spec.uid;
        slots.push_back(std::move(slot));
    }

    for (const auto& [uid, e] : world.entities) {
        bool configured = std::any_of(specs.begin(), specs.end(), [&](const AgentSpec& s) { return s.uid == uid; });
        if (e.running && world::is_agent_type(e.type) && !configured) {
            throw ConfigError("running agent '" + uid + "' has no profile and backend");
        }
    }

    RunSummary summary;
    for (const auto& [uid, e] : world.entities) summary.fires_initial += e.type == world::EntityType::fire;
    auto emit = [&](const agent::TraceEvent& ev) { summary.trace.push_back(ev.to_json()); };

    int idle_run = 0;
    for (int t = 0; t < config.max_ticks; ++t) {
        agent::TraceEvent marker{world.tick, "", "tick", ordered_json::object()};
        if (t == 0) {
            marker.payload["seed"] = config.seed;
            marker.payload["scenario"] = config.scenario_path;
        }
        emit(marker);

        std::vector<world::EnvAction> submissions;
        for (auto& slot : slots) {
            agent::IterationOutcome outcome = slot.controller->update(world, slot.active());
            for (const auto& ev : outcome.events) {
                emit(ev);
                if (ev.kind == "warning") ++slot.summary.warnings;
            }
            slot.summary.rethinks += outcome.rethought;
            slot.summary.replans += outcome.replanned;
            slot.summary.actions += outcome.emitted.has_value();
            if (slot.controller->current_action()) submissions.push_back(*slot.controller->current_action());
        }

        world::StepResult next = world::step(world, submissions);
        for (auto& slot : slots) {
            auto status = next.statuses.find(slot.controller->uid());
            if (status == next.statuses.end()) continue;
            slot.controller->observe(status->second);
            emit({world.tick, slot.controller->uid(), "action_status",
                  {{"action", slot.controller->current_action()->str()}, {"status", status->second.str()}}});
        }
        if (std::size_t broken = check_invariants(world, next, submissions); broken > 0) {
            summary.invariant_violations += broken;
            emit({world.tick, "", "invariant_violation", {{"count", broken}}});
        }
        world = std::move(next.world);
        summary.ticks = t + 1;

        if (config.termination == Termination::predicate && termination_reached(config.until, world)) {
            summary.terminated = true;
            break;
        }
        if (config.termination == Termination::all_idle) {
            bool all_idle = std::all_of(slots.begin(), slots.end(), [](const Slot& s) { return s.controller->idle(); });
            idle_run = all_idle ? idle_run + 1 : 0;
            if (idle_run >= config.idle_ticks) {
                summary.terminated = true;
                break;
            }
        }
    }
    if (config.termination == Termination::fixed_ticks) summary.terminated = true;

    for (const auto& [uid, e] : world.entities) {
        if (e.type == world::EntityType::fire) summary.fires_remaining.push_back(uid);
    }
    for (const auto* r : world.relations_of(world::RelationType::inside_of)) {
        const world::Entity* zone = world.find(r->pred);
        if (zone != nullptr && zone->type == world::EntityType::safe_zone) summary.people_in_safe_zone.push_back(r->succ);
    }
    std::sort(summary.people_in_safe_zone.begin(), summary.people_in_safe_zone.end());
    summary.firefighters_called = world.flags.count(std::string(world::kFirefightersCalled)) > 0;

    std::map<std::string, std::string> recorded;
    for (auto& slot : slots) {
        slot.summary.goal_history = slot.controller->goal_history();
        if (slot.controller->current_goal()) slot.summary.final_goal = slot.controller->current_goal()->id;
        slot.summary.model_calls = slot.backend->model_calls();
        summary.rethinks += slot.summary.rethinks;
        summary.replans += slot.summary.replans;
        summary.actions += slot.summary.actions;
        summary.warnings += slot.summary.warnings;
        summary.model_calls += slot.summary.model_calls;
        if (slot.recorder) recorded.insert(slot.recorder->recorded().begin(), slot.recorder->recorded().end());
        summary.agents.push_back(slot.summary);
    }

    if (!config.trace_path.empty()) {
        std::ofstream out(config.trace_path);
        if (!out) throw ConfigError("cannot write trace '" + config.trace_path + "'");
        for (const auto& line : summary.trace) out << line << '\n';
    }
    if (!config.record_path.empty()) {
        std::ofstream out(config.record_path);
        if (!out) throw ConfigError("cannot write recording '" + config.record_path + "'");
        out << reasoner::to_jsonl(recorded);
    }
    return summary;
}

}  // namespace hynpc::runner

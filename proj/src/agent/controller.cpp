#include "hynpc/agent.hpp"

#include <algorithm>
#include <cmath>

namespace hynpc::agent {

using nlohmann::ordered_json;

AgentController::AgentController(std::string uid, reasoner::PersonalityProfile profile, const DomainBinding& binding,
                                 std::vector<goals::GeneralGoal> registry, ControllerOptions options)
    : uid_(std::move(uid)),
      stream_(std::move(profile), options.prompt_cap),
      binding_(binding),
      registry_(std::move(registry)),
      options_(options) {
    problem_.name = "agent-problem";
    problem_.domain_name = binding_.domain.name;
}

bool AgentController::sync_ap_problem(const world::WorldState& world) {
    const LocationBinding& lb = binding_.locations;
    std::vector<pddl::TypedName> objects;
    std::set<pddl::Atom> init;
    std::set<std::string> skipped;

    for (const auto& [uid, e] : world.entities) {
        auto type = binding_.entity_type_map.find(e.type);
        if (type == binding_.entity_type_map.end()) {
            if (options_.strict) {
                throw BindingError("entity '" + uid + "' has unmapped type " + std::string(world::to_string(e.type)));
            }
            skipped.insert(uid);
            continue;
        }
        objects.push_back({uid, type->second});
    }

    // Anchors keep the location of their first sighting, even after they move.
    std::vector<std::pair<std::string, std::string>> anchors;
    for (const auto& [uid, e] : world.entities) {
        if (!lb.anchor_types.count(e.type) || skipped.count(uid)) continue;
        std::string loc = lb.object_prefix + uid;
        locations_.emplace(loc, e.position);
        anchors.emplace_back(uid, loc);
    }
    std::sort(anchors.begin(), anchors.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [uid, loc] : anchors) {
        objects.push_back({loc, lb.location_type});
        init.insert({lb.anchor_predicate, {uid, loc}});
    }
    objects.push_back({lb.open_area_object, lb.open_area_type});

    for (const auto& [uid, r] : world.relations) {
        auto rb = binding_.relation_pred_map.find(r.type);
        if (rb == binding_.relation_pred_map.end()) {
            if (options_.strict) {
                throw BindingError("relation '" + uid + "' has unmapped type " + std::string(world::to_string(r.type)));
            }
            continue;
        }
        if (skipped.count(r.pred) || skipped.count(r.succ)) continue;
        pddl::Atom atom{rb->second.predicate, {}};
        for (const auto& role : rb->second.args) atom.args.push_back(role == "pred" ? r.pred : r.succ);
        init.insert(std::move(atom));
    }

    for (const auto& [uid, e] : world.entities) {
        if (skipped.count(uid)) continue;
        for (const auto& [prop, value] : e.properties) {
            auto pred = binding_.property_pred_map.find(prop);
            if (value && pred != binding_.property_pred_map.end()) init.insert({pred->second, {uid}});
        }
        if (e.flag("carried")) continue;
        std::string place = lb.open_area_object;
        double best = world.config.arrival_radius;
        for (const auto& [anchor, loc] : anchors) {
            double d = world::distance(e.position, locations_.at(loc));
            if (d <= best && (place == lb.open_area_object || d < best)) {
                best = d;
                place = loc;
            }
        }
        init.insert({lb.at_predicate, {uid, place}});
    }

    for (const auto& [flag, pred] : binding_.flag_pred_map) {
        if (world.flags.count(flag)) init.insert({pred, {}});
    }
    if (world.find(uid_) != nullptr && !skipped.count(uid_)) init.insert({binding_.self_predicate, {uid_}});

    bool changed = objects != problem_.objects || init != problem_.init;
    problem_.objects = std::move(objects);
    problem_.init = std::move(init);
    return changed;
}

namespace {

ordered_json ids_of(const std::vector<goals::GroundGoalOption>& options) {
    ordered_json out = ordered_json::array();
    for (const auto& o : options) out.push_back(o.id);
    return out;
}

}  // namespace

IterationOutcome AgentController::update(const world::WorldState& world, reasoner::Backend& backend) {
    IterationOutcome out;
    const std::uint64_t tick = world.tick;
    auto event = [&](std::string kind, ordered_json payload) {
        out.events.push_back({tick, uid_, std::move(kind), std::move(payload)});
    };

    // 1. Options for the current world.
    const std::vector<goals::GroundGoalOption> options = goals::instantiate_all(world, registry_);

    // 2. Memories and planning problem.
    const std::size_t first_new = stream_.memories().size();
    const reasoner::ChangeReport report = stream_.sync(world::perceptions(world, uid_), tick);
    for (std::size_t i = first_new; i < stream_.memories().size(); ++i) {
        const auto& m = stream_.memories()[i];
        event(m.retirement ? "memory_retired" : "memory_added", {{"key", m.key}, {"text", m.text}});
    }
    const bool problem_changed = sync_ap_problem(world);

    // 3. Re-think when memories changed (or a goal proved infeasible last time).
    bool goal_changed = false;
    std::string reason;
    if (report.total() > 0) {
        reason = "memories_changed";
    } else if (force_rethink_) {
        reason = "infeasible_goal";
    }
    if (!reason.empty()) {
        std::vector<goals::GroundGoalOption> offered;
        for (const auto& o : options) {
            if (!excluded_.count(o.id)) offered.push_back(o);
        }
        ordered_json excluded = ordered_json::array();
        for (const auto& id : excluded_) excluded.push_back(id);
        event("rethink", {{"reason", reason}, {"options", ids_of(offered)}, {"excluded", excluded}});

        std::optional<std::string> current_action;
        if (action_) current_action = action_->describe();
        const std::string prompt = reasoner::build_prompt(stream_, current_action, offered);
        std::optional<std::string> previous;
        if (goal_) previous = goal_->id;
        reasoner::GoalChoice choice = reasoner::select_goal(backend, prompt, offered, previous);
        if (choice.warning) event("warning", {{"reason", "no_parsable_choice"}, {"message", *choice.warning}});
        const goals::GroundGoalOption& chosen = offered[choice.option_index - 1];
        event("goal_set", {{"option", chosen.id},
                           {"phrase", chosen.phrase},
                           {"index", choice.option_index},
                           {"changed", choice.changed},
                           {"attempts", choice.attempts},
                           {"response", choice.raw_response}});
        if (choice.changed) {
            goal_ = chosen;
            history_.push_back(chosen.id);
            goal_changed = true;
        }
        excluded_.clear();
        force_rethink_ = false;
        out.rethought = true;
    }

    // 4. Re-plan when the goal or the problem changed (or the last action failed).
    ordered_json reasons = ordered_json::array();
    if (goal_changed) reasons.push_back("goal_changed");
    if (problem_changed) reasons.push_back("problem_changed");
    if (action_failed_) reasons.push_back("action_failed");
    if (!reasons.empty() && goal_) {
        problem_.goal = goals::planner_goal_of(*goal_);
        planner::SearchResult result;
        try {
            result = planner::solve(binding_.domain, problem_, options_.search);
        } catch (const pddl::ParseError& e) {
            result.status = planner::SearchStatus::unsolvable;
            event("warning", {{"reason", "ill_typed_goal"}, {"message", e.what()}});
        }
        plan_.clear();
        ordered_json steps = ordered_json::array();
        if (result.status == planner::SearchStatus::solved) {
            for (auto& a : result.plan.actions) {
                steps.push_back(a.str());
                plan_.push_back(std::move(a));
            }
        }
        event("replanned", {{"reasons", reasons},
                            {"goal", goal_->id},
                            {"status", std::string(planner::to_string(result.status))},
                            {"expansions", result.expansions},
                            {"plan", steps}});
        if (result.status != planner::SearchStatus::solved) {
            excluded_.insert(goal_->id);
            force_rethink_ = true;
            event("warning", {{"reason", "goal_infeasible"}, {"option", goal_->id}});
        }
        action_failed_ = false;
        out.replanned = true;
    }

    // 5. Next action when the plan changed or the previous action finished.
    if (out.replanned || (last_status_ && world::action_complete(*last_status_))) {
        last_status_.reset();
        action_.reset();
        if (!plan_.empty()) {
            action_ = map_plan_action(binding_, plan_.front(), uid_, locations_);
            event("action_emitted", {{"action", action_->str()}, {"plan_step", plan_.front().str()}});
            plan_.pop_front();
            out.emitted = action_;
        }
    }
    return out;
}

void AgentController::observe(const world::ActionStatus& status) {
    last_status_ = status;
    if (status.state == world::ActionStatus::State::failed) action_failed_ = true;
}

}  // namespace hynpc::agent

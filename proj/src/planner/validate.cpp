#include "hynpc/planner.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>

namespace hynpc::planner {

namespace {

using AtomSet = std::set<pddl::Atom>;

pddl::Atom instantiate(const pddl::Atom& atom, const std::map<std::string, std::string>& binding) {
    pddl::Atom out{atom.predicate, {}};
    for (const auto& term : atom.args) {
        auto it = binding.find(term);
        out.args.push_back(it == binding.end() ? term : it->second);
    }
    return out;
}

bool holds(const pddl::Literal& literal, const AtomSet& state) {
    return state.count(literal.atom) > 0 ? literal.positive : !literal.positive;
}

}  // namespace

ValidationReport validate_plan(const pddl::Domain& domain, const pddl::ProblemSpec& problem, const Plan& plan) {
    ValidationReport report;
    try {
        pddl::check_problem(problem, domain);
    } catch (const pddl::ParseError& e) {
        report.message = e.what();
        return report;
    }

    AtomSet state = problem.init;
    for (std::size_t step = 0; step < plan.actions.size(); ++step) {
        const GroundAction& action = plan.actions[step];
        const std::string label = "step " + std::to_string(step + 1) + " " + action.str();
        const pddl::ActionSchema* schema = domain.find_action(action.schema);
        if (schema == nullptr) {
            report.failed_step = step;
            report.message = label + ": unknown action";
            return report;
        }
        if (schema->params.size() != action.args.size()) {
            report.failed_step = step;
            report.message = label + ": wrong number of arguments";
            return report;
        }
        std::map<std::string, std::string> binding;
        for (std::size_t i = 0; i < action.args.size(); ++i) {
            const pddl::TypedName* object = problem.find_object(action.args[i]);
            if (object == nullptr || !domain.types.is_subtype(object->type, schema->params[i].type)) {
                report.failed_step = step;
                report.message = label + ": argument '" + action.args[i] + "' is undeclared or ill-typed";
                return report;
            }
            binding[schema->params[i].name] = action.args[i];
        }
        for (const auto& literal : schema->precondition) {
            pddl::Literal ground{literal.positive, instantiate(literal.atom, binding)};
            if (!holds(ground, state)) {
                report.failed_step = step;
                report.failed_literal = ground;
                report.message = label + ": precondition " + pddl::to_string(ground) + " does not hold";
                return report;
            }
        }
        std::vector<pddl::Atom> adds;
        for (const auto& literal : schema->effect) {
            pddl::Atom atom = instantiate(literal.atom, binding);
            if (literal.positive) {
                adds.push_back(std::move(atom));
            } else {
                state.erase(atom);
            }
        }
        state.insert(adds.begin(), adds.end());
    }

    for (const auto& literal : problem.goal) {
        if (!holds(literal, state)) {
            report.failed_step = plan.actions.size();
            report.failed_literal = literal;
            report.message = "goal " + pddl::to_string(literal) + " does not hold after the plan";
            return report;
        }
    }
    report.valid = true;
    return report;
}

namespace {

struct OracleAction {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::size_t> pre_pos, pre_neg, add, del;
};

class OracleGrounder {
public:
    OracleGrounder(const pddl::Domain& domain, const pddl::ProblemSpec& problem)
        : domain_(domain), problem_(problem) {}

    std::size_t id(const pddl::Atom& atom) { return ids_.emplace(atom, ids_.size()).first->second; }
    std::size_t num_atoms() const { return ids_.size(); }

    std::vector<OracleAction> ground_all() {
        std::vector<OracleAction> out;
        for (const auto& schema : domain_.actions) {
            std::vector<std::string> chosen;
            expand(schema, chosen, out);
        }
        return out;
    }

private:
    void expand(const pddl::ActionSchema& schema, std::vector<std::string>& chosen, std::vector<OracleAction>& out) {
        if (chosen.size() == schema.params.size()) {
            std::map<std::string, std::string> binding;
            for (std::size_t i = 0; i < chosen.size(); ++i) binding[schema.params[i].name] = chosen[i];
            OracleAction action{schema.name, chosen, {}, {}, {}, {}};
            for (const auto& l : schema.precondition) {
                (l.positive ? action.pre_pos : action.pre_neg).push_back(id(instantiate(l.atom, binding)));
            }
            for (const auto& l : schema.effect) {
                (l.positive ? action.add : action.del).push_back(id(instantiate(l.atom, binding)));
            }
            out.push_back(std::move(action));
            return;
        }
        const std::string& type = schema.params[chosen.size()].type;
        for (const auto& object : problem_.objects) {
            if (!domain_.types.is_subtype(object.type, type)) continue;
            chosen.push_back(object.name);
            expand(schema, chosen, out);
            chosen.pop_back();
        }
    }

    const pddl::Domain& domain_;
    const pddl::ProblemSpec& problem_;
    std::map<pddl::Atom, std::size_t> ids_;
};

}  // namespace

SearchResult bfs_optimal(const pddl::Domain& domain, const pddl::ProblemSpec& problem, std::size_t state_bound) {
    pddl::check_problem(problem, domain);
    OracleGrounder grounder(domain, problem);
    std::vector<std::size_t> init_ids;
    for (const auto& atom : problem.init) init_ids.push_back(grounder.id(atom));
    std::vector<std::pair<std::size_t, bool>> goal;
    for (const auto& l : problem.goal) goal.emplace_back(grounder.id(l.atom), l.positive);
    const std::vector<OracleAction> actions = grounder.ground_all();
    const std::size_t n = grounder.num_atoms();

    using Bits = std::string;  // one byte per atom, '1' = true
    auto is_goal = [&](const Bits& s) {
        return std::all_of(goal.begin(), goal.end(), [&](const auto& g) { return (s[g.first] == '1') == g.second; });
    };

    std::vector<Bits> states;
    std::vector<std::pair<std::size_t, std::size_t>> parent;  // (state, action)
    std::unordered_map<Bits, std::size_t> seen;
    Bits init(n, '0');
    for (auto id : init_ids) init[id] = '1';

    SearchResult result;
    auto extract = [&](std::size_t index) {
        std::vector<GroundAction> steps;
        for (std::size_t i = index; i != 0; i = parent[i].first) {
            const OracleAction& a = actions[parent[i].second];
            steps.push_back(GroundAction{a.name, a.args, {}, {}, {}, {}});
        }
        std::reverse(steps.begin(), steps.end());
        result.status = SearchStatus::solved;
        result.plan.actions = std::move(steps);
        return result;
    };

    states.push_back(init);
    parent.emplace_back(0, 0);
    seen.emplace(init, 0);
    if (is_goal(init)) return extract(0);
    if (state_bound < 1) {
        result.status = SearchStatus::bound_exceeded;
        return result;
    }

    std::deque<std::size_t> frontier{0};
    while (!frontier.empty()) {
        const std::size_t current = frontier.front();
        frontier.pop_front();
        ++result.expansions;
        for (std::size_t k = 0; k < actions.size(); ++k) {
            const OracleAction& a = actions[k];
            const Bits& s = states[current];
            bool ok = std::all_of(a.pre_pos.begin(), a.pre_pos.end(), [&](std::size_t id) { return s[id] == '1'; }) &&
                      std::none_of(a.pre_neg.begin(), a.pre_neg.end(), [&](std::size_t id) { return s[id] == '1'; });
            if (!ok) continue;
            Bits next = s;
            for (auto id : a.del) next[id] = '0';
            for (auto id : a.add) next[id] = '1';
            if (seen.count(next)) continue;
            if (states.size() >= state_bound) {
                result.status = SearchStatus::bound_exceeded;
                return result;
            }
            const std::size_t index = states.size();
            seen.emplace(next, index);
            states.push_back(std::move(next));
            parent.emplace_back(current, k);
            if (is_goal(states[index])) return extract(index);
            frontier.push_back(index);
        }
    }
    result.status = SearchStatus::unsolvable;
    return result;
}

}  // namespace hynpc::planner

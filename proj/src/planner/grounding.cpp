#include "hynpc/planner.hpp"

#include <algorithm>

namespace hynpc::planner {

AtomId AtomTable::intern(const pddl::Atom& atom) {
    auto [it, inserted] = index_.emplace(atom, static_cast<AtomId>(atoms_.size()));
    if (inserted) atoms_.push_back(atom);
    return it->second;
}

std::optional<AtomId> AtomTable::find(const pddl::Atom& atom) const {
    auto it = index_.find(atom);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string GroundAction::str() const {
    std::string out = "(" + schema;
    for (const auto& a : args) out += " " + a;
    return out + ")";
}

bool SearchState::contains(AtomId id) const { return std::binary_search(atoms.begin(), atoms.end(), id); }

std::size_t SearchStateHash::operator()(const SearchState& s) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (AtomId id : s.atoms) {
        h ^= id;
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
}

namespace {

void normalize(std::vector<AtomId>& ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

pddl::Atom substitute(const pddl::Atom& atom, const std::map<std::string, std::string>& binding) {
    pddl::Atom out{atom.predicate, {}};
    out.args.reserve(atom.args.size());
    for (const auto& term : atom.args) {
        auto it = binding.find(term);
        out.args.push_back(it == binding.end() ? term : it->second);
    }
    return out;
}

}  // namespace

GroundTask ground(const pddl::Domain& domain, const pddl::ProblemSpec& problem) {
    pddl::check_problem(problem, domain);
    GroundTask task;

    for (const auto& atom : problem.init) task.init.atoms.push_back(task.atoms.intern(atom));
    normalize(task.init.atoms);
    for (const auto& literal : problem.goal) {
        AtomId id = task.atoms.intern(literal.atom);
        (literal.positive ? task.goal.positive : task.goal.negative).push_back(id);
    }
    normalize(task.goal.positive);
    normalize(task.goal.negative);

    for (const auto& schema : domain.actions) {
        std::vector<std::vector<const std::string*>> candidates;
        bool empty = false;
        for (const auto& param : schema.params) {
            std::vector<const std::string*> fit;
            for (const auto& object : problem.objects) {
                if (domain.types.is_subtype(object.type, param.type)) fit.push_back(&object.name);
            }
            empty = empty || fit.empty();
            candidates.push_back(std::move(fit));
        }
        if (empty) continue;

        std::vector<std::size_t> cursor(schema.params.size(), 0);
        bool done = false;
        while (!done) {
            std::map<std::string, std::string> binding;
            GroundAction action;
            action.schema = schema.name;
            for (std::size_t i = 0; i < cursor.size(); ++i) {
                binding[schema.params[i].name] = *candidates[i][cursor[i]];
                action.args.push_back(*candidates[i][cursor[i]]);
            }
            for (const auto& literal : schema.precondition) {
                AtomId id = task.atoms.intern(substitute(literal.atom, binding));
                (literal.positive ? action.pre_pos : action.pre_neg).push_back(id);
            }
            for (const auto& literal : schema.effect) {
                AtomId id = task.atoms.intern(substitute(literal.atom, binding));
                (literal.positive ? action.add : action.del).push_back(id);
            }
            normalize(action.pre_pos);
            normalize(action.pre_neg);
            normalize(action.add);
            normalize(action.del);
            // Substitutions can identify a deleted and an added atom (go l1 l1): the add wins.
            std::vector<AtomId> del;
            std::set_difference(action.del.begin(), action.del.end(), action.add.begin(), action.add.end(),
                                std::back_inserter(del));
            action.del = std::move(del);
            task.actions.push_back(std::move(action));

            // Odometer increment over the candidate lists.
            std::size_t pos = cursor.size();
            for (;;) {
                if (pos == 0) {
                    done = true;
                    break;
                }
                --pos;
                if (++cursor[pos] < candidates[pos].size()) break;
                cursor[pos] = 0;
            }
        }
    }

    std::stable_sort(task.actions.begin(), task.actions.end(), [](const GroundAction& a, const GroundAction& b) {
        if (a.schema != b.schema) return a.schema < b.schema;
        return a.args < b.args;
    });
    return task;
}

bool applicable(const GroundAction& action, const SearchState& state) {
    if (!std::includes(state.atoms.begin(), state.atoms.end(), action.pre_pos.begin(), action.pre_pos.end())) {
        return false;
    }
    return std::none_of(action.pre_neg.begin(), action.pre_neg.end(),
                        [&](AtomId id) { return state.contains(id); });
}

bool goal_satisfied(const Goal& goal, const SearchState& state) {
    if (!std::includes(state.atoms.begin(), state.atoms.end(), goal.positive.begin(), goal.positive.end())) {
        return false;
    }
    return std::none_of(goal.negative.begin(), goal.negative.end(), [&](AtomId id) { return state.contains(id); });
}

SearchState apply(const GroundAction& action, const SearchState& state) {
    if (!applicable(action, state)) {
        throw PreconditionViolated("action " + action.str() + " is not applicable");
    }
    std::vector<AtomId> kept;
    kept.reserve(state.atoms.size());
    std::set_difference(state.atoms.begin(), state.atoms.end(), action.del.begin(), action.del.end(),
                        std::back_inserter(kept));
    SearchState next;
    next.atoms.reserve(kept.size() + action.add.size());
    std::set_union(kept.begin(), kept.end(), action.add.begin(), action.add.end(), std::back_inserter(next.atoms));
    return next;
}

}  // namespace hynpc::planner

#include "hynpc/planner.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

namespace hynpc::planner {

std::string_view to_string(SearchStatus status) {
    switch (status) {
        case SearchStatus::solved: return "solved";
        case SearchStatus::unsolvable: return "unsolvable";
        case SearchStatus::resource_exhausted: return "resource-exhausted";
        case SearchStatus::bound_exceeded: return "bound-exceeded";
    }
    return "unknown";
}

AdditiveHeuristic::AdditiveHeuristic(std::span<const GroundAction> actions, std::size_t num_atoms)
    : consumers_(num_atoms), num_atoms_(num_atoms) {
    ops_.reserve(actions.size());
    for (const auto& action : actions) {
        auto index = static_cast<std::uint32_t>(ops_.size());
        ops_.push_back(Op{action.add, static_cast<std::uint32_t>(action.pre_pos.size())});
        if (action.pre_pos.empty()) unconditional_.push_back(index);
        for (AtomId p : action.pre_pos) consumers_.at(p).push_back(index);
    }
}

double AdditiveHeuristic::operator()(const SearchState& state, const Goal& goal) const {
    using Entry = std::pair<double, AtomId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::vector<double> cost(num_atoms_, kInfinity);
    std::vector<double> op_cost(ops_.size(), 1.0);
    std::vector<std::uint32_t> unsatisfied(ops_.size());
    for (std::size_t i = 0; i < ops_.size(); ++i) unsatisfied[i] = ops_[i].num_pre;

    auto relax = [&](std::uint32_t op) {
        for (AtomId q : ops_[op].add) {
            if (op_cost[op] < cost[q]) {
                cost[q] = op_cost[op];
                queue.emplace(cost[q], q);
            }
        }
    };

    for (AtomId p : state.atoms) {
        cost.at(p) = 0.0;
        queue.emplace(0.0, p);
    }
    for (std::uint32_t op : unconditional_) relax(op);
    while (!queue.empty()) {
        auto [c, p] = queue.top();
        queue.pop();
        if (c > cost[p]) continue;
        for (std::uint32_t op : consumers_[p]) {
            op_cost[op] += c;
            if (--unsatisfied[op] == 0) relax(op);
        }
    }

    double total = 0.0;
    for (AtomId g : goal.positive) {
        if (g >= num_atoms_ || cost[g] == kInfinity) return kInfinity;
        total += cost[g];
    }
    return total;
}

double h_add(const SearchState& state, const Goal& goal, std::span<const GroundAction> actions) {
    std::size_t num_atoms = 0;
    auto bump = [&](const std::vector<AtomId>& ids) {
        for (AtomId id : ids) num_atoms = std::max<std::size_t>(num_atoms, id + 1);
    };
    bump(state.atoms);
    bump(goal.positive);
    for (const auto& a : actions) {
        bump(a.pre_pos);
        bump(a.add);
    }
    return AdditiveHeuristic(actions, num_atoms)(state, goal);
}

namespace {

// Drops actions whose preconditions mention atoms no action changes and that have the
// wrong truth value initially. Such actions can never fire.
std::vector<std::uint32_t> relevant_actions(const GroundTask& task) {
    std::vector<char> fluent(task.atoms.size(), 0);
    for (const auto& a : task.actions) {
        for (AtomId id : a.add) fluent[id] = 1;
        for (AtomId id : a.del) fluent[id] = 1;
    }
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < task.actions.size(); ++i) {
        const auto& a = task.actions[i];
        bool ok = std::all_of(a.pre_pos.begin(), a.pre_pos.end(),
                              [&](AtomId id) { return fluent[id] || task.init.contains(id); });
        ok = ok && std::all_of(a.pre_neg.begin(), a.pre_neg.end(),
                               [&](AtomId id) { return fluent[id] || !task.init.contains(id); });
        if (ok) out.push_back(i);
    }
    return out;
}

struct Node {
    SearchState state;
    std::size_t parent;
    std::uint32_t action;
    std::size_t g;
    bool closed = false;
};

struct OpenEntry {
    double primary;
    double secondary;
    std::uint64_t seq;
    std::size_t node;

    bool operator>(const OpenEntry& o) const {
        if (primary != o.primary) return primary > o.primary;
        if (secondary != o.secondary) return secondary > o.secondary;
        return seq > o.seq;
    }
};

constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

}  // namespace

SearchResult solve(const GroundTask& task, const SearchConfig& config) {
    SearchResult result;
    const std::vector<std::uint32_t> relevant = relevant_actions(task);
    std::vector<GroundAction> pruned;
    pruned.reserve(relevant.size());
    for (auto i : relevant) pruned.push_back(task.actions[i]);
    const AdditiveHeuristic additive(pruned, task.atoms.size());
    const bool a_star = config.strategy == Strategy::a_star;

    auto evaluate = [&](const SearchState& s) {
        return config.heuristic == HeuristicKind::h_add ? additive(s, task.goal) : 0.0;
    };
    auto entry = [&](double h, std::size_t g, std::uint64_t seq, std::size_t node) {
        if (a_star) return OpenEntry{static_cast<double>(g) + h, h, seq, node};
        return OpenEntry{h, 0.0, seq, node};
    };

    std::vector<Node> nodes;
    std::unordered_map<SearchState, std::size_t, SearchStateHash> best;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
    std::uint64_t seq = 0;

    const double h0 = evaluate(task.init);
    if (h0 == kInfinity) return result;
    nodes.push_back(Node{task.init, kNoParent, 0, 0});
    best.emplace(task.init, 0);
    open.push(entry(h0, 0, seq++, 0));

    while (!open.empty()) {
        const std::size_t index = open.top().node;
        open.pop();
        if (nodes[index].closed || best.at(nodes[index].state) != index) continue;

        if (goal_satisfied(task.goal, nodes[index].state)) {
            std::vector<GroundAction> steps;
            for (std::size_t i = index; nodes[i].parent != kNoParent; i = nodes[i].parent) {
                steps.push_back(pruned[nodes[i].action]);
            }
            std::reverse(steps.begin(), steps.end());
            result.status = SearchStatus::solved;
            result.plan.actions = std::move(steps);
            return result;
        }
        if (result.expansions >= config.max_expansions) {
            result.status = SearchStatus::resource_exhausted;
            return result;
        }
        ++result.expansions;
        nodes[index].closed = true;

        for (std::uint32_t op = 0; op < pruned.size(); ++op) {
            if (!applicable(pruned[op], nodes[index].state)) continue;
            SearchState next = apply(pruned[op], nodes[index].state);
            const std::size_t g = nodes[index].g + 1;
            auto found = best.find(next);
            if (found != best.end()) {
                // Greedy search never reopens; A* reopens on a strictly cheaper path.
                if (!a_star || nodes[found->second].g <= g) continue;
            }
            const double h = evaluate(next);
            if (h == kInfinity) continue;
            const std::size_t child = nodes.size();
            nodes.push_back(Node{next, index, op, g});
            best.insert_or_assign(std::move(next), child);
            open.push(entry(h, g, seq++, child));
        }
    }
    result.status = SearchStatus::unsolvable;
    return result;
}

SearchResult solve(const pddl::Domain& domain, const pddl::ProblemSpec& problem, const SearchConfig& config) {
    return solve(ground(domain, problem), config);
}

}  // namespace hynpc::planner

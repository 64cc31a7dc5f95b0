#pragma once

#include "hynpc/pddl.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hynpc::planner {

using AtomId = std::uint32_t;

/// Interns ground atoms to dense ids.
class AtomTable {
public:
    AtomId intern(const pddl::Atom& atom);
    std::optional<AtomId> find(const pddl::Atom& atom) const;
    const pddl::Atom& atom(AtomId id) const { return atoms_.at(id); }
    std::size_t size() const { return atoms_.size(); }

private:
    std::vector<pddl::Atom> atoms_;
    std::map<pddl::Atom, AtomId> index_;
};

/// One type-consistent substitution of an action schema. All id lists are sorted and
/// duplicate-free; `add` and `del` are disjoint (an atom both deleted and added is kept).
struct GroundAction {
    std::string schema;
    std::vector<std::string> args;
    std::vector<AtomId> pre_pos;
    std::vector<AtomId> pre_neg;
    std::vector<AtomId> add;
    std::vector<AtomId> del;

    /// `(schema arg1 arg2 ...)`
    std::string str() const;
};

/// Canonical state: sorted ids of the atoms that hold (closed world).
struct SearchState {
    std::vector<AtomId> atoms;

    bool contains(AtomId id) const;
    bool operator==(const SearchState&) const = default;
};

struct SearchStateHash {
    std::size_t operator()(const SearchState& s) const noexcept;
};

struct Goal {
    std::vector<AtomId> positive;
    std::vector<AtomId> negative;
};

/// A grounded problem: atom table, ground actions in tie-break order, initial state, goal.
struct GroundTask {
    AtomTable atoms;
    std::vector<GroundAction> actions;
    SearchState init;
    Goal goal;
};

/// Grounds every schema over every type-consistent substitution (self-loops included).
/// Actions are ordered lexicographically by schema name, then by argument list.
/// Throws pddl::ParseError when the problem does not type-check.
GroundTask ground(const pddl::Domain& domain, const pddl::ProblemSpec& problem);

bool applicable(const GroundAction& action, const SearchState& state);
bool goal_satisfied(const Goal& goal, const SearchState& state);

class PreconditionViolated : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (state \ del) ∪ add. Throws PreconditionViolated if the action is not applicable.
SearchState apply(const GroundAction& action, const SearchState& state);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Additive delete-relaxation heuristic. Negative goal literals cost 0.
double h_add(const SearchState& state, const Goal& goal, std::span<const GroundAction> actions);

/// h_add with the action/atom index precomputed, for repeated evaluation during search.
class AdditiveHeuristic {
public:
    AdditiveHeuristic(std::span<const GroundAction> actions, std::size_t num_atoms);
    double operator()(const SearchState& state, const Goal& goal) const;

private:
    struct Op {
        std::vector<AtomId> add;
        std::uint32_t num_pre = 0;
    };
    std::vector<Op> ops_;
    std::vector<std::vector<std::uint32_t>> consumers_;
    std::vector<std::uint32_t> unconditional_;
    std::size_t num_atoms_;
};

enum class Strategy { greedy_best_first, a_star };
enum class HeuristicKind { h_add, h_zero };

struct SearchConfig {
    Strategy strategy = Strategy::greedy_best_first;
    HeuristicKind heuristic = HeuristicKind::h_add;
    std::size_t max_expansions = 100'000;
};

struct Plan {
    std::vector<GroundAction> actions;

    std::size_t cost() const { return actions.size(); }
};

enum class SearchStatus { solved, unsolvable, resource_exhausted, bound_exceeded };

std::string_view to_string(SearchStatus status);

struct SearchResult {
    SearchStatus status = SearchStatus::unsolvable;
    Plan plan;
    std::size_t expansions = 0;
};

/// Forward best-first search. Deterministic for a given configuration: successors are
/// generated in tie-break order and equal-priority nodes are expanded first-in first-out.
SearchResult solve(const GroundTask& task, const SearchConfig& config = {});
SearchResult solve(const pddl::Domain& domain, const pddl::ProblemSpec& problem, const SearchConfig& config = {});

struct ValidationReport {
    bool valid = false;
    /// 0-based index of the first inapplicable step; equals the plan length when every
    /// step applies but the goal fails.
    std::optional<std::size_t> failed_step;
    std::optional<pddl::Literal> failed_literal;
    std::string message;
};

/// Re-instantiates each step from its schema and arguments, applies it to the initial
/// state and checks the goal under the closed-world assumption.
ValidationReport validate_plan(const pddl::Domain& domain, const pddl::ProblemSpec& problem, const Plan& plan);

/// Breadth-first search for a length-optimal plan, exploring at most `state_bound`
/// distinct states. Shares no code with `ground`/`solve`; used as a test oracle.
SearchResult bfs_optimal(const pddl::Domain& domain, const pddl::ProblemSpec& problem, std::size_t state_bound);

}  // namespace hynpc::planner

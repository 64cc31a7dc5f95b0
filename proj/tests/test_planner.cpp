#include "hynpc/planner.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace hynpc;
using namespace hynpc::planner;
using test_support::fixture;
using test_support::read_file;

namespace {

struct Loaded {
    pddl::Domain domain;
    pddl::ProblemSpec problem;
};

Loaded load(const std::string& domain_file, const std::string& problem_file) {
    Loaded l;
    l.domain = pddl::parse_domain(read_file(fixture(domain_file)));
    l.problem = pddl::parse_problem(read_file(fixture(problem_file)), l.domain);
    return l;
}

std::vector<std::string> names(const Plan& plan) {
    std::vector<std::string> out;
    for (const auto& a : plan.actions) out.push_back(a.str());
    return out;
}

// Plain fixpoint iteration of the additive costs, written without a priority queue.
double naive_h_add(const GroundTask& task, const SearchState& state) {
    std::vector<double> cost(task.atoms.size(), kInfinity);
    for (AtomId id : state.atoms) cost[id] = 0.0;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& a : task.actions) {
            double c = 1.0;
            for (AtomId p : a.pre_pos) c += cost[p];
            if (c == kInfinity) continue;
            for (AtomId q : a.add) {
                if (c < cost[q]) {
                    cost[q] = c;
                    changed = true;
                }
            }
        }
    }
    double total = 0.0;
    for (AtomId g : task.goal.positive) total += cost[g];
    return total;
}

}  // namespace

TEST_CASE("grounding enumerates type-consistent substitutions in tie-break order") {
    Loaded l = load("simplified_domain.pddl", "simplified_problem.pddl");
    GroundTask task = ground(l.domain, l.problem);
    std::vector<std::string> got;
    for (const auto& a : task.actions) got.push_back(a.str());
    CHECK(got == std::vector<std::string>{
                     "(go_from_to l1 l1)", "(go_from_to l1 l2)", "(go_from_to l2 l1)", "(go_from_to l2 l2)",
                     "(putOutFire c1 e1 l1)", "(putOutFire c1 e1 l2)", "(takeExtinguisher e1 l1)",
                     "(takeExtinguisher e1 l2)"});
    // go l1 l1 deletes and adds the same atom: the add wins.
    CHECK(task.actions[0].del.empty());
    CHECK(task.actions[0].add.size() == 1);
    CHECK(task.init.atoms.size() == 4);
    CHECK(task.goal.positive.empty());
    CHECK(task.goal.negative.size() == 1);
}

TEST_CASE("apply and applicability") {
    Loaded l = load("simplified_domain.pddl", "simplified_problem.pddl");
    GroundTask task = ground(l.domain, l.problem);
    const GroundAction& take_l2 = task.actions[7];
    CHECK_FALSE(applicable(take_l2, task.init));
    CHECK_THROWS_AS(apply(take_l2, task.init), PreconditionViolated);
    SearchState s = apply(task.actions[1], task.init);  // go l1 l2
    CHECK(applicable(take_l2, s));
    CHECK(s.contains(*task.atoms.find({"FirefighterIn", {"l2"}})));
    CHECK_FALSE(s.contains(*task.atoms.find({"FirefighterIn", {"l1"}})));
    CHECK(std::is_sorted(s.atoms.begin(), s.atoms.end()));
}

TEST_CASE("h_add on the positive simplified problem") {
    Loaded l = load("simplified_positive_domain.pddl", "simplified_positive_problem.pddl");
    GroundTask task = ground(l.domain, l.problem);
    // go (1) + take (1) + putOutFire (1): Extinguished c1 costs 3.
    CHECK(h_add(task.init, task.goal, task.actions) == doctest::Approx(3.0));
    CHECK(naive_h_add(task, task.init) == doctest::Approx(3.0));
    AdditiveHeuristic h(task.actions, task.atoms.size());
    CHECK(h(task.init, task.goal) == doctest::Approx(3.0));
}

TEST_CASE("h_add: negative goals cost nothing, unreachable goals are infinite") {
    Loaded l = load("simplified_domain.pddl", "simplified_problem.pddl");
    GroundTask task = ground(l.domain, l.problem);
    CHECK(h_add(task.init, task.goal, task.actions) == 0.0);
    Goal unreachable{{*task.atoms.find({"In", {"c1", "l2"}})}, {}};
    CHECK(h_add(task.init, unreachable, task.actions) == kInfinity);
}

TEST_CASE("h_add matches a naive fixpoint on generated instances") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        auto inst = test_support::random_instance(rng);
        GroundTask task = ground(inst.domain, inst.problem);
        const double fast = h_add(task.init, task.goal, task.actions);
        const double slow = naive_h_add(task, task.init);
        if (slow == kInfinity) {
            CHECK(fast == kInfinity);
        } else {
            CHECK(fast == doctest::Approx(slow));
        }
    }
}

TEST_CASE("reference plan for the simplified problem") {
    Loaded l = load("simplified_domain.pddl", "simplified_problem.pddl");
    const std::vector<std::string> expected{"(go_from_to l1 l2)", "(takeExtinguisher e1 l2)", "(go_from_to l2 l1)",
                                            "(putOutFire c1 e1 l1)"};
    SearchResult gbfs = solve(l.domain, l.problem);
    REQUIRE(gbfs.status == SearchStatus::solved);
    CHECK(names(gbfs.plan) == expected);
    CHECK(validate_plan(l.domain, l.problem, gbfs.plan).valid);

    SearchConfig astar{Strategy::a_star, HeuristicKind::h_add, 100'000};
    SearchResult a = solve(l.domain, l.problem, astar);
    REQUIRE(a.status == SearchStatus::solved);
    CHECK(a.plan.cost() == 4);

    SearchResult oracle = bfs_optimal(l.domain, l.problem, 100'000);
    REQUIRE(oracle.status == SearchStatus::solved);
    CHECK(oracle.plan.cost() == 4);
}

TEST_CASE("second extinguisher shortens the plan") {
    Loaded l = load("simplified_domain.pddl", "simplified_two_extinguishers.pddl");
    SearchResult r = solve(l.domain, l.problem, {Strategy::a_star, HeuristicKind::h_zero, 100'000});
    REQUIRE(r.status == SearchStatus::solved);
    CHECK(names(r.plan) == std::vector<std::string>{"(takeExtinguisher e2 l1)", "(putOutFire c1 e2 l1)"});
}

TEST_CASE("unsolvable, exhausted and trivial problems") {
    Loaded l = load("simplified_domain.pddl", "simplified_unsolvable.pddl");
    CHECK(solve(l.domain, l.problem).status == SearchStatus::unsolvable);
    CHECK(bfs_optimal(l.domain, l.problem, 1000).status == SearchStatus::unsolvable);

    Loaded r = load("simplified_domain.pddl", "simplified_problem.pddl");
    SearchResult capped = solve(r.domain, r.problem, {Strategy::greedy_best_first, HeuristicKind::h_zero, 2});
    CHECK(capped.status == SearchStatus::resource_exhausted);
    CHECK(capped.expansions == 2);
    CHECK(bfs_optimal(r.domain, r.problem, 2).status == SearchStatus::bound_exceeded);

    r.problem.goal = {{true, {"FirefighterIn", {"l1"}}}};
    SearchResult trivial = solve(r.domain, r.problem);
    CHECK(trivial.status == SearchStatus::solved);
    CHECK(trivial.plan.actions.empty());
}

TEST_CASE("search is deterministic") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        auto inst = test_support::random_instance(rng);
        SearchResult a = solve(inst.domain, inst.problem);
        SearchResult b = solve(inst.domain, inst.problem);
        CHECK(a.status == b.status);
        CHECK(names(a.plan) == names(b.plan));
        CHECK(a.expansions == b.expansions);
    }
}

TEST_CASE("validate_plan reports the first failing step") {
    Loaded l = load("simplified_domain.pddl", "simplified_problem.pddl");
    GroundTask task = ground(l.domain, l.problem);
    auto action = [&](const std::string& schema, std::vector<std::string> args) {
        return GroundAction{schema, std::move(args), {}, {}, {}, {}};
    };

    Plan wrong_order{{action("takeExtinguisher", {"e1", "l2"}), action("go_from_to", {"l1", "l2"})}};
    ValidationReport r = validate_plan(l.domain, l.problem, wrong_order);
    CHECK_FALSE(r.valid);
    CHECK(r.failed_step == 0u);
    REQUIRE(r.failed_literal);
    CHECK(pddl::to_string(*r.failed_literal) == "(FirefighterIn l2)");

    Plan short_plan{{action("go_from_to", {"l1", "l2"}), action("takeExtinguisher", {"e1", "l2"})}};
    r = validate_plan(l.domain, l.problem, short_plan);
    CHECK_FALSE(r.valid);
    CHECK(r.failed_step == 2u);
    CHECK(pddl::to_string(*r.failed_literal) == "(not (IsBurning c1))");

    CHECK(validate_plan(l.domain, l.problem, Plan{{action("fly", {})}}).failed_step == 0u);
    CHECK(validate_plan(l.domain, l.problem, Plan{{action("go_from_to", {"l1"})}}).failed_step == 0u);
    CHECK(validate_plan(l.domain, l.problem, Plan{{action("go_from_to", {"l1", "c1"})}}).failed_step == 0u);
    CHECK(validate_plan(l.domain, l.problem, Plan{{action("go_from_to", {"l1", "zz"})}}).failed_step == 0u);
    CHECK_FALSE(validate_plan(l.domain, l.problem, Plan{}).valid);
}

TEST_CASE("solver agrees with the breadth-first oracle") {
    std::mt19937_64 rng(2024);
    int solvable = 0;
    for (int i = 0; i < 200; ++i) {
        auto inst = test_support::random_instance(rng);
        SearchResult oracle = bfs_optimal(inst.domain, inst.problem, 100'000);
        REQUIRE(oracle.status != SearchStatus::bound_exceeded);
        SearchResult gbfs = solve(inst.domain, inst.problem);
        SearchResult optimal = solve(inst.domain, inst.problem, {Strategy::a_star, HeuristicKind::h_zero, 1'000'000});
        CHECK((gbfs.status == SearchStatus::solved) == (oracle.status == SearchStatus::solved));
        CHECK((optimal.status == SearchStatus::solved) == (oracle.status == SearchStatus::solved));
        if (oracle.status != SearchStatus::solved) continue;
        ++solvable;
        CHECK(validate_plan(inst.domain, inst.problem, oracle.plan).valid);
        CHECK(validate_plan(inst.domain, inst.problem, gbfs.plan).valid);
        CHECK(validate_plan(inst.domain, inst.problem, optimal.plan).valid);
        CHECK(optimal.plan.cost() == oracle.plan.cost());
        CHECK(gbfs.plan.cost() >= oracle.plan.cost());
    }
    CHECK(solvable > 20);
}

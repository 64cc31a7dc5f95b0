// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "hynpc/chat.hpp"
#include "hynpc/goals.hpp"
#include "hynpc/planner.hpp"
#include "hynpc/reasoner.hpp"
#include "hynpc/runner.hpp"
#include "support.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace hynpc;
using nlohmann::json;
using test_support::fixture;
using test_support::read_file;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

class Failed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void expect(bool cond, const std::string& what) {
    if (!cond) throw Failed(what);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fs", s);
    return buf;
}

std::vector<json> parse_trace(const std::vector<std::string>& lines) {
    std::vector<json> out;
    for (const auto& l : lines) out.push_back(json::parse(l));
    return out;
}

Outcome reference_plan() {
    auto start = std::chrono::steady_clock::now();
    pddl::Domain d = pddl::parse_domain(read_file(fixture("simplified_domain.pddl")));
    pddl::ProblemSpec p = pddl::parse_problem(read_file(fixture("simplified_problem.pddl")), d);
    planner::SearchResult r = planner::solve(d, p);
    double t = seconds_since(start);
    expect(r.status == planner::SearchStatus::solved, "no plan found");
    expect(r.plan.cost() == 4, "plan length " + std::to_string(r.plan.cost()));
    expect(planner::validate_plan(d, p, r.plan).valid, "plan does not validate");
    std::multiset<std::string> schemas;
    for (const auto& a : r.plan.actions) schemas.insert(a.schema);
    expect(schemas == std::multiset<std::string>{"go_from_to", "go_from_to", "takeExtinguisher", "putOutFire"},
           "unexpected schemas");
    std::vector<std::string> steps;
    for (const auto& a : r.plan.actions) steps.push_back(a.str());
    const std::vector<std::string> reference{"(go_from_to l1 l2)", "(takeExtinguisher e1 l2)", "(go_from_to l2 l1)",
                                             "(putOutFire c1 e1 l1)"};
    expect(t < 1.0, "took " + fmt_seconds(t));
    std::string how = steps == reference ? "matches the reference sequence" : "same schemas as the reference";
    return {true, "length 4, " + how + ", " + fmt_seconds(t)};
}

Outcome oracle_agreement() {
    auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240501);
    const int instances = 600;
    int solvable = 0, within_3x = 0, astar_optimal = 0;
    for (int i = 0; i < instances; ++i) {
        auto inst = test_support::random_instance(rng, 50);
        expect(inst.problem.objects.size() <= 6, "generator produced too many objects");
        planner::SearchResult oracle = planner::bfs_optimal(inst.domain, inst.problem, 100'000);
        expect(oracle.status != planner::SearchStatus::bound_exceeded, "instance exceeds the state bound");
        planner::SearchResult greedy = planner::solve(inst.domain, inst.problem);
        planner::SearchResult astar = planner::solve(
            inst.domain, inst.problem, {planner::Strategy::a_star, planner::HeuristicKind::h_zero, 1'000'000});
        const bool has_plan = oracle.status == planner::SearchStatus::solved;
        expect((greedy.status == planner::SearchStatus::solved) == has_plan,
               "greedy disagrees with the oracle on instance " + std::to_string(i));
        expect((astar.status == planner::SearchStatus::solved) == has_plan,
               "A* disagrees with the oracle on instance " + std::to_string(i));
        if (!has_plan) continue;
        ++solvable;
        expect(planner::validate_plan(inst.domain, inst.problem, greedy.plan).valid, "invalid greedy plan");
        expect(planner::validate_plan(inst.domain, inst.problem, astar.plan).valid, "invalid A* plan");
        expect(planner::validate_plan(inst.domain, inst.problem, oracle.plan).valid, "invalid oracle plan");
        within_3x += greedy.plan.cost() <= 3 * oracle.plan.cost();
        astar_optimal += astar.plan.cost() == oracle.plan.cost();
    }
    double t = seconds_since(start);
    expect(solvable > 0, "no solvable instances");
    expect(within_3x * 100 >= solvable * 95,
           "greedy within 3x optimal on " + std::to_string(within_3x) + "/" + std::to_string(solvable));
    expect(astar_optimal == solvable,
           "A*+h_zero optimal on " + std::to_string(astar_optimal) + "/" + std::to_string(solvable));
    expect(t < 60.0, "took " + fmt_seconds(t));
    return {true, std::to_string(instances) + " instances, " + std::to_string(solvable) + " solvable, greedy <= 3x on " +
                      std::to_string(within_3x) + ", A* optimal on all, " + fmt_seconds(t)};
}

runner::RunConfig single(const std::string& policy, const std::string& profile) {
    runner::RunConfig c;
    c.scenario_path = fixture("firefighter_scenario.json");
    c.agents = {{"Sim_01_FireFighter_0", profile, "scripted:" + policy, std::nullopt, std::nullopt}};
    c.max_ticks = 50;
    return c;
}

Outcome end_to_end_rescue() {
    auto start = std::chrono::steady_clock::now();
    runner::RunSummary s = runner::run(single("save-first", "FP"));
    double t = seconds_since(start);
    expect(s.terminated, "did not terminate within 50 ticks");
    expect(std::count(s.people_in_safe_zone.begin(), s.people_in_safe_zone.end(), "Peter") == 1,
           "Peter is not inside the safe zone");

    auto events = parse_trace(s.trace);
    std::size_t rethinks_at_0 = 0;
    std::set<std::uint64_t> goal_change_ticks;
    for (const auto& e : events) {
        if (e["kind"] == "rethink" && e["tick"] == 0) ++rethinks_at_0;
        if (e["kind"] == "goal_set" && e["payload"]["changed"] == true) goal_change_ticks.insert(e["tick"].get<std::uint64_t>());
    }
    expect(rethinks_at_0 == 1, std::to_string(rethinks_at_0) + " rethinks at tick 0");
    std::size_t replans = 0;
    for (const auto& e : events) {
        if (e["kind"] != "replanned") continue;
        ++replans;
        for (const auto& reason : e["payload"]["reasons"]) {
            if (reason == "goal_changed") {
                expect(goal_change_ticks.count(e["tick"].get<std::uint64_t>()) == 1, "goal_changed replan without a goal change");
            } else {
                expect(reason == "problem_changed", "replan for " + reason.dump());
            }
        }
    }
    expect(s.invariant_violations == 0, "invariant violations");
    expect(t < 5.0, "took " + fmt_seconds(t));
    return {true, std::to_string(s.ticks) + " ticks, " + std::to_string(replans) + " replans, " + fmt_seconds(t)};
}

Outcome end_to_end_extinguish() {
    auto start = std::chrono::steady_clock::now();
    runner::RunSummary s = runner::run(single("fire-first", "FF"));
    double t = seconds_since(start);
    expect(s.fire_extinguished(), "fire still present");
    std::vector<std::string> actions;
    for (const auto& e : parse_trace(s.trace)) {
        if (e["kind"] == "action_emitted") actions.push_back(e["payload"]["action"]);
    }
    auto take = std::find(actions.begin(), actions.end(), "Take(Sim_01_FireExtinguisher_0)");
    auto put = std::find(actions.begin(), actions.end(), "ExtinguishFire(Sim_01_Fire_0)");
    expect(take != actions.end() && put != actions.end(), "missing Take or ExtinguishFire");
    expect(take < put, "ExtinguishFire precedes Take");
    expect(t < 5.0, "took " + fmt_seconds(t));
    return {true, std::to_string(s.ticks) + " ticks, Take before ExtinguishFire, " + fmt_seconds(t)};
}

Outcome memory_contract() {
    std::mt19937_64 rng(99);
    const int cases = 1000;
    for (int run = 0; run < cases; ++run) {
        reasoner::MemoryStream s({"a", "person", "t"});
        std::vector<reasoner::Memory> previous;
        const std::size_t steps = 1 + test_support::pick(rng, 10);
        for (std::uint64_t tick = 0; tick < steps; ++tick) {
            std::vector<world::Perception> current;
            for (int k = 0; k < 6; ++k) {
                if (test_support::coin(rng, 0.5)) current.push_back({"k" + std::to_string(k), "fact " + std::to_string(k), true});
            }
            std::map<std::string, std::string> live_before;
            for (const auto& m : previous) {
                if (m.live) live_before[m.key] = m.text;
            }
            reasoner::ChangeReport report = s.sync(current, tick);
            expect(s.sync(current, tick) == reasoner::ChangeReport{0, 0}, "second sync is not empty");
            const auto& mem = s.memories();
            expect(mem.size() == previous.size() + report.total(), "size does not match the report");
            for (std::size_t i = 0; i < previous.size(); ++i) {
                expect(mem[i].key == previous[i].key && mem[i].text == previous[i].text &&
                           mem[i].tick_added == previous[i].tick_added && mem[i].retirement == previous[i].retirement,
                       "prefix changed");
            }
            for (std::size_t i = previous.size(); i < mem.size(); ++i) {
                if (!mem[i].retirement) continue;
                auto orig = live_before.find(mem[i].key);
                expect(orig != live_before.end(), "retirement of a memory that was not live");
                expect(mem[i].text == orig->second + ": is no longer true", "wrong retirement text");
            }
            previous = mem;
        }
    }
    return {true, std::to_string(cases) + " random perception sequences"};
}

Outcome prompt_format() {
    world::WorldState w = world::load_scenario_file(fixture("firefighter_scenario.json"));
    reasoner::MemoryStream s(runner::preset_profile("FP", "Sim_01_FireFighter_0"));
    s.sync(world::perceptions(w, "Sim_01_FireFighter_0"), 0);
    auto options = goals::instantiate_all(w, goals::builtin_registry());
    const std::string prompt = reasoner::build_prompt(s, std::nullopt, options);
    expect(prompt == read_file(test_support::golden("fp_initial_prompt.txt")), "prompt differs from the golden file");
    expect(prompt.rfind("I am 'Sim_01_FireFighter_0', a firefighter.\n", 0) == 0, "identity line");
    expect(prompt.find("\nMy duty is to put out fires and, above all, to save people.\n") != std::string::npos,
           "trait sentence");
    bool do_nothing = false;
    for (std::size_t i = 0; i < options.size(); ++i) {
        expect(prompt.find("\n" + std::to_string(i + 1) + ". " + options[i].phrase + "\n") != std::string::npos,
               "option " + std::to_string(i + 1) + " missing");
        do_nothing |= options[i].goal == goals::kDoNothing;
    }
    expect(do_nothing, "DoNothing not offered");
    expect(prompt.size() >= 42 && prompt.substr(prompt.size() - 42) == "Indicate the number of the chosen answer.\n",
           "closing line");
    return {true, std::to_string(options.size()) + " options, golden snapshot matches"};
}

Outcome wire_protocol() {
    const std::string sample_answer =
        " As a firefighter, my priority  \n    is to save lives, so I would first \n    assess the situation and "
        "determine \n    the best course of action. In this \n    case, there is a person inside the \n    burning "
        "building, which means that \n    saving them should be my top priority. \n    Therefore, I would choose "
        "option 1:\n    Save p1. ";
    std::vector<goals::GroundGoalOption> options{{"DoNothing", "DoNothing", {}, "Do nothing", {}},
                                                 {"SavePerson(Peter)", "SavePerson", {"Peter"}, "Take Peter out", {}}};
    using std::chrono::milliseconds;

    chat::StubChatServer good([&](const std::string&) { return chat::StubChatServer::completion(sample_answer); });
    good.start();
    chat::ChatBackend backend(good.base_url(), milliseconds(5000));
    reasoner::GoalChoice c = reasoner::select_goal(backend, "prompt", options, std::nullopt);
    expect(c.option_index == 1, "sample response did not parse to option 1");
    json body = json::parse(good.requests().at(0));
    expect(body["temperature"] == 0, "temperature is not 0");
    expect(body["messages"].size() == 2, "request does not carry two messages");

    chat::StubChatServer confused([](const std::string&) { return chat::StubChatServer::completion("no idea"); });
    confused.start();
    chat::ChatBackend b2(confused.base_url(), milliseconds(5000));
    c = reasoner::select_goal(b2, "prompt", options, std::string("SavePerson(Peter)"));
    expect(confused.requests().size() == 2, "expected exactly one retry");
    expect(c.option_id == "SavePerson(Peter)" && !c.changed, "previous goal not kept");

    runner::RunConfig rc;
    rc.scenario_path = fixture("firefighter_scenario.json");
    rc.agents = {{"Sim_01_FireFighter_0", "FP", "llm", std::nullopt, std::nullopt}};
    rc.llm_url = confused.base_url();
    rc.llm_timeout = milliseconds(5000);
    rc.max_ticks = 5;
    runner::RunSummary s = runner::run(rc);
    bool warned = false;
    for (const auto& e : parse_trace(s.trace)) warned |= e["kind"] == "warning";
    expect(warned, "no warning event in the trace");
    expect(confused.requests().size() == 4, "run did not make exactly two requests");
    return {true, "temperature 0, two messages, sample text -> option 1, one retry then fallback with warning"};
}

Outcome goal_enumeration() {
    world::WorldState w = world::load_scenario_file(fixture("firefighter_scenario.json"));
    auto options = goals::instantiate_all(w, goals::builtin_registry());
    auto find = [&](const std::string& phrase) {
        return std::find_if(options.begin(), options.end(), [&](const auto& o) { return o.phrase == phrase; });
    };
    auto save = find("Take Peter out of the fire");
    expect(save != options.end(), "no rescue option");
    expect(find("Put out Sim_01_Fire_0") != options.end(), "no put-out option");
    expect(save->ap_goal.size() == 1 && pddl::to_string(save->ap_goal[0]) == "(inside Peter Sim_01_SafeZone_0)",
           "rescue goal is not bound to the safe zone");

    world::WorldState two = world::load_scenario_file(fixture("two_fire_scenario.json"));
    auto two_options = goals::instantiate_all(two, goals::builtin_registry());
    auto fires = std::count_if(two_options.begin(), two_options.end(), [](const auto& o) { return o.goal == "PutOutFire"; });
    expect(fires == 2, std::to_string(fires) + " PutOutFire options in the two-fire world");
    return {true, std::to_string(options.size()) + " initial options; two-fire world has 2 PutOutFire"};
}

Outcome multi_agent_determinism() {
    const std::string replay = "replay:" + fixture("four_agent_replay.jsonl");
    runner::RunConfig c;
    c.scenario_path = fixture("four_agent_scenario.json");
    c.agents = {{"Peter", "CI", replay, std::nullopt, std::nullopt},
                {"Sim_01_FireFighter_0", "FP", replay, std::nullopt, std::nullopt},
                {"Sim_01_FireFighter_1", "FF", replay, std::nullopt, std::nullopt},
                {"Sim_01_Paramedic_0", "PA", replay, std::nullopt, std::nullopt}};
    const auto dir = std::filesystem::temp_directory_path() / "hynpc_acceptance";
    std::filesystem::create_directories(dir);
    c.trace_path = (dir / "first.jsonl").string();
    runner::RunSummary a = runner::run(c);
    c.trace_path = (dir / "second.jsonl").string();
    runner::RunSummary b = runner::run(c);
    expect(a.terminated && b.terminated, "run did not terminate");
    expect(read_file((dir / "first.jsonl").string()) == read_file((dir / "second.jsonl").string()),
           "traces differ");
    expect(a.invariant_violations == 0 && b.invariant_violations == 0, "invariant violations");
    return {true, std::to_string(a.ticks) + " ticks, " + std::to_string(a.trace.size()) + " identical trace lines"};
}

Outcome parser_robustness() {
    const std::string domain_text = read_file(fixture("simplified_domain.pddl"));
    pddl::Domain d = pddl::parse_domain(domain_text);
    pddl::ProblemSpec p = pddl::parse_problem(read_file(fixture("simplified_problem.pddl")), d);
    expect(pddl::parse_domain(pddl::print_domain(d)) == d, "domain round trip");
    expect(pddl::parse_problem(pddl::print_problem(p), d) == p, "problem round trip");

    std::mt19937_64 rng(31337);
    const std::string alphabet = "()?-: \n\tabcdefghijklmnopqrstuvwxyz0123456789;";
    const int cases = 10'000;
    std::size_t rejected = 0;
    for (int i = 0; i < cases; ++i) {
        std::string text;
        if (i % 3 == 2) {
            // Mutate the real domain text.
            text = domain_text;
            const std::size_t edits = 1 + test_support::pick(rng, 4);
            for (std::size_t k = 0; k < edits; ++k) {
                text[test_support::pick(rng, text.size())] = static_cast<char>(test_support::pick(rng, 256));
            }
        } else {
            const std::size_t len = test_support::pick(rng, 160);
            for (std::size_t k = 0; k < len; ++k) {
                text.push_back(i % 3 == 0 ? alphabet[test_support::pick(rng, alphabet.size())]
                                          : static_cast<char>(test_support::pick(rng, 256)));
            }
        }
        try {
            pddl::parse_domain(text);
        } catch (const pddl::ParseError&) {
            ++rejected;
        }
        try {
            pddl::parse_problem(text, d);
        } catch (const pddl::ParseError&) {
            ++rejected;
        }
    }
    return {true, "fixtures round-trip; " + std::to_string(cases) + " fuzz cases without a crash (" +
                      std::to_string(rejected) + " ParseErrors)"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"reference plan", reference_plan},
        {"oracle agreement", oracle_agreement},
        {"end-to-end rescue", end_to_end_rescue},
        {"end-to-end extinguish", end_to_end_extinguish},
        {"memory diff contract", memory_contract},
        {"prompt format", prompt_format},
        {"wire protocol", wire_protocol},
        {"goal enumeration", goal_enumeration},
        {"multi-agent determinism", multi_agent_determinism},
        {"parser robustness", parser_robustness},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, e.what()};
        }
        failures += !o.ok;
        std::cout << (o.ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}

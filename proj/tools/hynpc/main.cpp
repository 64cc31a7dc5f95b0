// hynpc: planning, goal inspection, scenario runs and a stub chat server.
#include "hynpc/chat.hpp"
#include "hynpc/goals.hpp"
#include "hynpc/planner.hpp"
#include "hynpc/runner.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int cmd_plan(const std::string& domain_path, const std::string& problem_path, const std::string& strategy,
             const std::string& heuristic, std::size_t max_expansions) {
    using namespace hynpc;
    pddl::Domain domain = pddl::parse_domain(read_file(domain_path));
    std::vector<std::string> warnings;
    pddl::ProblemSpec problem = pddl::parse_problem(read_file(problem_path), domain, {false, &warnings});
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

    planner::SearchConfig config;
    config.strategy = strategy == "astar" ? planner::Strategy::a_star : planner::Strategy::greedy_best_first;
    config.heuristic = heuristic == "zero" ? planner::HeuristicKind::h_zero : planner::HeuristicKind::h_add;
    config.max_expansions = max_expansions;
    planner::SearchResult result = planner::solve(domain, problem, config);
    switch (result.status) {
        case planner::SearchStatus::solved:
            for (const auto& a : result.plan.actions) std::cout << a.str() << '\n';
            std::cerr << "; plan length " << result.plan.cost() << ", " << result.expansions << " expansions\n";
            return 0;
        case planner::SearchStatus::resource_exhausted:
            std::cerr << "resource exhausted after " << result.expansions << " expansions\n";
            return 3;
        default:
            std::cerr << "unsolvable\n";
            return 2;
    }
}

int cmd_goals(const std::string& scenario, const std::string& goals_path, bool lenient) {
    using namespace hynpc;
    world::WorldState world = world::load_scenario_file(scenario, {!lenient});
    auto registry = goals_path.empty() ? goals::builtin_registry() : goals::load_registry_file(goals_path);
    auto options = goals::instantiate_all(world, registry);
    for (std::size_t i = 0; i < options.size(); ++i) {
        std::string literals;
        for (const auto& l : options[i].ap_goal) literals += (literals.empty() ? "" : " ") + pddl::to_string(l);
        std::cout << i + 1 << ". " << options[i].phrase << "\t" << options[i].id << "\t" << literals << '\n';
    }
    return 0;
}

hynpc::runner::AgentSpec parse_agent(const std::string& text, const std::string& default_backend) {
    hynpc::runner::AgentSpec spec;
    auto first = text.find(':');
    if (first == std::string::npos || first == 0) {
        throw hynpc::runner::ConfigError("--agent expects UID:PROFILE[:BACKEND], got '" + text + "'");
    }
    spec.uid = text.substr(0, first);
    auto second = text.find(':', first + 1);
    spec.profile = text.substr(first + 1, second == std::string::npos ? std::string::npos : second - first - 1);
    spec.backend = second == std::string::npos ? default_backend : text.substr(second + 1);
    return spec;
}

// "UID=VALUE" pairs from --traits / --agent-type.
std::map<std::string, std::string> parse_pairs(const std::vector<std::string>& items, const std::string& flag) {
    std::map<std::string, std::string> out;
    for (const auto& item : items) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw hynpc::runner::ConfigError(flag + " expects UID=VALUE");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

hynpc::chat::StubChatServer* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid planning/LLM agents for a firefighting simulation"};
    app.require_subcommand(1);

    std::string domain_path, problem_path, strategy = "gbfs", heuristic = "hadd";
    std::size_t max_expansions = 100'000;
    auto* plan = app.add_subcommand("plan", "Solve a PDDL problem and print the plan");
    plan->add_option("--domain", domain_path, "Domain file")->required();
    plan->add_option("--problem", problem_path, "Problem file")->required();
    plan->add_option("--strategy", strategy, "gbfs or astar")->check(CLI::IsMember({"gbfs", "astar"}));
    plan->add_option("--heuristic", heuristic, "hadd or zero")->check(CLI::IsMember({"hadd", "zero"}));
    plan->add_option("--max-expansions", max_expansions, "Expansion budget");

    std::string scenario, goals_path;
    bool lenient = false;
    auto* goals_cmd = app.add_subcommand("goals", "List the goal options of a scenario's initial state");
    goals_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
    goals_cmd->add_option("--goals", goals_path, "Goal registry JSON");
    goals_cmd->add_flag("--lenient", lenient, "Load unknown agent types as generic entities");

    hynpc::runner::RunConfig config;
    std::vector<std::string> agents, traits, agent_types;
    std::string reasoner = "llm", termination = "idle";
    double llm_timeout = 30.0;
    std::string llm_model;
    auto* run = app.add_subcommand("run", "Run a scenario to termination");
    run->add_option("--scenario", config.scenario_path, "Scenario JSON")->required();
    run->add_option("--agent", agents, "UID:PROFILE[:BACKEND], repeatable")->required();
    run->add_option("--max-ticks", config.max_ticks, "Tick limit")->check(CLI::PositiveNumber);
    run->add_option("--seed", config.seed, "Recorded in the trace");
    run->add_option("--trace", config.trace_path, "JSONL trace output");
    run->add_option("--termination", termination, "idle, fixed or until")
        ->check(CLI::IsMember({"idle", "fixed", "until"}));
    run->add_option("--until", config.until, "fire-extinguished, firefighters-called or safe:<uid>");
    run->add_option("--idle-ticks", config.idle_ticks, "Idle ticks before stopping")->check(CLI::PositiveNumber);
    run->add_option("--reasoner", reasoner, "Default backend: scripted:<policy>, replay:<file>, llm or llm:<url>");
    run->add_option("--llm-url", config.llm_url, "Chat-completions base URL (else $HYNPC_LLM_URL)");
    run->add_option("--llm-timeout", llm_timeout, "Seconds")->check(CLI::PositiveNumber);
    run->add_option("--llm-model", llm_model, "Model name sent to the server");
    run->add_option("--record", config.record_path, "Save backend answers as replay JSONL");
    run->add_option("--binding", config.binding_path, "Domain binding JSON");
    run->add_option("--goals", config.goals_path, "Goal registry JSON");
    run->add_option("--traits", traits, "UID=TEXT custom personality, repeatable");
    run->add_option("--agent-type", agent_types, "UID=TYPE for custom personalities");
    run->add_option("--prompt-cap", config.prompt_cap, "Most recent memories in the prompt (0 = all)");
    run->add_flag("--lenient", lenient, "Load unknown agent types as generic entities");

    std::string host = "127.0.0.1", reply = "I choose option 1";
    int port = 8080;
    auto* stub = app.add_subcommand("stub-server", "Serve a fixed chat-completions reply");
    stub->add_option("--host", host, "Bind address");
    stub->add_option("--port", port, "Port (0 picks one)");
    stub->add_option("--reply", reply, "Assistant message content");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plan) return cmd_plan(domain_path, problem_path, strategy, heuristic, max_expansions);
        if (*goals_cmd) return cmd_goals(scenario, goals_path, lenient);
        if (*stub) {
            hynpc::chat::StubChatServer server(
                [&](const std::string&) { return hynpc::chat::StubChatServer::completion(reply); });
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving on http://" << host << ":" << port << '\n';
            server.serve(host, port);
            return 0;
        }

        auto custom = parse_pairs(traits, "--traits");
        auto types = parse_pairs(agent_types, "--agent-type");
        for (const auto& a : agents) {
            auto spec = parse_agent(a, reasoner);
            if (auto it = custom.find(spec.uid); it != custom.end()) spec.traits = it->second;
            if (auto it = types.find(spec.uid); it != types.end()) spec.agent_type = it->second;
            config.agents.push_back(spec);
        }
        config.termination = termination == "fixed"   ? hynpc::runner::Termination::fixed_ticks
                             : termination == "until" ? hynpc::runner::Termination::predicate
                                                      : hynpc::runner::Termination::all_idle;
        config.llm_timeout = std::chrono::milliseconds(static_cast<long long>(llm_timeout * 1000));
        if (!llm_model.empty()) config.llm_model = llm_model;
        config.strict_scenario = !lenient;
        hynpc::runner::RunSummary summary = hynpc::runner::run(config);
        std::cout << summary.to_json() << '\n';
        if (!summary.terminated) {
            std::cerr << "max ticks reached without termination\n";
            return 4;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

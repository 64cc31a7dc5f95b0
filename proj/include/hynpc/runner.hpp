#pragma once

#include "hynpc/agent.hpp"
#include "hynpc/planner.hpp"
#include "hynpc/reasoner.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hynpc::runner {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CI, CO, FP, FF, PA. `agent_name` is left empty.
std::map<std::string, reasoner::PersonalityProfile> preset_profiles();
/// Throws ConfigError naming the valid codes.
reasoner::PersonalityProfile preset_profile(const std::string& code, const std::string& agent_name);

struct AgentSpec {
    std::string uid;
    /// Preset code; ignored when `traits` is set.
    std::string profile;
    /// scripted:<policy>, replay:<file>, llm or llm:<url>.
    std::string backend;
    std::optional<std::string> traits;
    std::optional<std::string> agent_type;
};

enum class Termination { all_idle, fixed_ticks, predicate };

/// True when the world satisfies `predicate`: "fire-extinguished", "firefighters-called"
/// or "safe:<uid>". Throws ConfigError for anything else.
bool termination_reached(const std::string& predicate, const world::WorldState& world);

struct RunConfig {
    std::string scenario_path;
    std::vector<AgentSpec> agents;
    int max_ticks = 200;
    std::uint64_t seed = 0;
    /// JSONL trace output; empty keeps the trace in memory only.
    std::string trace_path;
    Termination termination = Termination::all_idle;
    int idle_ticks = 3;
    /// Used with Termination::predicate.
    std::string until;
    /// Empty means the bundled binding.
    std::string binding_path;
    std::string goals_path;
    std::string llm_url;
    std::chrono::milliseconds llm_timeout{30'000};
    std::optional<std::string> llm_model;
    /// When set, every backend answer is saved here as replay JSONL.
    std::string record_path;
    bool strict_scenario = true;
    planner::SearchConfig search;
    std::size_t prompt_cap = 0;
};

struct AgentSummary {
    std::string uid;
    std::vector<std::string> goal_history;
    std::optional<std::string> final_goal;
    std::size_t rethinks = 0;
    std::size_t replans = 0;
    std::size_t actions = 0;
    std::size_t warnings = 0;
    std::size_t model_calls = 0;
};

struct RunSummary {
    int ticks = 0;
    bool terminated = false;
    std::vector<AgentSummary> agents;
    std::size_t fires_initial = 0;
    std::vector<std::string> fires_remaining;
    std::vector<std::string> people_in_safe_zone;
    bool firefighters_called = false;
    std::size_t rethinks = 0;
    std::size_t replans = 0;
    std::size_t actions = 0;
    std::size_t model_calls = 0;
    std::size_t warnings = 0;
    /// Carrying exclusivity or entity conservation broken at some tick.
    std::size_t invariant_violations = 0;
    std::vector<std::string> trace;

    bool fire_extinguished() const { return fires_initial > 0 && fires_remaining.empty(); }
    std::string to_json() const;
};

/// Resolves everything up front (throws ConfigError), then runs the tick loop.
RunSummary run(const RunConfig& config);

std::unique_ptr<reasoner::Backend> make_backend(const std::string& spec, const RunConfig& config);

/// Endpoint for `llm` backends: the config, else $HYNPC_LLM_URL, else http://localhost:1234.
std::string llm_endpoint(const RunConfig& config);

}  // namespace hynpc::runner

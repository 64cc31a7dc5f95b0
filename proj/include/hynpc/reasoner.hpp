#pragma once

#include "hynpc/goals.hpp"
#include "hynpc/world.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hynpc::reasoner {

struct PersonalityProfile {
    std::string agent_name;
    /// Lower-case role noun, e.g. "firefighter".
    std::string agent_type;
    std::string traits;

    bool operator==(const PersonalityProfile&) const = default;
};

struct Memory {
    std::string key;
    std::string text;
    std::uint64_t tick_added = 0;
    bool live = true;
    /// Appended when a perception disappears; never live.
    bool retirement = false;

    bool operator==(const Memory&) const = default;
};

struct ChangeReport {
    std::size_t added = 0;
    std::size_t retired = 0;

    std::size_t total() const { return added + retired; }
    bool operator==(const ChangeReport&) const = default;
};

inline constexpr std::string_view kRetiredSuffix = ": is no longer true";

/// Append-only perception log of one agent.
class MemoryStream {
public:
    /// `prompt_cap` > 0 limits how many memories a prompt shows (oldest summarized).
    explicit MemoryStream(PersonalityProfile profile, std::size_t prompt_cap = 0);

    const PersonalityProfile& profile() const { return profile_; }
    const std::vector<Memory>& memories() const { return memories_; }
    std::size_t prompt_cap() const { return prompt_cap_; }

    /// Adds unseen perceptions and retires live memories whose key vanished.
    /// Retirements are appended first, in stream order, then additions in perception order.
    ChangeReport sync(const std::vector<world::Perception>& current, std::uint64_t tick);

private:
    PersonalityProfile profile_;
    std::size_t prompt_cap_;
    std::vector<Memory> memories_;
    std::map<std::string, std::size_t> live_;
};

inline ChangeReport sync_memories(MemoryStream& stream, const std::vector<world::Perception>& current,
                                  std::uint64_t tick) {
    return stream.sync(current, tick);
}

class PromptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Identity, traits, perceptions, current action, numbered options, closing instruction.
/// Throws PromptError if `options` is empty.
std::string build_prompt(const MemoryStream& stream, const std::optional<std::string>& current_action,
                         const std::vector<goals::GroundGoalOption>& options);

inline constexpr std::string_view kClosingLine = "Indicate the number of the chosen answer.";

class NoParsableChoice : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 1-based index: the last in-range "option <k>"; without any "option <k>", the last
/// standalone in-range integer. Throws NoParsableChoice otherwise.
std::size_t parse_choice(std::string_view text, std::size_t num_options);

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ReasonerQuery {
    std::vector<ChatMessage> messages;
    /// The user prompt (same text as the user message).
    std::string prompt;
    const std::vector<goals::GroundGoalOption>* options = nullptr;
    int attempt = 1;
};

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Prompt in, raw text out.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string respond(const ReasonerQuery& query) = 0;
    virtual std::string name() const = 0;
    /// Calls that reached a language model (zero for scripted policies).
    virtual std::size_t model_calls() const { return 0; }
};

inline constexpr std::string_view kSystemMessage = "You must respect the format";
inline constexpr std::string_view kStrictSystemMessage =
    "You must respect the format. Answer with \"option <number>\" using one of the listed numbers.";

struct GoalChoice {
    std::size_t option_index = 1;
    std::string option_id;
    std::string raw_response;
    bool changed = false;
    int attempts = 0;
    /// Set when no attempt produced a usable answer and a fallback was taken.
    std::optional<std::string> warning;
};

/// Two attempts at most; then keeps `previous` when still offered, else DoNothing. Never throws.
GoalChoice select_goal(Backend& backend, const std::string& prompt, const std::vector<goals::GroundGoalOption>& options,
                       const std::optional<std::string>& previous);

/// Picks by goal-name preference list; DoNothing when nothing preferred is offered.
class ScriptedBackend : public Backend {
public:
    /// save-first, fire-first, heal-first, call-first, idle, or prefer:GoalA,GoalB.
    /// Throws std::invalid_argument for anything else.
    explicit ScriptedBackend(const std::string& policy);

    std::string respond(const ReasonerQuery& query) override;
    std::string name() const override { return "scripted:" + policy_; }
    const std::vector<std::string>& preferences() const { return preferences_; }

private:
    std::string policy_;
    std::vector<std::string> preferences_;
};

/// 64-bit FNV-1a of the prompt, 16 lower-case hex digits.
std::string prompt_hash(std::string_view prompt);

/// Answers from recorded {prompt_hash, response_text} JSONL lines.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::map<std::string, std::string> responses, std::string label = "replay");
    static ReplayBackend from_file(const std::string& path);
    static std::map<std::string, std::string> parse_jsonl(std::string_view text);

    std::string respond(const ReasonerQuery& query) override;
    std::string name() const override { return label_; }
    std::size_t model_calls() const override { return calls_; }

private:
    std::map<std::string, std::string> responses_;
    std::string label_;
    std::size_t calls_ = 0;
};

/// Forwards to another backend and remembers every answer for later replay.
class RecordingBackend : public Backend {
public:
    explicit RecordingBackend(Backend& inner) : inner_(inner) {}

    std::string respond(const ReasonerQuery& query) override;
    std::string name() const override { return inner_.name(); }
    std::size_t model_calls() const override { return inner_.model_calls(); }
    const std::map<std::string, std::string>& recorded() const { return recorded_; }

private:
    Backend& inner_;
    std::map<std::string, std::string> recorded_;
};

/// One JSON object per line, sorted by hash.
std::string to_jsonl(const std::map<std::string, std::string>& recorded);

}  // namespace hynpc::reasoner

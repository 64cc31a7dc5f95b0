#include "hynpc/reasoner.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace hynpc::reasoner {

MemoryStream::MemoryStream(PersonalityProfile profile, std::size_t prompt_cap)
    : profile_(std::move(profile)), prompt_cap_(prompt_cap) {}

ChangeReport MemoryStream::sync(const std::vector<world::Perception>& current, std::uint64_t tick) {
    ChangeReport report;
    std::set<std::string> present;
    for (const auto& p : current) {
        if (p.live) present.insert(p.key);
    }

    std::vector<std::size_t> vanished;
    for (const auto& [key, index] : live_) {
        if (!present.count(key)) vanished.push_back(index);
    }
    std::sort(vanished.begin(), vanished.end());
    for (std::size_t index : vanished) {
        Memory& m = memories_[index];
        m.live = false;
        live_.erase(m.key);
        Memory retired{m.key, m.text + std::string(kRetiredSuffix), tick, false, true};
        memories_.push_back(std::move(retired));
        ++report.retired;
    }

    for (const auto& p : current) {
        if (!p.live || live_.count(p.key)) continue;
        live_.emplace(p.key, memories_.size());
        memories_.push_back(Memory{p.key, p.text, tick, true, false});
        ++report.added;
    }
    return report;
}

namespace {

std::string_view article(std::string_view noun) {
    if (noun.empty()) return "a";
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(noun.front())));
    return std::string_view("aeiou").find(c) != std::string_view::npos ? "an" : "a";
}

}  // namespace

std::string build_prompt(const MemoryStream& stream, const std::optional<std::string>& current_action,
                         const std::vector<goals::GroundGoalOption>& options) {
    if (options.empty()) throw PromptError("cannot build a prompt without options");
    const auto& profile = stream.profile();
    std::string out;
    out += "I am '" + profile.agent_name + "', " + std::string(article(profile.agent_type)) + " " +
           profile.agent_type + ".\n";
    out += profile.traits + "\n";
    out += "I have the following perceptions:\n";

    std::vector<const Memory*> shown;
    for (const auto& m : stream.memories()) {
        if (m.live || m.retirement) shown.push_back(&m);
    }
    std::size_t skipped = 0;
    if (stream.prompt_cap() > 0 && shown.size() > stream.prompt_cap()) {
        skipped = shown.size() - stream.prompt_cap();
        out += "- ...and " + std::to_string(skipped) + " earlier observations\n";
    }
    for (std::size_t i = skipped; i < shown.size(); ++i) out += "- " + shown[i]->text + "\n";

    out += current_action ? "I am currently: " + *current_action + "\n" : std::string("I am currently idle.\n");
    out += "What should I do? I must choose only one option:\n";
    for (std::size_t i = 0; i < options.size(); ++i) {
        out += std::to_string(i + 1) + ". " + options[i].phrase + "\n";
    }
    out += std::string(kClosingLine) + "\n";
    return out;
}

}  // namespace hynpc::reasoner

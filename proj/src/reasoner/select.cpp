#include "hynpc/reasoner.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hynpc::reasoner {

GoalChoice select_goal(Backend& backend, const std::string& prompt, const std::vector<goals::GroundGoalOption>& options,
                       const std::optional<std::string>& previous) {
    GoalChoice choice;
    std::string failure;
    for (int attempt = 1; attempt <= 2; ++attempt) {
        ReasonerQuery query;
        query.prompt = prompt;
        query.options = &options;
        query.attempt = attempt;
        query.messages = {{"system", std::string(attempt == 1 ? kSystemMessage : kStrictSystemMessage)},
                          {"user", prompt}};
        choice.attempts = attempt;
        try {
            choice.raw_response = backend.respond(query);
            choice.option_index = parse_choice(choice.raw_response, options.size());
            choice.option_id = options[choice.option_index - 1].id;
            choice.changed = !previous || *previous != choice.option_id;
            return choice;
        } catch (const NoParsableChoice& e) {
            failure = e.what();
        } catch (const std::exception& e) {
            failure = std::string("backend ") + backend.name() + ": " + e.what();
        }
    }

    auto keep = options.end();
    if (previous) keep = std::find_if(options.begin(), options.end(), [&](const auto& o) { return o.id == *previous; });
    std::string fallback = "previous goal";
    if (keep == options.end()) {
        keep = std::find_if(options.begin(), options.end(), [](const auto& o) { return o.goal == goals::kDoNothing; });
        fallback = "DoNothing";
    }
    if (keep == options.end()) {
        keep = options.begin();
        fallback = "first option";
    }
    choice.option_index = static_cast<std::size_t>(keep - options.begin()) + 1;
    choice.option_id = keep->id;
    choice.changed = !previous || *previous != choice.option_id;
    choice.warning = "no usable choice after retry (" + failure + "); falling back to " + fallback;
    return choice;
}

ScriptedBackend::ScriptedBackend(const std::string& policy) : policy_(policy) {
    static const std::map<std::string, std::vector<std::string>> presets = {
        {"save-first", {"SavePerson", "PutOutFire"}},
        {"fire-first", {"PutOutFire", "SavePerson"}},
        {"heal-first", {"HealPerson", "SavePerson"}},
        {"call-first", {"CallFirefighters"}},
        {"idle", {}},
    };
    if (auto it = presets.find(policy); it != presets.end()) {
        preferences_ = it->second;
        return;
    }
    constexpr std::string_view kPrefer = "prefer:";
    if (policy.rfind(kPrefer, 0) == 0 && policy.size() > kPrefer.size()) {
        std::stringstream list(policy.substr(kPrefer.size()));
        for (std::string item; std::getline(list, item, ',');) {
            if (!item.empty()) preferences_.push_back(item);
        }
        if (!preferences_.empty()) return;
    }
    throw std::invalid_argument("unknown scripted policy '" + policy +
                                "' (expected save-first, fire-first, heal-first, call-first, idle or prefer:A,B)");
}

std::string ScriptedBackend::respond(const ReasonerQuery& query) {
    if (query.options == nullptr || query.options->empty()) throw BackendError("scripted policy needs the option list");
    const auto& options = *query.options;
    for (const auto& goal : preferences_) {
        for (std::size_t i = 0; i < options.size(); ++i) {
            if (options[i].goal == goal) return "option " + std::to_string(i + 1);
        }
    }
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (options[i].goal == goals::kDoNothing) return "option " + std::to_string(i + 1);
    }
    return "option 1";
}

std::string prompt_hash(std::string_view prompt) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : prompt) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ReplayBackend::ReplayBackend(std::map<std::string, std::string> responses, std::string label)
    : responses_(std::move(responses)), label_(std::move(label)) {}

std::map<std::string, std::string> ReplayBackend::parse_jsonl(std::string_view text) {
    std::map<std::string, std::string> out;
    std::istringstream in{std::string(text)};
    std::size_t number = 0;
    for (std::string line; std::getline(in, line);) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            out.emplace(j.at("prompt_hash").get<std::string>(), j.at("response_text").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw BackendError("replay line " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

ReplayBackend ReplayBackend::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BackendError("cannot open replay file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return ReplayBackend(parse_jsonl(text.str()), "replay:" + path);
}

std::string ReplayBackend::respond(const ReasonerQuery& query) {
    ++calls_;
    auto it = responses_.find(prompt_hash(query.prompt));
    if (it == responses_.end()) throw BackendError("no recorded response for prompt " + prompt_hash(query.prompt));
    return it->second;
}

std::string RecordingBackend::respond(const ReasonerQuery& query) {
    std::string text = inner_.respond(query);
    recorded_.emplace(prompt_hash(query.prompt), text);
    return text;
}

std::string to_jsonl(const std::map<std::string, std::string>& recorded) {
    std::string out;
    for (const auto& [hash, text] : recorded) {
        nlohmann::ordered_json j;
        j["prompt_hash"] = hash;
        j["response_text"] = text;
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace hynpc::reasoner

#include "hynpc/chat.hpp"
#include "hynpc/runner.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <atomic>

using namespace hynpc;
using namespace hynpc::chat;
using nlohmann::json;
using std::chrono::milliseconds;

namespace {

const std::string kSampleAnswer =
    " As a firefighter, my priority  \n    is to save lives, so I would first \n    assess the situation and determine "
    "\n    the best course of action. In this \n    case, there is a person inside the \n    burning building, "
    "which means that \n    saving them should be my top priority. \n    Therefore, I would choose option 1:\n"
    "    Save p1. ";

std::vector<goals::GroundGoalOption> two_options() {
    return {{"DoNothing", "DoNothing", {}, "Do nothing", {}}, {"SavePerson(Peter)", "SavePerson", {"Peter"}, "s", {}}};
}

}  // namespace

TEST_CASE("endpoint parsing") {
    CHECK(parse_endpoint("http://localhost:1234").origin == "http://localhost:1234");
    CHECK(parse_endpoint("http://localhost:1234").path == "/v1/chat/completions");
    CHECK(parse_endpoint("http://localhost:1234/").path == "/v1/chat/completions");
    CHECK(parse_endpoint("http://localhost:1234/v1").path == "/v1/chat/completions");
    CHECK(parse_endpoint("http://h:1/api").path == "/api/v1/chat/completions");
    CHECK(parse_endpoint("http://h:1/api/v1/").path == "/api/v1/chat/completions");
    CHECK_THROWS_AS(parse_endpoint("ftp://h:1"), TransportError);
    CHECK_THROWS_AS(parse_endpoint("http://"), TransportError);
}

TEST_CASE("request and response bodies") {
    ChatRequest r;
    r.messages = {{"system", "You must respect the format"}, {"user", "hi"}};
    json j = json::parse(r.to_json());
    CHECK(j["temperature"] == 0);
    CHECK_FALSE(j.contains("model"));
    CHECK(j["messages"].size() == 2);
    CHECK(j["messages"][1]["role"] == "user");
    r.model = "m";
    CHECK(json::parse(r.to_json())["model"] == "m");

    CHECK(parse_chat_response(R"({"choices":[{"message":{"content":"a"}},{"message":{"content":"b"}}]})").contents ==
          std::vector<std::string>{"a", "b"});
    CHECK_THROWS_AS(parse_chat_response("not json"), ProtocolError);
    CHECK_THROWS_AS(parse_chat_response(R"({"choices":[]})"), ProtocolError);
    CHECK_THROWS_AS(parse_chat_response(R"({"choices":[{"message":{}}]})"), ProtocolError);
    CHECK_THROWS_AS(parse_chat_response(R"({"error":"x"})"), ProtocolError);
}

TEST_CASE("round trip against the stub server") {
    StubChatServer server([](const std::string&) { return StubChatServer::completion(kSampleAnswer); });
    server.start();
    for (const std::string& url : {server.base_url(), server.base_url() + "/v1"}) {
        ChatBackend backend(url, milliseconds(5000));
        auto options = two_options();
        reasoner::GoalChoice c = reasoner::select_goal(backend, "the prompt", options, std::nullopt);
        CHECK(c.option_index == 1);
        CHECK(c.attempts == 1);
        CHECK(backend.model_calls() == 1);
    }
    auto requests = server.requests();
    REQUIRE(requests.size() == 2);
    json body = json::parse(requests[0]);
    CHECK(body["temperature"] == 0);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == "You must respect the format");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["messages"][1]["content"] == "the prompt");
}

TEST_CASE("protocol and transport failures") {
    StubChatServer garbage([](const std::string&) { return StubChatServer::Reply{200, "{\"oops\": true}"}; });
    garbage.start();
    ChatRequest r;
    r.messages = {{"user", "x"}};
    CHECK_THROWS_AS(chat_completion(garbage.base_url(), r, milliseconds(5000)), ProtocolError);

    StubChatServer failing([](const std::string&) { return StubChatServer::Reply{500, "boom"}; });
    failing.start();
    CHECK_THROWS_AS(chat_completion(failing.base_url(), r, milliseconds(5000)), ProtocolError);

    // Port of a server that has been stopped: nothing listens there any more.
    std::string dead_url;
    {
        StubChatServer gone([](const std::string&) { return StubChatServer::completion("1"); });
        gone.start();
        dead_url = gone.base_url();
        gone.stop();
    }
    try {
        chat_completion(dead_url, r, milliseconds(1000));
        FAIL("expected a TransportError");
    } catch (const TransportError& e) {
        CHECK(std::string(e.what()).find(dead_url) != std::string::npos);
    }
}

TEST_CASE("malformed answers are retried once, then the previous goal is kept") {
    StubChatServer server([](const std::string&) { return StubChatServer::completion("I am not sure"); });
    server.start();
    ChatBackend backend(server.base_url(), milliseconds(5000));
    auto options = two_options();
    reasoner::GoalChoice c = reasoner::select_goal(backend, "p", options, std::string("SavePerson(Peter)"));
    CHECK(c.option_id == "SavePerson(Peter)");
    CHECK_FALSE(c.changed);
    CHECK(c.warning);
    auto requests = server.requests();
    REQUIRE(requests.size() == 2);
    CHECK(json::parse(requests[1])["messages"][0]["content"] == std::string(reasoner::kStrictSystemMessage));

    // Transport failures are handled the same way.
    StubChatServer broken([](const std::string&) { return StubChatServer::Reply{503, ""}; });
    broken.start();
    ChatBackend b2(broken.base_url(), milliseconds(5000));
    c = reasoner::select_goal(b2, "p", options, std::nullopt);
    CHECK(c.option_id == "DoNothing");
    CHECK(c.warning);
    CHECK(broken.requests().size() == 2);
}

TEST_CASE("a run against a confused model logs warnings and keeps going") {
    std::atomic<int> calls = 0;
    StubChatServer server([&](const std::string&) {
        ++calls;
        return StubChatServer::completion("hmm");
    });
    server.start();
    runner::RunConfig config;
    config.scenario_path = test_support::fixture("firefighter_scenario.json");
    config.agents = {{"Sim_01_FireFighter_0", "FP", "llm", std::nullopt, std::nullopt}};
    config.llm_url = server.base_url();
    config.llm_timeout = milliseconds(5000);
    config.max_ticks = 5;
    runner::RunSummary s = runner::run(config);
    CHECK(s.terminated);
    CHECK(s.rethinks == 1);
    CHECK(s.model_calls == 2);
    CHECK(calls == 2);
    CHECK(s.warnings == 1);
    bool saw_warning = false;
    for (const auto& line : s.trace) {
        json j = json::parse(line);
        if (j["kind"] == "warning") {
            saw_warning = true;
            CHECK(j["payload"]["reason"] == "no_parsable_choice");
        }
        if (j["kind"] == "goal_set") CHECK(j["payload"]["option"] == "DoNothing");
    }
    CHECK(saw_warning);
}

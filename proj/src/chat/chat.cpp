#include "hynpc/chat.hpp"

#include <httplib.h>
#include <json.hpp>

namespace hynpc::chat {

using nlohmann::json;

std::string ChatRequest::to_json() const {
    json j = json::object();
    if (model) j["model"] = *model;
    j["messages"] = json::array();
    for (const auto& m : messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
    j["temperature"] = temperature;
    return j.dump();
}

Endpoint parse_endpoint(std::string_view url) {
    constexpr std::string_view kScheme = "http://";
    if (url.substr(0, kScheme.size()) != kScheme) {
        throw TransportError("unsupported endpoint '" + std::string(url) + "' (expected http://host:port)");
    }
    auto slash = url.find('/', kScheme.size());
    Endpoint e;
    e.origin = std::string(url.substr(0, slash));
    std::string prefix = slash == std::string_view::npos ? "" : std::string(url.substr(slash));
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    if (e.origin.size() == kScheme.size()) throw TransportError("endpoint '" + std::string(url) + "' has no host");
    if (prefix.size() < 3 || prefix.substr(prefix.size() - 3) != "/v1") prefix += "/v1";
    e.path = prefix + "/chat/completions";
    return e;
}

ChatResponse parse_chat_response(std::string_view body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error&) {
        throw ProtocolError("chat response is not valid JSON");
    }
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw ProtocolError("chat response has no choices");
    }
    ChatResponse r;
    for (const auto& c : j["choices"]) {
        if (!c.is_object() || !c.contains("message") || !c["message"].is_object() ||
            !c["message"].contains("content") || !c["message"]["content"].is_string()) {
            throw ProtocolError("chat response choice has no message content");
        }
        r.contents.push_back(c["message"]["content"].get<std::string>());
    }
    return r;
}

ChatResponse chat_completion(const std::string& endpoint, const ChatRequest& request,
                             std::chrono::milliseconds timeout) {
    Endpoint e = parse_endpoint(endpoint);
    httplib::Client client(e.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(e.path, request.to_json(), "application/json");
    if (!res) {
        throw TransportError("POST " + e.origin + e.path + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw ProtocolError("POST " + e.origin + e.path + " returned HTTP " + std::to_string(res->status));
    }
    return parse_chat_response(res->body);
}

ChatBackend::ChatBackend(std::string endpoint, std::chrono::milliseconds timeout, std::optional<std::string> model)
    : endpoint_(std::move(endpoint)), timeout_(timeout), model_(std::move(model)) {
    parse_endpoint(endpoint_);
}

std::string ChatBackend::respond(const reasoner::ReasonerQuery& query) {
    ++calls_;
    ChatRequest request{model_, query.messages, 0.0};
    return chat_completion(endpoint_, request, timeout_).content();
}

struct StubChatServer::Impl {
    Responder responder;
    httplib::Server server;
    std::thread thread;
    std::string host;
    int port = 0;
    mutable std::mutex mutex;
    std::vector<std::string> requests;
};

StubChatServer::Reply StubChatServer::completion(const std::string& content) {
    json j = {{"id", "chatcmpl-stub"},
              {"object", "chat.completion"},
              {"model", "stub"},
              {"choices", json::array({{{"index", 0},
                                        {"finish_reason", "stop"},
                                        {"message", {{"role", "assistant"}, {"content", content}}}}})}};
    return {200, j.dump()};
}

StubChatServer::StubChatServer(Responder responder) : impl_(std::make_unique<Impl>()) {
    impl_->responder = std::move(responder);
    auto handler = [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
        {
            std::lock_guard lock(impl->mutex);
            impl->requests.push_back(req.body);
        }
        Reply reply = impl->responder(req.body);
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    };
    impl_->server.Post("/v1/chat/completions", handler);
}

StubChatServer::~StubChatServer() { stop(); }

int StubChatServer::start(const std::string& host, int port) {
    impl_->host = host;
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
    } else {
        impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (impl_->port <= 0) throw std::runtime_error("stub server cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void StubChatServer::serve(const std::string& host, int port) {
    impl_->host = host;
    impl_->port = port;
    if (!impl_->server.listen(host, port)) {
        throw std::runtime_error("stub server cannot listen on " + host + ":" + std::to_string(port));
    }
}

void StubChatServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StubChatServer::base_url() const { return "http://" + impl_->host + ":" + std::to_string(impl_->port); }

std::vector<std::string> StubChatServer::requests() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->requests;
}

}  // namespace hynpc::chat

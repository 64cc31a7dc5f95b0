#pragma once

#include "hynpc/reasoner.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace hynpc::chat {

struct ChatRequest {
    std::optional<std::string> model;
    std::vector<reasoner::ChatMessage> messages;
    double temperature = 0.0;

    /// `{"model"?, "messages": [...], "temperature": 0}`
    std::string to_json() const;
};

struct ChatResponse {
    /// message.content of each choice, in order.
    std::vector<std::string> contents;

    const std::string& content() const { return contents.front(); }
};

/// Connection refused, timeout, unsupported URL.
class TransportError : public reasoner::BackendError {
public:
    using reasoner::BackendError::BackendError;
};

/// Non-2xx status or a body without usable choices.
class ProtocolError : public reasoner::BackendError {
public:
    using reasoner::BackendError::BackendError;
};

/// `http://host:port[/prefix]` -> scheme/host/port and the completions path.
/// A prefix ending in /v1 is used as is; otherwise /v1 is appended.
struct Endpoint {
    std::string origin;
    std::string path;
};
Endpoint parse_endpoint(std::string_view url);

ChatResponse parse_chat_response(std::string_view body);

/// POSTs `request` to the completions path of `endpoint`.
ChatResponse chat_completion(const std::string& endpoint, const ChatRequest& request,
                             std::chrono::milliseconds timeout);

class ChatBackend : public reasoner::Backend {
public:
    ChatBackend(std::string endpoint, std::chrono::milliseconds timeout, std::optional<std::string> model = {});

    std::string respond(const reasoner::ReasonerQuery& query) override;
    std::string name() const override { return "llm:" + endpoint_; }
    std::size_t model_calls() const override { return calls_; }

private:
    std::string endpoint_;
    std::chrono::milliseconds timeout_;
    std::optional<std::string> model_;
    std::size_t calls_ = 0;
};

/// Minimal OpenAI-compatible server for tests and offline demos.
class StubChatServer {
public:
    struct Reply {
        int status = 200;
        std::string body;
    };
    using Responder = std::function<Reply(const std::string& request_body)>;

    /// A well-formed completion whose only choice carries `content`.
    static Reply completion(const std::string& content);

    explicit StubChatServer(Responder responder);
    ~StubChatServer();
    StubChatServer(const StubChatServer&) = delete;
    StubChatServer& operator=(const StubChatServer&) = delete;

    /// Binds (port 0 picks a free one), serves on a background thread and returns the port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Binds and serves on the calling thread until stop() is called from elsewhere.
    void serve(const std::string& host, int port);
    void stop();

    std::string base_url() const;
    /// Raw bodies of the requests received so far.
    std::vector<std::string> requests() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hynpc::chat

// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <mutex>
#include <thread>

#include "http_service.hpp"
#include "textact/gateway.hpp"

namespace textact {
namespace {

using json = nlohmann::json;

// Concatenated text parts of the first user message.
std::string user_text(const json& request) {
  std::string text;
  for (const auto& msg : request.at("messages")) {
    if (msg.value("role", "") != "user") continue;
    const auto& content = msg.at("content");
    if (content.is_string()) return content.get<std::string>();
    for (const auto& part : content) {
      if (part.value("type", "") == "text") text += part.value("text", "");
    }
    break;
  }
  return text;
}

std::string next_reply(const std::vector<std::string>& script, std::size_t& position) {
  if (script.empty()) return {};
  const std::size_t i = std::min(position, script.size() - 1);
  ++position;
  return script[i];
}

}  // namespace

struct StubVlmServer::State {
  StubVlmConfig cfg;
  mutable std::mutex mutex;
  std::size_t position = 0;
  std::map<std::string, std::size_t> keyed_position;
  std::vector<json> transcript;
};

struct StubVlmServer::Server {
  detail::HttpService service;
};

StubVlmServer::StubVlmServer(StubVlmConfig cfg) : state_(std::make_unique<State>()) {
  state_->cfg = std::move(cfg);
}

StubVlmServer::~StubVlmServer() { stop(); }

HttpReply StubVlmServer::handle_completion(std::string_view body) {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::exception& e) {
    return {400, json{{"error", std::string("bad request: ") + e.what()}}.dump()};
  }

  std::string reply;
  {
    std::lock_guard lock(state_->mutex);
    state_->transcript.push_back(request);
    bool routed = false;
    if (!state_->cfg.by_instruction.empty()) {
      std::string text;
      try {
        text = user_text(request);
      } catch (const json::exception&) {
      }
      for (const auto& [key, script] : state_->cfg.by_instruction) {
        if (text.find(key) != std::string::npos) {
          reply = next_reply(script, state_->keyed_position[key]);
          routed = true;
          break;
        }
      }
    }
    if (!routed) reply = next_reply(state_->cfg.script, state_->position);
  }

  if (state_->cfg.delay_ms > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(state_->cfg.delay_ms));
  }
  if (state_->cfg.malformed) return {200, "this is not a chat completion"};

  const json response = {
      {"id", "stub-" + std::to_string(request_count())},
      {"object", "chat.completion"},
      {"model", request.value("model", "stub")},
      {"choices", json::array({{{"index", 0},
                                {"message", {{"role", "assistant"}, {"content", reply}}},
                                {"finish_reason", "stop"}}})},
  };
  return {200, response.dump()};
}

int StubVlmServer::bind(const std::string& host, int port) {
  if (!server_) {
    server_ = std::make_unique<Server>();
    auto& srv = server_->service.server();
    auto completion = [this](const httplib::Request& req, httplib::Response& res) {
      const HttpReply reply = handle_completion(req.body);
      res.status = reply.status;
      res.set_content(reply.body, state_->cfg.malformed ? "text/plain" : "application/json");
    };
    srv.Post("/v1/chat/completions", completion);
    srv.Post("/chat/completions", completion);
    auto models = [](const httplib::Request&, httplib::Response& res) {
      detail::send(res, 200, json{{"object", "list"}, {"data", json::array({{{"id", "stub"}}})}}.dump());
    };
    srv.Get("/v1/models", models);
    srv.Get("/models", models);
    srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      detail::send(res, 200, json{{"status", "ok"}}.dump());
    });
  }
  return server_->service.bind(host, port);
}

void StubVlmServer::start() {
  if (!server_) throw std::logic_error("StubVlmServer::bind() before start()");
  server_->service.start();
}

void StubVlmServer::run() {
  if (!server_) throw std::logic_error("StubVlmServer::bind() before run()");
  server_->service.run();
}

void StubVlmServer::stop() {
  if (server_) server_->service.stop();
}

std::string StubVlmServer::base_url() const {
  if (!server_ || server_->service.port() < 0) throw std::logic_error("stub server is not bound");
  return "http://" + server_->service.host() + ":" + std::to_string(server_->service.port()) + "/v1";
}

std::vector<json> StubVlmServer::transcript() const {
  std::lock_guard lock(state_->mutex);
  return state_->transcript;
}

std::size_t StubVlmServer::request_count() const {
  std::lock_guard lock(state_->mutex);
  return state_->transcript.size();
}

}  // namespace textact

// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/remote_client.hpp"

#include <chrono>

#include <httplib.h>

namespace textact {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void configure(httplib::Client& client, const RemoteEndpointConfig& cfg) {
  const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (!cfg.api_key.empty()) client.set_bearer_token_auth(cfg.api_key);
}

}  // namespace

std::string_view to_string(RemoteErrorKind kind) noexcept {
  switch (kind) {
    case RemoteErrorKind::Timeout: return "Timeout";
    case RemoteErrorKind::Transport: return "Transport";
    case RemoteErrorKind::HttpStatus: return "HttpStatus";
    case RemoteErrorKind::MalformedResponse: return "MalformedResponse";
  }
  return "Unknown";
}

json build_chat_request(const PromptBundle& prompt, const RemoteEndpointConfig& cfg) {
  json user_content = json::array();
  user_content.push_back({{"type", "text"}, {"text", prompt.instruction}});
  for (const auto& image : prompt.images) {
    user_content.push_back({{"type", "image_url"}, {"image_url", {{"url", png_data_url(image)}}}});
  }
  return {{"model", cfg.model},
          {"messages",
           json::array({{{"role", "system"}, {"content", prompt.system_prompt}},
                        {{"role", "user"}, {"content", std::move(user_content)}}})},
          {"max_tokens", cfg.max_tokens},
          {"temperature", cfg.temperature}};
}

std::string extract_completion_text(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw RemoteError(RemoteErrorKind::MalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some servers return content as a list of typed parts.
    if (content.is_array()) {
      std::string text;
      for (const auto& part : content) {
        if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
      }
      return text;
    }
    if (content.is_null()) return {};
  } catch (const json::exception& e) {
    throw RemoteError(RemoteErrorKind::MalformedResponse, std::string("bad response envelope: ") + e.what());
  }
  throw RemoteError(RemoteErrorKind::MalformedResponse, "message content has unexpected type");
}

RemoteClient::RemoteClient(RemoteEndpointConfig cfg) : cfg_(std::move(cfg)) {
  const auto scheme_end = cfg_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("base URL needs a scheme: " + cfg_.base_url);
  }
  const auto path_start = cfg_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = cfg_.base_url.substr(0, path_start);
  if (path_start != std::string::npos) path_prefix_ = cfg_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (cfg_.timeout_ms < 1) throw std::invalid_argument("timeout_ms must be positive");
}

Completion RemoteClient::complete(const PromptBundle& prompt) const {
  const std::string body = build_chat_request(prompt, cfg_).dump();
  httplib::Client client(scheme_host_port_);
  configure(client, cfg_);

  const auto start = Clock::now();
  auto res = client.Post(path_prefix_ + "/chat/completions", body, "application/json");
  const double latency = elapsed_ms(start);

  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && latency >= 0.9 * cfg_.timeout_ms);
    if (timed_out) {
      throw RemoteError(RemoteErrorKind::Timeout,
                        "backend did not answer within " + std::to_string(cfg_.timeout_ms) + " ms");
    }
    throw RemoteError(RemoteErrorKind::Transport, "backend request failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw RemoteError(RemoteErrorKind::HttpStatus, "backend returned HTTP " + std::to_string(res->status));
  }
  return {extract_completion_text(res->body), latency};
}

bool RemoteClient::reachable() const {
  httplib::Client client(scheme_host_port_);
  configure(client, cfg_);
  return static_cast<bool>(client.Get(path_prefix_ + "/models"));
}

}  // namespace textact

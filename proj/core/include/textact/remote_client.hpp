// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "textact/prompting.hpp"

namespace textact {

struct RemoteEndpointConfig {
  /// Base URL up to and including the API version, e.g. "http://127.0.0.1:8000/v1".
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model = "textact-vla";
  int timeout_ms = 10000;
  int max_tokens = 512;
  /// Greedy decoding by default.
  double temperature = 0.0;
  std::string api_key;
};

/// Environment variable consulted for the API key when no flag is given.
inline constexpr const char* kApiKeyEnvVar = "TEXTACT_API_KEY";

enum class RemoteErrorKind { Timeout, Transport, HttpStatus, MalformedResponse };

std::string_view to_string(RemoteErrorKind kind) noexcept;

class RemoteError : public std::runtime_error {
 public:
  RemoteError(RemoteErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  RemoteErrorKind kind() const noexcept { return kind_; }

 private:
  RemoteErrorKind kind_;
};

struct Completion {
  std::string text;
  double latency_ms = 0.0;
};

/// Chat-completion request body: system prompt in the system role, the
/// instruction followed by base64 PNG data URLs in the user role.
nlohmann::json build_chat_request(const PromptBundle& prompt, const RemoteEndpointConfig& cfg);

/// First choice's message content. Throws RemoteError(MalformedResponse).
std::string extract_completion_text(std::string_view body);

/// Stateless HTTP client; every call opens its own connection, so concurrent
/// calls from different threads are independent and independently timed.
class RemoteClient {
 public:
  explicit RemoteClient(RemoteEndpointConfig cfg);

  /// Throws RemoteError on timeout, transport failure, non-2xx status or an
  /// unreadable response envelope.
  Completion complete(const PromptBundle& prompt) const;

  /// True when the server answers any HTTP request under the base URL.
  bool reachable() const;

  const RemoteEndpointConfig& config() const noexcept { return cfg_; }

 private:
  RemoteEndpointConfig cfg_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace textact

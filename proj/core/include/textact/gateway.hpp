// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "textact/codec.hpp"
#include "textact/ensemble.hpp"
#include "textact/prompting.hpp"
#include "textact/remote_client.hpp"

namespace textact {

/// Status and JSON body of one handled request.
struct HttpReply {
  int status = 200;
  std::string body;
};

// ---------------------------------------------------------------------------
// Action gateway
//
//   POST /act    {"session_id", "instruction", "images": [base64 PNG], "state"?, "timestep"}
//             -> {"action", "raw_text", "parse_ok", "clamped", "latency_ms"}
//   POST /reset  {"session_id"} -> {"session_id", "reset": true}
//   GET  /health -> {"status": "ok"}
//
// 400 malformed request, 409 non-increasing timestep, 503 backend unavailable.

struct ActRequest {
  std::string session_id;
  std::string instruction;
  std::vector<std::string> images;  // base64 PNG, optionally as data URLs
  std::optional<std::vector<double>> state;
  std::int64_t timestep = 0;
};

struct ActResponse {
  std::vector<double> action;
  std::string raw_text;
  bool parse_ok = false;
  bool clamped = false;
  double latency_ms = 0.0;
};

/// Throws std::invalid_argument describing the first violated field.
ActRequest act_request_from_json(const nlohmann::json& doc);
nlohmann::json act_request_to_json(const ActRequest& req);
nlohmann::json act_response_to_json(const ActResponse& resp);
ActResponse act_response_from_json(const nlohmann::json& doc);

struct GatewayConfig {
  RemoteEndpointConfig backend;
  CodecConfig codec;
  EnsembleConfig ensemble;
  ImageLayout layout = ImageLayout::Tiled;

  void validate() const;
};

/// Prompt -> backend -> parse -> per-session ensemble -> action.
///
/// Each session owns an ensemble buffer and the last returned action.
/// Requests for one session are serialized; cross-session requests run in
/// parallel. A reply that fails to parse returns the previous action with
/// parse_ok = false.
class Gateway {
 public:
  explicit Gateway(GatewayConfig cfg);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Transport-independent handlers; the HTTP server routes to these.
  HttpReply handle_act(std::string_view body);
  HttpReply handle_reset(std::string_view body);
  HttpReply handle_health() const;

  /// Binds to host:port (port 0 picks a free port) and returns the port.
  int bind(const std::string& host, int port);
  /// Serves on a background thread. bind() first.
  void start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();

  std::size_t session_count() const;
  const GatewayConfig& config() const noexcept { return cfg_; }

 private:
  struct Session;
  struct Server;

  std::shared_ptr<Session> session(const std::string& id);

  GatewayConfig cfg_;
  RemoteClient client_;
  struct Sessions;
  std::unique_ptr<Sessions> sessions_;
  std::unique_ptr<Server> server_;
};

// ---------------------------------------------------------------------------
// Scripted chat-completion server for hermetic tests.

struct StubVlmConfig {
  /// Replies in order; the last one repeats once the script is exhausted.
  std::vector<std::string> script;
  int delay_ms = 0;
  /// Per-instruction scripts. A request whose user text contains the key uses
  /// that script (with its own position) instead of the default one.
  std::map<std::string, std::vector<std::string>> by_instruction;
  /// Reply with a body that is not JSON.
  bool malformed = false;
};

/// Serves POST {/v1,}/chat/completions, GET {/v1,}/models and GET /health.
class StubVlmServer {
 public:
  explicit StubVlmServer(StubVlmConfig cfg);
  ~StubVlmServer();
  StubVlmServer(const StubVlmServer&) = delete;
  StubVlmServer& operator=(const StubVlmServer&) = delete;

  /// Handles one chat-completion body; used by the HTTP route.
  HttpReply handle_completion(std::string_view body);

  int bind(const std::string& host, int port);
  void start();
  void run();
  void stop();

  /// "http://host:port/v1" once bound.
  std::string base_url() const;

  /// Parsed request bodies in arrival order.
  std::vector<nlohmann::json> transcript() const;
  std::size_t request_count() const;

 private:
  struct State;
  struct Server;
  std::unique_ptr<State> state_;
  std::unique_ptr<Server> server_;
};

}  // namespace textact

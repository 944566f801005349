// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/gateway.hpp"

#include <chrono>
#include <cmath>
#include <mutex>

#include "http_service.hpp"
#include "textact/image.hpp"

namespace textact {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

HttpReply error_reply(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

std::string_view strip_data_url(std::string_view image) {
  if (image.starts_with("data:")) {
    const auto comma = image.find(',');
    if (comma != std::string_view::npos) image.remove_prefix(comma + 1);
  }
  return image;
}

}  // namespace

// ---- wire types ---------------------------------------------------------------

ActRequest act_request_from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("request body must be a JSON object");
  ActRequest req;
  const auto field = [&](const char* key) -> const json& {
    if (!doc.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    return doc.at(key);
  };

  const json& sid = field("session_id");
  if (!sid.is_string() || sid.get<std::string>().empty()) {
    throw std::invalid_argument("session_id must be a non-empty string");
  }
  req.session_id = sid.get<std::string>();

  const json& instr = field("instruction");
  if (!instr.is_string()) throw std::invalid_argument("instruction must be a string");
  req.instruction = instr.get<std::string>();

  const json& ts = field("timestep");
  if (!ts.is_number_integer()) throw std::invalid_argument("timestep must be an integer");
  req.timestep = ts.get<std::int64_t>();
  if (req.timestep < 0) throw std::invalid_argument("timestep must be >= 0");

  if (doc.contains("images") && !doc.at("images").is_null()) {
    const json& images = doc.at("images");
    if (!images.is_array()) throw std::invalid_argument("images must be a list of base64 strings");
    for (const auto& img : images) {
      if (!img.is_string()) throw std::invalid_argument("images must be a list of base64 strings");
      req.images.push_back(img.get<std::string>());
    }
  }
  if (doc.contains("state") && !doc.at("state").is_null()) {
    const json& state = doc.at("state");
    if (!state.is_array()) throw std::invalid_argument("state must be a list of numbers");
    std::vector<double> values;
    for (const auto& v : state) {
      if (!v.is_number()) throw std::invalid_argument("state must be a list of numbers");
      values.push_back(v.get<double>());
      if (!std::isfinite(values.back())) throw std::invalid_argument("state must be finite");
    }
    req.state = std::move(values);
  }
  if (req.images.empty() && !req.state) {
    throw std::invalid_argument("request needs at least one image or a state vector");
  }
  return req;
}

json act_request_to_json(const ActRequest& req) {
  json doc = {{"session_id", req.session_id},
              {"instruction", req.instruction},
              {"images", req.images},
              {"timestep", req.timestep}};
  if (req.state) doc["state"] = *req.state;
  return doc;
}

json act_response_to_json(const ActResponse& resp) {
  return {{"action", resp.action},
          {"raw_text", resp.raw_text},
          {"parse_ok", resp.parse_ok},
          {"clamped", resp.clamped},
          {"latency_ms", resp.latency_ms}};
}

ActResponse act_response_from_json(const json& doc) {
  ActResponse resp;
  resp.action = doc.at("action").get<std::vector<double>>();
  resp.raw_text = doc.at("raw_text").get<std::string>();
  resp.parse_ok = doc.at("parse_ok").get<bool>();
  resp.clamped = doc.at("clamped").get<bool>();
  resp.latency_ms = doc.at("latency_ms").get<double>();
  return resp;
}

void GatewayConfig::validate() const {
  codec.validate();
  ensemble.validate();
  if (ensemble.horizon != codec.horizon) {
    throw std::invalid_argument("ensemble horizon must equal codec horizon");
  }
}

// ---- gateway ------------------------------------------------------------------

struct Gateway::Session {
  explicit Session(const GatewayConfig& cfg)
      : buffer(cfg.ensemble), held(static_cast<std::size_t>(cfg.codec.dims), 0.0) {}

  std::mutex mutex;
  EnsembleBuffer buffer;
  std::vector<double> held;
  std::int64_t last_timestep = -1;
};

struct Gateway::Sessions {
  mutable std::mutex mutex;
  std::map<std::string, std::shared_ptr<Session>> by_id;
};

struct Gateway::Server {
  detail::HttpService service;
};

Gateway::Gateway(GatewayConfig cfg)
    : cfg_(std::move(cfg)), client_(cfg_.backend), sessions_(std::make_unique<Sessions>()) {
  cfg_.validate();
}

Gateway::~Gateway() { stop(); }

std::shared_ptr<Gateway::Session> Gateway::session(const std::string& id) {
  std::lock_guard lock(sessions_->mutex);
  auto& slot = sessions_->by_id[id];
  if (!slot) slot = std::make_shared<Session>(cfg_);
  return slot;
}

std::size_t Gateway::session_count() const {
  std::lock_guard lock(sessions_->mutex);
  return sessions_->by_id.size();
}

HttpReply Gateway::handle_act(std::string_view body) {
  const auto start = Clock::now();
  ActRequest req;
  std::vector<RgbImage> images;
  try {
    req = act_request_from_json(json::parse(body));
    for (const auto& encoded : req.images) images.push_back(decode_png(base64_decode(strip_data_url(encoded))));
  } catch (const json::exception& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    return error_reply(400, e.what());
  }

  PromptBundle prompt;
  try {
    const ImageLayout layout = images.empty() ? ImageLayout::Separate : cfg_.layout;
    prompt = build_prompt(cfg_.codec, req.instruction, std::move(images), layout);
  } catch (const PromptError& e) {
    return error_reply(400, e.what());
  }

  const auto s = session(req.session_id);
  std::lock_guard lock(s->mutex);
  if (req.timestep <= s->last_timestep) {
    return error_reply(409, "timestep " + std::to_string(req.timestep) + " is not after " +
                                std::to_string(s->last_timestep) + " for session " + req.session_id);
  }

  Completion completion;
  try {
    completion = client_.complete(prompt);
  } catch (const RemoteError& e) {
    return error_reply(503, std::string("backend unavailable (") + std::string(to_string(e.kind())) +
                                "): " + e.what());
  }
  s->last_timestep = req.timestep;

  ActResponse resp;
  resp.raw_text = std::move(completion.text);
  const ParseResult parsed = parse_text(resp.raw_text, cfg_.codec);
  if (parsed) {
    s->buffer.push(dequantize(parsed.chunk(), cfg_.codec), req.timestep);
    s->held = s->buffer.current_action(req.timestep);
    resp.parse_ok = true;
    resp.clamped = parsed.chunk().clamped;
  }
  resp.action = s->held;
  resp.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return {200, act_response_to_json(resp).dump()};
}

HttpReply Gateway::handle_reset(std::string_view body) {
  std::string id;
  try {
    const json doc = json::parse(body);
    id = doc.at("session_id").get<std::string>();
  } catch (const json::exception& e) {
    return error_reply(400, std::string("reset needs {\"session_id\": ...}: ") + e.what());
  }
  {
    std::lock_guard lock(sessions_->mutex);
    sessions_->by_id.erase(id);
  }
  return {200, json{{"session_id", id}, {"reset", true}}.dump()};
}

HttpReply Gateway::handle_health() const {
  return {200, json{{"status", "ok"}, {"sessions", session_count()}}.dump()};
}

int Gateway::bind(const std::string& host, int port) {
  if (!server_) {
    server_ = std::make_unique<Server>();
    auto& srv = server_->service.server();
    srv.Post("/act", [this](const httplib::Request& req, httplib::Response& res) {
      const HttpReply reply = handle_act(req.body);
      detail::send(res, reply.status, reply.body);
    });
    srv.Post("/reset", [this](const httplib::Request& req, httplib::Response& res) {
      const HttpReply reply = handle_reset(req.body);
      detail::send(res, reply.status, reply.body);
    });
    srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      const HttpReply reply = handle_health();
      detail::send(res, reply.status, reply.body);
    });
  }
  return server_->service.bind(host, port);
}

void Gateway::start() {
  if (!server_) throw std::logic_error("Gateway::bind() before start()");
  server_->service.start();
}

void Gateway::run() {
  if (!server_) throw std::logic_error("Gateway::bind() before run()");
  server_->service.run();
}

void Gateway::stop() {
  if (server_) server_->service.stop();
}

}  // namespace textact

// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>

#include "common.hpp"
#include "textact/gateway.hpp"

namespace textact::cli {

using json = nlohmann::json;

void add_serve(CLI::App& app, std::vector<Command>& out) {
  struct Options {
    std::string config;
    std::string bind = "127.0.0.1:8080";
    RemoteEndpointConfig backend;
    std::string api_key;
    int horizon = 8;
    int dims = 7;
    int resolution = 1000;
    std::string bounds_file;
    int ensemble_n = 0;
    std::string layout = "tiled";
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("serve", "Serve the action gateway in front of a chat-completion backend");
  add_config_option(*sub, o->config);
  sub->add_option("--bind", o->bind, "host:port to listen on")->capture_default_str();
  sub->add_option("--backend-url", o->backend.base_url, "Chat-completion base URL")->capture_default_str();
  sub->add_option("--model", o->backend.model, "Model name sent to the backend")->capture_default_str();
  sub->add_option("--timeout-ms", o->backend.timeout_ms, "Backend request timeout")->capture_default_str();
  sub->add_option("--max-tokens", o->backend.max_tokens, "Completion token limit")->capture_default_str();
  sub->add_option("--temperature", o->backend.temperature, "Sampling temperature")->capture_default_str();
  sub->add_option("--api-key", o->api_key, std::string("Backend API key (default: $") + kApiKeyEnvVar + ")");
  auto* horizon = sub->add_option("--horizon", o->horizon, "Chunk length H")->capture_default_str();
  auto* dims = sub->add_option("--dims", o->dims, "Action dimensions D")->capture_default_str();
  auto* res = sub->add_option("--resolution", o->resolution, "Integer range B")->capture_default_str();
  sub->add_option("--bounds-file", o->bounds_file, "Codec config with per-dimension bounds (default [-1, 1])")
      ->check(CLI::ExistingFile);
  sub->add_option("--ensemble-n", o->ensemble_n, "Chunks averaged per step (0 = H)")->capture_default_str();
  sub->add_option("--layout", o->layout, "Image layout")->check(CLI::IsMember({"tiled", "separate"}));

  out.push_back({sub, [o, horizon, dims, res] {
                   GatewayConfig cfg;
                   cfg.backend = o->backend;
                   if (!o->api_key.empty()) {
                     cfg.backend.api_key = o->api_key;
                   } else if (const char* key = std::getenv(kApiKeyEnvVar)) {
                     cfg.backend.api_key = key;
                   }
                   cfg.layout = image_layout_from_string(o->layout);
                   try {
                     cfg.codec.horizon = o->horizon;
                     cfg.codec.resolution = o->resolution;
                     if (o->bounds_file.empty()) {
                       cfg.codec.dims = o->dims;
                       cfg.codec.bounds.assign(static_cast<std::size_t>(std::max(o->dims, 0)), Bounds{-1.0, 1.0});
                     } else {
                       const CodecConfig file = load_codec_config(o->bounds_file);
                       cfg.codec.bounds = file.bounds;
                       cfg.codec.dims = file.dims;
                       if (dims->count() > 0 && o->dims != file.dims) {
                         throw UsageError("--dims disagrees with " + o->bounds_file);
                       }
                       if (horizon->count() == 0) cfg.codec.horizon = file.horizon;
                       if (res->count() == 0) cfg.codec.resolution = file.resolution;
                     }
                     cfg.ensemble = {o->ensemble_n > 0 ? o->ensemble_n : cfg.codec.horizon, cfg.codec.horizon};
                     cfg.validate();
                   } catch (const UsageError&) {
                     throw;
                   } catch (const std::exception& e) {
                     throw UsageError(e.what());
                   }
                   const auto [host, port] = parse_bind(o->bind);

                   if (!RemoteClient(cfg.backend).reachable()) {
                     std::fprintf(stderr, "error: backend not reachable at %s\n", cfg.backend.base_url.c_str());
                     return kExitFailure;
                   }
                   block_stop_signals();
                   Gateway gateway(cfg);
                   const int bound = gateway.bind(host, port);
                   gateway.start();
                   std::printf("listening on http://%s:%d (backend %s, H=%d D=%d B=%d n=%d)\n", host.c_str(), bound,
                               cfg.backend.base_url.c_str(), cfg.codec.horizon, cfg.codec.dims,
                               cfg.codec.resolution, cfg.ensemble.n);
                   std::fflush(stdout);
                   wait_for_stop_signal();
                   gateway.stop();
                   return kExitOk;
                 }});
}

void add_stub_vlm(CLI::App& app, std::vector<Command>& out) {
  struct Options {
    std::string config;
    std::string bind = "127.0.0.1:8000";
    std::vector<std::string> script;
    std::string script_file;
    int delay_ms = 0;
    bool malformed = false;
  };
  auto o = std::make_shared<Options>();
  auto* sub = app.add_subcommand("stub-vlm", "Serve scripted chat completions for testing");
  add_config_option(*sub, o->config);
  sub->add_option("--bind", o->bind, "host:port to listen on")->capture_default_str();
  sub->add_option("--script", o->script, "Reply text, in order; the last one repeats");
  sub->add_option("--script-file", o->script_file, "File with one reply per line")->check(CLI::ExistingFile);
  sub->add_option("--delay-ms", o->delay_ms, "Delay before each reply")->capture_default_str();
  sub->add_flag("--malformed", o->malformed, "Reply with a body that is not a chat completion");

  out.push_back({sub, [o] {
                   StubVlmConfig cfg;
                   cfg.script = o->script;
                   if (!o->script_file.empty()) {
                     std::ifstream in(o->script_file);
                     for (std::string line; std::getline(in, line);) cfg.script.push_back(line);
                   }
                   if (o->delay_ms < 0) throw UsageError("--delay-ms must be >= 0");
                   cfg.delay_ms = o->delay_ms;
                   cfg.malformed = o->malformed;
                   const auto [host, port] = parse_bind(o->bind);

                   block_stop_signals();
                   StubVlmServer stub(cfg);
                   stub.bind(host, port);
                   stub.start();
                   std::printf("listening on %s (%zu scripted replies)\n", stub.base_url().c_str(), cfg.script.size());
                   std::fflush(stdout);
                   wait_for_stop_signal();
                   stub.stop();
                   return kExitOk;
                 }});
}

}  // namespace textact::cli

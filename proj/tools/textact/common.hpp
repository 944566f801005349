// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "textact/codec.hpp"

namespace textact::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, config files or input data. Reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parsed subcommand and the action to run once parsing succeeded.
struct Command {
  CLI::App* app = nullptr;
  std::function<int()> run;
};

void add_gen_demos(CLI::App& app, std::vector<Command>& out);
void add_fit_bounds(CLI::App& app, std::vector<Command>& out);
void add_export_samples(CLI::App& app, std::vector<Command>& out);
void add_codec_check(CLI::App& app, std::vector<Command>& out);
void add_mask_preview(CLI::App& app, std::vector<Command>& out);
void add_eval(CLI::App& app, std::vector<Command>& out);
void add_ablate(CLI::App& app, std::vector<Command>& out);
void add_serve(CLI::App& app, std::vector<Command>& out);
void add_stub_vlm(CLI::App& app, std::vector<Command>& out);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Fills options that were not given on the command line from a flat JSON
/// object whose keys are long option names without the leading dashes.
/// Unknown keys are rejected.
void apply_config_defaults(CLI::App& app, const nlohmann::json& doc);

/// Adds --config to `app`, bound to `path`; the file is applied after parsing.
void add_config_option(CLI::App& app, std::string& path);

/// "host:port" with port 0 meaning any free port.
std::pair<std::string, int> parse_bind(const std::string& bind);

/// Blocks SIGINT and SIGTERM in the calling thread (and threads it starts).
void block_stop_signals();
/// Waits for one of the blocked signals.
void wait_for_stop_signal();

}  // namespace textact::cli

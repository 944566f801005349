// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "textact/codec.hpp"

namespace textact {

/// One control step of a demonstration or rollout.
struct StepRecord {
  std::int64_t t = 0;
  std::vector<double> state;   // observation before the action
  std::vector<double> action;  // action executed at t
  // Rollout-only fields; demonstrations leave them at their defaults.
  std::string raw_text;
  bool parse_ok = true;
  bool clamped = false;
};

struct Episode {
  std::string env;
  int dims = 0;
  std::uint64_t seed = 0;
  std::string instruction;
  bool success = false;
  std::vector<StepRecord> steps;

  /// Executed actions stacked as a T x D matrix.
  ActionChunk actions() const;
};

/// JSONL episode files. Each episode is a header line
///   {"env": ..., "D": ..., "seed": ..., "instruction": ..., "success": ..., "steps": T}
/// followed by T lines {"state": [...], "action": [...], "t": k}.
void write_episodes(std::ostream& out, const std::vector<Episode>& episodes);
void write_episodes(const std::filesystem::path& path, const std::vector<Episode>& episodes);
std::vector<Episode> read_episodes(std::istream& in);
std::vector<Episode> read_episodes(const std::filesystem::path& path);

}  // namespace textact

// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "textact/codec.hpp"

namespace textact {

class EnsembleError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EnsembleConfig {
  /// Number of overlapping predictions averaged, 1 <= n <= horizon.
  int n = 1;
  int horizon = 1;

  void validate() const;
};

/// Temporal ensemble over the most recent action chunks.
///
/// Each pushed chunk predicts rows for timesteps [t, t + H). The action for
/// timestep t is the equal-weight mean of row (t - emit) of every retained
/// chunk that covers t. Averaging is done on dequantized values.
///
/// Single writer. Not safe for concurrent mutation.
class EnsembleBuffer {
 public:
  struct Entry {
    std::int64_t emit_timestep;
    ActionChunk chunk;
  };

  explicit EnsembleBuffer(EnsembleConfig cfg);

  /// Throws EnsembleError if t is not after the previous push or the chunk
  /// height differs from the horizon.
  void push(ActionChunk chunk, std::int64_t t);

  /// Throws EnsembleError if no retained chunk covers t.
  std::vector<double> current_action(std::int64_t t) const;

  bool covers(std::int64_t t) const noexcept;

  void reset() noexcept;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::deque<Entry>& entries() const noexcept { return entries_; }
  const EnsembleConfig& config() const noexcept { return cfg_; }
  /// Timestep of the latest push, or -1 after construction/reset.
  std::int64_t current_timestep() const noexcept { return current_timestep_; }

 private:
  EnsembleConfig cfg_;
  std::deque<Entry> entries_;
  std::int64_t current_timestep_ = -1;
};

}  // namespace textact

// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/ensemble.hpp"

#include <string>

namespace textact {

void EnsembleConfig::validate() const {
  if (horizon < 1) throw EnsembleError("ensemble horizon must be >= 1");
  if (n < 1 || n > horizon) {
    throw EnsembleError("ensemble n must be in [1, H], got " + std::to_string(n));
  }
}

EnsembleBuffer::EnsembleBuffer(EnsembleConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void EnsembleBuffer::push(ActionChunk chunk, std::int64_t t) {
  if (!entries_.empty() && t <= entries_.back().emit_timestep) {
    throw EnsembleError("push: timestep " + std::to_string(t) + " is not after " +
                        std::to_string(entries_.back().emit_timestep));
  }
  if (chunk.rows() != static_cast<std::size_t>(cfg_.horizon)) {
    throw EnsembleError("push: chunk has " + std::to_string(chunk.rows()) + " rows, expected " +
                        std::to_string(cfg_.horizon));
  }
  if (!entries_.empty() && chunk.cols() != entries_.front().chunk.cols()) {
    throw EnsembleError("push: chunk dimension changed");
  }
  entries_.push_back({t, std::move(chunk)});
  current_timestep_ = t;
  while (!entries_.empty() && t - entries_.front().emit_timestep >= cfg_.horizon) {
    entries_.pop_front();
  }
  while (entries_.size() > static_cast<std::size_t>(cfg_.n)) entries_.pop_front();
}

bool EnsembleBuffer::covers(std::int64_t t) const noexcept {
  for (const auto& e : entries_) {
    if (e.emit_timestep <= t && t < e.emit_timestep + cfg_.horizon) return true;
  }
  return false;
}

std::vector<double> EnsembleBuffer::current_action(std::int64_t t) const {
  std::vector<double> mean;
  std::size_t count = 0;
  for (const auto& e : entries_) {
    if (e.emit_timestep > t || t >= e.emit_timestep + cfg_.horizon) continue;
    const auto row = e.chunk.row(static_cast<std::size_t>(t - e.emit_timestep));
    ++count;
    if (count == 1) {
      mean.assign(row.begin(), row.end());
      continue;
    }
    // Incremental mean: exact when every row is identical.
    for (std::size_t d = 0; d < mean.size(); ++d) {
      mean[d] += (row[d] - mean[d]) / static_cast<double>(count);
    }
  }
  if (count == 0) {
    throw EnsembleError("no retained prediction covers timestep " + std::to_string(t));
  }
  return mean;
}

void EnsembleBuffer::reset() noexcept {
  entries_.clear();
  current_timestep_ = -1;
}

}  // namespace textact

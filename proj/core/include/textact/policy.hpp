// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "textact/codec.hpp"
#include "textact/episode.hpp"
#include "textact/image.hpp"
#include "textact/prompting.hpp"
#include "textact/random.hpp"
#include "textact/remote_client.hpp"
#include "textact/simenv.hpp"

namespace textact {

struct Observation {
  std::vector<double> state;
  std::vector<RgbImage> images;
  std::int64_t timestep = 0;

  /// Throws std::invalid_argument on non-finite state or negative timestep.
  void validate() const;
};

struct PolicyOutput {
  std::string raw_text;
  double latency_ms = 0.0;
};

/// Observation + instruction in, raw action text out. The text is not
/// guaranteed to parse; parse_text is the safety net downstream.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string_view name() const noexcept = 0;
  /// Called once per episode before the first act(); reseeds any randomness.
  virtual void begin_episode(std::uint64_t /*seed*/) {}
  virtual PolicyOutput act(const Observation& obs, std::string_view instruction) = 0;
  /// Whether act() reads obs.images. The harness only renders when asked.
  virtual bool wants_images() const noexcept { return false; }
};

// ---------------------------------------------------------------------------

/// Plans H steps ahead with the environment's scripted controller from the
/// observed state and emits them through the codec. Always well-formed.
class ScriptedPolicy final : public Policy {
 public:
  ScriptedPolicy(const EnvConfig& env, CodecConfig codec);

  std::string_view name() const noexcept override { return "oracle"; }
  PolicyOutput act(const Observation& obs, std::string_view instruction) override;

 private:
  std::unique_ptr<Environment> model_;
  CodecConfig codec_;
};

// ---------------------------------------------------------------------------

/// Memorized (state, action text) pairs from demonstrations.
class NearestNeighborModel {
 public:
  /// One entry per demo step: the following H actions, quantized and
  /// encoded. Windows running past the end repeat the final action.
  /// Throws std::invalid_argument on empty demos or inconsistent state sizes.
  static NearestNeighborModel fit(std::span<const Episode> demos, const CodecConfig& codec);

  /// Index of the entry closest to `state` in Euclidean distance; ties go to
  /// the lowest index.
  std::size_t nearest(std::span<const double> state) const;
  const std::string& text(std::size_t index) const { return texts_.at(index); }
  std::span<const double> state(std::size_t index) const;

  std::size_t size() const noexcept { return texts_.size(); }
  std::size_t state_dims() const noexcept { return state_dims_; }
  const CodecConfig& codec() const noexcept { return codec_; }

 private:
  CodecConfig codec_;
  std::size_t state_dims_ = 0;
  std::vector<double> states_;  // size() x state_dims_, row-major
  std::vector<std::string> texts_;
};

class NearestNeighborPolicy final : public Policy {
 public:
  explicit NearestNeighborPolicy(std::shared_ptr<const NearestNeighborModel> model);

  std::string_view name() const noexcept override { return "nn"; }
  PolicyOutput act(const Observation& obs, std::string_view instruction) override;

 private:
  std::shared_ptr<const NearestNeighborModel> model_;
};

// ---------------------------------------------------------------------------

/// Text corruption applied on top of another policy's output.
struct CorruptionConfig {
  double drop_token_prob = 0.0;
  double perturb_digit_prob = 0.0;
  double garbage_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool active() const noexcept {
    return drop_token_prob > 0 || perturb_digit_prob > 0 || garbage_prob > 0;
  }
};

/// With probability garbage_prob the whole text becomes an unparseable reply.
/// Otherwise each space-separated token is dropped with drop_token_prob and
/// each digit is replaced by a different digit with perturb_digit_prob. With
/// all probabilities zero the text is returned unchanged.
std::string corrupt_text(std::string_view text, const CorruptionConfig& cfg, Rng& rng);

class CorruptedPolicy final : public Policy {
 public:
  CorruptedPolicy(std::unique_ptr<Policy> inner, CorruptionConfig cfg);

  std::string_view name() const noexcept override { return inner_->name(); }
  void begin_episode(std::uint64_t seed) override;
  PolicyOutput act(const Observation& obs, std::string_view instruction) override;
  bool wants_images() const noexcept override { return inner_->wants_images(); }

 private:
  std::unique_ptr<Policy> inner_;
  CorruptionConfig cfg_;
  Rng rng_;
};

// ---------------------------------------------------------------------------

/// Queries a hosted model over the chat-completion wire format. Throws
/// RemoteError when the backend cannot be used.
class RemotePolicy final : public Policy {
 public:
  RemotePolicy(RemoteEndpointConfig endpoint, CodecConfig codec, ImageLayout layout);

  std::string_view name() const noexcept override { return "remote"; }
  PolicyOutput act(const Observation& obs, std::string_view instruction) override;
  bool wants_images() const noexcept override { return true; }

 private:
  RemoteClient client_;
  CodecConfig codec_;
  ImageLayout layout_;
};

}  // namespace textact

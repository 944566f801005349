// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/policy.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

namespace textact {
namespace {

using Clock = std::chrono::steady_clock;

double since_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Replies a chat model might produce instead of numbers. None of them parse.
constexpr std::array<std::string_view, 5> kGarbageReplies = {
    "",
    "I'm sorry, I cannot determine the robot action from this image.",
    "The robot should move left.",
    "{\"action\": [1, 2, 3]}",
    "Sure! Here are the numbers:",
};

}  // namespace

void Observation::validate() const {
  for (double v : state) {
    if (!std::isfinite(v)) throw std::invalid_argument("observation state is not finite");
  }
  if (timestep < 0) throw std::invalid_argument("observation timestep is negative");
}

// ---- scripted oracle ----------------------------------------------------------

ScriptedPolicy::ScriptedPolicy(const EnvConfig& env, CodecConfig codec)
    : model_(make_environment(env)), codec_(std::move(codec)) {
  codec_.validate();
  if (codec_.dims != model_->action_dims()) {
    throw std::invalid_argument("codec dims do not match environment action dims");
  }
}

PolicyOutput ScriptedPolicy::act(const Observation& obs, std::string_view /*instruction*/) {
  const auto start = Clock::now();
  obs.validate();
  model_->set_observation(obs.state);
  ActionChunk plan(static_cast<std::size_t>(codec_.horizon), static_cast<std::size_t>(codec_.dims));
  for (std::size_t t = 0; t < plan.rows(); ++t) {
    const auto action = model_->scripted_action();
    for (std::size_t d = 0; d < plan.cols(); ++d) {
      plan(t, d) = std::clamp(action[d], codec_.bounds[d].lo, codec_.bounds[d].hi);
    }
    model_->step(plan.row(t));
  }
  PolicyOutput out;
  out.raw_text = chunk_to_text(plan, codec_);
  out.latency_ms = since_ms(start);
  return out;
}

// ---- nearest neighbor ---------------------------------------------------------

NearestNeighborModel NearestNeighborModel::fit(std::span<const Episode> demos, const CodecConfig& codec) {
  codec.validate();
  if (demos.empty()) throw std::invalid_argument("nn_fit: no demonstrations");
  NearestNeighborModel m;
  m.codec_ = codec;
  const std::size_t horizon = static_cast<std::size_t>(codec.horizon);
  for (const auto& ep : demos) {
    if (ep.steps.empty()) continue;
    const ActionChunk actions = ep.actions();
    if (actions.cols() != static_cast<std::size_t>(codec.dims)) {
      throw std::invalid_argument("nn_fit: demo action dims do not match codec");
    }
    for (std::size_t i = 0; i < ep.steps.size(); ++i) {
      const auto& state = ep.steps[i].state;
      if (m.state_dims_ == 0) m.state_dims_ = state.size();
      if (state.size() != m.state_dims_ || state.empty()) {
        throw std::invalid_argument("nn_fit: inconsistent state dimension");
      }
      ActionChunk window(horizon, actions.cols());
      for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t src = std::min(i + t, actions.rows() - 1);
        for (std::size_t d = 0; d < actions.cols(); ++d) window(t, d) = actions(src, d);
      }
      m.states_.insert(m.states_.end(), state.begin(), state.end());
      m.texts_.push_back(chunk_to_text(window, codec));
    }
  }
  if (m.texts_.empty()) throw std::invalid_argument("nn_fit: demonstrations have no steps");
  return m;
}

std::size_t NearestNeighborModel::nearest(std::span<const double> state) const {
  if (state.size() != state_dims_) throw std::invalid_argument("nn query has wrong state dimension");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < texts_.size(); ++i) {
    const double* row = states_.data() + i * state_dims_;
    double dist = 0.0;
    for (std::size_t k = 0; k < state_dims_; ++k) {
      const double diff = row[k] - state[k];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

std::span<const double> NearestNeighborModel::state(std::size_t index) const {
  if (index >= texts_.size()) throw std::out_of_range("nn entry index");
  return {states_.data() + index * state_dims_, state_dims_};
}

NearestNeighborPolicy::NearestNeighborPolicy(std::shared_ptr<const NearestNeighborModel> model)
    : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("NearestNeighborPolicy needs a fitted model");
}

PolicyOutput NearestNeighborPolicy::act(const Observation& obs, std::string_view /*instruction*/) {
  const auto start = Clock::now();
  obs.validate();
  PolicyOutput out;
  out.raw_text = model_->text(model_->nearest(obs.state));
  out.latency_ms = since_ms(start);
  return out;
}

// ---- corruption ---------------------------------------------------------------

void CorruptionConfig::validate() const {
  for (double p : {drop_token_prob, perturb_digit_prob, garbage_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("corruption probabilities must be in [0, 1]");
  }
}

std::string corrupt_text(std::string_view text, const CorruptionConfig& cfg, Rng& rng) {
  if (cfg.garbage_prob > 0 && rng.bernoulli(cfg.garbage_prob)) {
    return std::string(kGarbageReplies[rng.below(kGarbageReplies.size())]);
  }
  std::string out(text);
  if (cfg.drop_token_prob > 0) {
    std::string kept;
    std::size_t pos = 0;
    while (pos <= out.size()) {
      std::size_t end = out.find(' ', pos);
      if (end == std::string::npos) end = out.size();
      if (!rng.bernoulli(cfg.drop_token_prob)) {
        if (!kept.empty()) kept.push_back(' ');
        kept.append(out, pos, end - pos);
      }
      pos = end + 1;
    }
    out = std::move(kept);
  }
  if (cfg.perturb_digit_prob > 0) {
    for (char& c : out) {
      if (c < '0' || c > '9' || !rng.bernoulli(cfg.perturb_digit_prob)) continue;
      // A different digit, uniformly among the other nine.
      const int shift = 1 + static_cast<int>(rng.below(9));
      c = static_cast<char>('0' + (c - '0' + shift) % 10);
    }
  }
  return out;
}

CorruptedPolicy::CorruptedPolicy(std::unique_ptr<Policy> inner, CorruptionConfig cfg)
    : inner_(std::move(inner)), cfg_(cfg), rng_(cfg.seed) {
  if (!inner_) throw std::invalid_argument("CorruptedPolicy needs an inner policy");
  cfg_.validate();
}

void CorruptedPolicy::begin_episode(std::uint64_t seed) {
  rng_ = Rng(mix_seed(cfg_.seed, seed));
  inner_->begin_episode(seed);
}

PolicyOutput CorruptedPolicy::act(const Observation& obs, std::string_view instruction) {
  PolicyOutput out = inner_->act(obs, instruction);
  out.raw_text = corrupt_text(out.raw_text, cfg_, rng_);
  return out;
}

// ---- remote -------------------------------------------------------------------

RemotePolicy::RemotePolicy(RemoteEndpointConfig endpoint, CodecConfig codec, ImageLayout layout)
    : client_(std::move(endpoint)), codec_(std::move(codec)), layout_(layout) {
  codec_.validate();
}

PolicyOutput RemotePolicy::act(const Observation& obs, std::string_view instruction) {
  const auto start = Clock::now();
  obs.validate();
  const PromptBundle prompt = build_prompt(codec_, instruction, obs.images, layout_);
  Completion reply = client_.complete(prompt);
  return {std::move(reply.text), since_ms(start)};
}

}  // namespace textact

// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "textact/episode.hpp"
#include "textact/image.hpp"

namespace textact {

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultStepLimit = 200;

// ---------------------------------------------------------------------------
// Point-mass reach. The arena is the unit square; actions are position deltas
// clamped to kPointMassMaxStep per component.

inline constexpr double kPointMassMaxStep = 0.05;
inline constexpr double kPointMassSuccessRadius = 0.02;

struct PointMassState {
  std::array<double, 2> position{};
  std::array<double, 2> goal{};
  int steps_elapsed = 0;
};

PointMassState pointmass_reset(std::uint64_t seed);
/// Returns true when the step reached the goal.
bool pointmass_step(PointMassState& s, std::span<const double> action,
                    double success_radius = kPointMassSuccessRadius);
std::vector<double> pointmass_controller(const PointMassState& s);

// ---------------------------------------------------------------------------
// Planar two-link arm. Actions are (joint delta 1, joint delta 2, gripper);
// deltas are clamped to kArmMaxJointStep, the gripper command is absolute.

inline constexpr double kArmMaxJointStep = 0.1;
inline constexpr double kArmSuccessRadius = 0.03;
inline constexpr double kArmGripperCloseRadius = 0.06;

struct ArmState {
  std::array<double, 2> joint_angles{};
  std::array<double, 2> link_lengths{0.5, 0.5};
  std::array<double, 2> target{};
  double gripper = 0.0;
  int steps_elapsed = 0;
};

ArmState arm_reset(std::uint64_t seed);
std::array<double, 2> arm_end_effector(const ArmState& s);
bool arm_step(ArmState& s, std::span<const double> action, double success_radius = kArmSuccessRadius);
/// Jacobian-transpose step toward the target; gripper closes near the target.
std::vector<double> arm_controller(const ArmState& s);

// ---------------------------------------------------------------------------

struct EnvConfig {
  std::string name = "pointmass";  // "pointmass" or "arm"
  /// Zero selects the environment default.
  double success_radius = 0.0;
  int step_limit = kDefaultStepLimit;
};

struct StepOutcome {
  bool done = false;
  bool success = false;
};

/// Single-owner state machine shared by both toy tasks.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const noexcept = 0;
  virtual int action_dims() const noexcept = 0;
  virtual std::string_view instruction() const noexcept = 0;

  virtual void reset(std::uint64_t seed) = 0;
  /// Throws EnvError on non-finite actions.
  virtual StepOutcome step(std::span<const double> action) = 0;

  /// Flat state vector. It fully determines the dynamics, so
  /// set_observation(observation()) restores the task state.
  virtual std::vector<double> observation() const = 0;
  virtual void set_observation(std::span<const double> obs) = 0;

  virtual std::vector<double> scripted_action() const = 0;
  /// Scene view and a zoomed wrist-style view, 64x64 each.
  virtual std::vector<RgbImage> render() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  virtual int steps_elapsed() const noexcept = 0;
  bool succeeded() const noexcept { return success_; }

 protected:
  bool success_ = false;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg);

/// Action dimensionality of a named environment.
int env_action_dims(std::string_view name);

/// Range of actions the environment responds to: the per-step clamp for
/// deltas and [0, 1] for the gripper.
std::vector<Bounds> env_action_bounds(std::string_view name);

/// Codec over env_action_bounds(name).
CodecConfig default_codec(std::string_view name, int horizon, int resolution);

/// Runs the scripted controller from env_reset(seed) until done.
Episode rollout_scripted(const EnvConfig& cfg, std::uint64_t seed);

/// `count` successful scripted episodes. Attempt k uses seed mix_seed(seed, k);
/// failures are discarded. Throws EnvError after max_attempts.
std::vector<Episode> generate_demos(const EnvConfig& cfg, int count, std::uint64_t seed,
                                    int max_attempts = 0);

}  // namespace textact

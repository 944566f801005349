// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/simenv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "textact/random.hpp"

namespace textact {
namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(std::span<const double> action, std::size_t dims) {
  if (action.size() != dims) {
    throw EnvError("expected " + std::to_string(dims) + " action dims, got " +
                   std::to_string(action.size()));
  }
  for (double a : action) {
    if (!std::isfinite(a)) throw EnvError("non-finite action");
  }
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w < -kPi) w = -kPi;
  if (w > kPi) w = kPi;
  return w;
}

// ---- rasterization --------------------------------------------------------

constexpr int kView = 64;

void fill_square(RgbImage& img, double px, double py, int half, std::array<std::uint8_t, 3> c) {
  const int cx = static_cast<int>(std::lround(px));
  const int cy = static_cast<int>(std::lround(py));
  for (int y = cy - half; y <= cy + half; ++y) {
    for (int x = cx - half; x <= cx + half; ++x) {
      if (x >= 0 && x < img.width && y >= 0 && y < img.height) img.set(x, y, c[0], c[1], c[2]);
    }
  }
}

void draw_segment(RgbImage& img, double x0, double y0, double x1, double y1,
                  std::array<std::uint8_t, 3> c) {
  const int n = 2 * kView;
  for (int i = 0; i <= n; ++i) {
    const double f = static_cast<double>(i) / n;
    fill_square(img, x0 + f * (x1 - x0), y0 + f * (y1 - y0), 0, c);
  }
}

// Maps world coordinates in [lo, hi]^2 to pixel coordinates, y up.
struct Viewport {
  double cx, cy, half_extent;
  double px(double x) const { return (x - (cx - half_extent)) / (2 * half_extent) * (kView - 1); }
  double py(double y) const { return ((cy + half_extent) - y) / (2 * half_extent) * (kView - 1); }
};

// ---- environments ----------------------------------------------------------

class PointMassEnv final : public Environment {
 public:
  PointMassEnv(double radius, int limit) : radius_(radius), limit_(limit) {}

  std::string_view name() const noexcept override { return "pointmass"; }
  int action_dims() const noexcept override { return 2; }
  std::string_view instruction() const noexcept override { return "move the point to the goal"; }

  void reset(std::uint64_t seed) override {
    state_ = pointmass_reset(seed);
    success_ = false;
  }

  StepOutcome step(std::span<const double> action) override {
    success_ = pointmass_step(state_, action, radius_);
    return {success_ || state_.steps_elapsed >= limit_, success_};
  }

  std::vector<double> observation() const override {
    return {state_.position[0], state_.position[1], state_.goal[0], state_.goal[1]};
  }

  void set_observation(std::span<const double> obs) override {
    if (obs.size() != 4) throw EnvError("pointmass observation has 4 entries");
    state_.position = {obs[0], obs[1]};
    state_.goal = {obs[2], obs[3]};
  }

  std::vector<double> scripted_action() const override { return pointmass_controller(state_); }

  std::vector<RgbImage> render() const override {
    std::vector<RgbImage> views;
    for (const Viewport vp : {Viewport{0.5, 0.5, 0.5},
                              Viewport{state_.position[0], state_.position[1], 0.125}}) {
      RgbImage img(kView, kView);
      fill_square(img, vp.px(state_.goal[0]), vp.py(state_.goal[1]), 1, {0, 200, 0});
      fill_square(img, vp.px(state_.position[0]), vp.py(state_.position[1]), 1, {220, 30, 30});
      views.push_back(std::move(img));
    }
    return views;
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<PointMassEnv>(*this); }
  int steps_elapsed() const noexcept override { return state_.steps_elapsed; }

 private:
  PointMassState state_;
  double radius_;
  int limit_;
};

class ArmEnv final : public Environment {
 public:
  ArmEnv(double radius, int limit) : radius_(radius), limit_(limit) {}

  std::string_view name() const noexcept override { return "arm"; }
  int action_dims() const noexcept override { return 3; }
  std::string_view instruction() const noexcept override { return "touch the target and close the gripper"; }

  void reset(std::uint64_t seed) override {
    state_ = arm_reset(seed);
    success_ = false;
  }

  StepOutcome step(std::span<const double> action) override {
    success_ = arm_step(state_, action, radius_);
    return {success_ || state_.steps_elapsed >= limit_, success_};
  }

  std::vector<double> observation() const override {
    return {state_.joint_angles[0], state_.joint_angles[1], state_.target[0], state_.target[1],
            state_.gripper};
  }

  void set_observation(std::span<const double> obs) override {
    if (obs.size() != 5) throw EnvError("arm observation has 5 entries");
    state_.joint_angles = {obs[0], obs[1]};
    state_.target = {obs[2], obs[3]};
    state_.gripper = obs[4];
  }

  std::vector<double> scripted_action() const override { return arm_controller(state_); }

  std::vector<RgbImage> render() const override {
    const auto ee = arm_end_effector(state_);
    const double elbow_x = state_.link_lengths[0] * std::cos(state_.joint_angles[0]);
    const double elbow_y = state_.link_lengths[0] * std::sin(state_.joint_angles[0]);
    std::vector<RgbImage> views;
    for (const Viewport vp : {Viewport{0.0, 0.0, 1.05}, Viewport{ee[0], ee[1], 0.25}}) {
      RgbImage img(kView, kView);
      draw_segment(img, vp.px(0), vp.py(0), vp.px(elbow_x), vp.py(elbow_y), {60, 90, 220});
      draw_segment(img, vp.px(elbow_x), vp.py(elbow_y), vp.px(ee[0]), vp.py(ee[1]), {60, 90, 220});
      fill_square(img, vp.px(state_.target[0]), vp.py(state_.target[1]), 1, {0, 200, 0});
      const std::uint8_t g = state_.gripper > 0.5 ? 30 : 200;
      fill_square(img, vp.px(ee[0]), vp.py(ee[1]), 1, {220, g, 30});
      views.push_back(std::move(img));
    }
    return views;
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<ArmEnv>(*this); }
  int steps_elapsed() const noexcept override { return state_.steps_elapsed; }

 private:
  ArmState state_;
  double radius_;
  int limit_;
};

}  // namespace

// ---- point-mass -------------------------------------------------------------

PointMassState pointmass_reset(std::uint64_t seed) {
  Rng rng(seed);
  PointMassState s;
  s.position = {rng.uniform(), rng.uniform()};
  s.goal = {rng.uniform(), rng.uniform()};
  return s;
}

bool pointmass_step(PointMassState& s, std::span<const double> action, double success_radius) {
  require_finite(action, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const double delta = std::clamp(action[i], -kPointMassMaxStep, kPointMassMaxStep);
    s.position[i] = std::clamp(s.position[i] + delta, 0.0, 1.0);
  }
  ++s.steps_elapsed;
  return std::hypot(s.position[0] - s.goal[0], s.position[1] - s.goal[1]) < success_radius;
}

std::vector<double> pointmass_controller(const PointMassState& s) {
  const double dx = s.goal[0] - s.position[0];
  const double dy = s.goal[1] - s.position[1];
  const double dist = std::hypot(dx, dy);
  if (dist <= kPointMassMaxStep) return {dx, dy};
  return {dx * kPointMassMaxStep / dist, dy * kPointMassMaxStep / dist};
}

// ---- arm --------------------------------------------------------------------

ArmState arm_reset(std::uint64_t seed) {
  Rng rng(seed);
  ArmState s;
  s.joint_angles = {rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi)};
  const double reach = s.link_lengths[0] + s.link_lengths[1];
  const double inner = std::abs(s.link_lengths[0] - s.link_lengths[1]);
  // Keep the target away from both annulus edges, where the arm is singular.
  const double r = rng.uniform(inner + 0.3 * reach, 0.9 * reach);
  const double phi = rng.uniform(-kPi, kPi);
  s.target = {r * std::cos(phi), r * std::sin(phi)};
  return s;
}

std::array<double, 2> arm_end_effector(const ArmState& s) {
  const double q1 = s.joint_angles[0];
  const double q12 = q1 + s.joint_angles[1];
  return {s.link_lengths[0] * std::cos(q1) + s.link_lengths[1] * std::cos(q12),
          s.link_lengths[0] * std::sin(q1) + s.link_lengths[1] * std::sin(q12)};
}

bool arm_step(ArmState& s, std::span<const double> action, double success_radius) {
  require_finite(action, 3);
  for (std::size_t i = 0; i < 2; ++i) {
    const double delta = std::clamp(action[i], -kArmMaxJointStep, kArmMaxJointStep);
    s.joint_angles[i] = wrap_angle(s.joint_angles[i] + delta);
  }
  s.gripper = std::clamp(action[2], 0.0, 1.0);
  ++s.steps_elapsed;
  const auto ee = arm_end_effector(s);
  return std::hypot(ee[0] - s.target[0], ee[1] - s.target[1]) < success_radius && s.gripper > 0.5;
}

std::vector<double> arm_controller(const ArmState& s) {
  const auto ee = arm_end_effector(s);
  const double ex = s.target[0] - ee[0];
  const double ey = s.target[1] - ee[1];
  const double err = std::hypot(ex, ey);
  const double gripper = err < kArmGripperCloseRadius ? 1.0 : 0.0;

  const double q1 = s.joint_angles[0];
  const double q12 = q1 + s.joint_angles[1];
  const double l1 = s.link_lengths[0];
  const double l2 = s.link_lengths[1];
  // Jacobian of the end effector w.r.t. (q1, q2).
  const double j11 = -l1 * std::sin(q1) - l2 * std::sin(q12);
  const double j12 = -l2 * std::sin(q12);
  const double j21 = l1 * std::cos(q1) + l2 * std::cos(q12);
  const double j22 = l2 * std::cos(q12);

  // Transpose direction, scaled by the step length minimizing the linearized error.
  const double g1 = j11 * ex + j21 * ey;
  const double g2 = j12 * ex + j22 * ey;
  const double jg1 = j11 * g1 + j12 * g2;
  const double jg2 = j21 * g1 + j22 * g2;
  const double jg_sq = jg1 * jg1 + jg2 * jg2;

  double dq1 = 0.0;
  double dq2 = 0.0;
  if (jg_sq > 1e-12) {
    const double alpha = (ex * jg1 + ey * jg2) / jg_sq;
    dq1 = alpha * g1;
    dq2 = alpha * g2;
  } else if (err > 1e-9) {
    // Transpose direction vanishes at a singular pose; bend the elbow.
    dq2 = kArmMaxJointStep;
  }
  // Scale uniformly so the commanded direction survives the per-joint clamp.
  const double peak = std::max(std::abs(dq1), std::abs(dq2));
  if (peak > kArmMaxJointStep) {
    dq1 *= kArmMaxJointStep / peak;
    dq2 *= kArmMaxJointStep / peak;
  }
  return {dq1, dq2, gripper};
}

// ---- factory and demos --------------------------------------------------------

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg) {
  if (cfg.step_limit < 1) throw EnvError("step_limit must be >= 1");
  if (cfg.name == "pointmass") {
    return std::make_unique<PointMassEnv>(
        cfg.success_radius > 0 ? cfg.success_radius : kPointMassSuccessRadius, cfg.step_limit);
  }
  if (cfg.name == "arm") {
    return std::make_unique<ArmEnv>(cfg.success_radius > 0 ? cfg.success_radius : kArmSuccessRadius,
                                    cfg.step_limit);
  }
  throw EnvError("unknown environment '" + cfg.name + "'");
}

int env_action_dims(std::string_view name) {
  if (name == "pointmass") return 2;
  if (name == "arm") return 3;
  throw EnvError("unknown environment '" + std::string(name) + "'");
}

std::vector<Bounds> env_action_bounds(std::string_view name) {
  if (name == "pointmass") {
    return {{-kPointMassMaxStep, kPointMassMaxStep}, {-kPointMassMaxStep, kPointMassMaxStep}};
  }
  if (name == "arm") {
    return {{-kArmMaxJointStep, kArmMaxJointStep}, {-kArmMaxJointStep, kArmMaxJointStep}, {0.0, 1.0}};
  }
  throw EnvError("unknown environment '" + std::string(name) + "'");
}

CodecConfig default_codec(std::string_view name, int horizon, int resolution) {
  CodecConfig cfg;
  cfg.horizon = horizon;
  cfg.dims = env_action_dims(name);
  cfg.resolution = resolution;
  cfg.bounds = env_action_bounds(name);
  cfg.validate();
  return cfg;
}

Episode rollout_scripted(const EnvConfig& cfg, std::uint64_t seed) {
  auto env = make_environment(cfg);
  env->reset(seed);
  Episode ep;
  ep.env = std::string(env->name());
  ep.dims = env->action_dims();
  ep.seed = seed;
  ep.instruction = std::string(env->instruction());
  for (std::int64_t t = 0;; ++t) {
    StepRecord rec;
    rec.t = t;
    rec.state = env->observation();
    rec.action = env->scripted_action();
    const StepOutcome out = env->step(rec.action);
    ep.steps.push_back(std::move(rec));
    if (out.done) {
      ep.success = out.success;
      break;
    }
  }
  return ep;
}

std::vector<Episode> generate_demos(const EnvConfig& cfg, int count, std::uint64_t seed,
                                    int max_attempts) {
  if (count < 1) throw EnvError("demo count must be >= 1");
  if (max_attempts <= 0) max_attempts = 2 * count + 100;
  std::vector<Episode> demos;
  demos.reserve(static_cast<std::size_t>(count));
  for (int attempt = 0; static_cast<int>(demos.size()) < count; ++attempt) {
    if (attempt >= max_attempts) {
      throw EnvError("generate_demos: only " + std::to_string(demos.size()) + " of " +
                     std::to_string(count) + " rollouts succeeded within " +
                     std::to_string(max_attempts) + " attempts");
    }
    Episode ep = rollout_scripted(cfg, mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (ep.success) demos.push_back(std::move(ep));
  }
  return demos;
}

}  // namespace textact

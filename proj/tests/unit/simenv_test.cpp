// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include "textact/simenv.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "textact/random.hpp"

namespace textact {
namespace {

TEST(PointMassTest, ResetIsDeterministic) {
  const auto a = pointmass_reset(0), b = pointmass_reset(0), c = pointmass_reset(1);
  EXPECT_EQ(a.position, b.position);
  EXPECT_EQ(a.goal, b.goal);
  EXPECT_NE(a.goal, c.goal);
}

TEST(PointMassTest, StateInsideArena) {
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto st = pointmass_reset(s);
    for (double v : {st.position[0], st.position[1], st.goal[0], st.goal[1]}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(PointMassTest, StepClampsActions) {
  PointMassState s;
  s.position = {0.5, 0.5};
  s.goal = {0.9, 0.9};
  const double big[] = {1.0, -1.0};
  pointmass_step(s, big);
  EXPECT_DOUBLE_EQ(s.position[0], 0.55);
  EXPECT_DOUBLE_EQ(s.position[1], 0.45);
  EXPECT_EQ(s.steps_elapsed, 1);
}

TEST(PointMassTest, ControllerStepIsBounded) {
  PointMassState s;
  s.position = {0.0, 0.0};
  s.goal = {1.0, 1.0};
  const auto a = pointmass_controller(s);
  EXPECT_NEAR(std::hypot(a[0], a[1]), kPointMassMaxStep, 1e-12);
  s.goal = {0.001, 0.0};
  const auto near = pointmass_controller(s);
  EXPECT_NEAR(near[0], 0.001, 1e-12);
}

TEST(ArmTest, ForwardKinematics) {
  ArmState s;
  s.joint_angles = {0.0, 0.0};
  const auto ee = arm_end_effector(s);
  EXPECT_NEAR(ee[0], 1.0, 1e-12);
  EXPECT_NEAR(ee[1], 0.0, 1e-12);
  s.joint_angles = {M_PI / 2, -M_PI / 2};
  const auto ee2 = arm_end_effector(s);
  EXPECT_NEAR(ee2[0], 0.5, 1e-12);
  EXPECT_NEAR(ee2[1], 0.5, 1e-12);
}

TEST(ArmTest, TargetsReachable) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto s = arm_reset(seed);
    const double r = std::hypot(s.target[0], s.target[1]);
    EXPECT_GE(r, 0.3 - 1e-12);
    EXPECT_LE(r, 0.9 + 1e-12);
  }
}

TEST(ArmTest, ControllerRespectsJointLimit) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = arm_controller(arm_reset(seed));
    ASSERT_EQ(a.size(), 3u);
    EXPECT_LE(std::abs(a[0]), kArmMaxJointStep + 1e-12);
    EXPECT_LE(std::abs(a[1]), kArmMaxJointStep + 1e-12);
    EXPECT_TRUE(a[2] == 0.0 || a[2] == 1.0);
  }
}

TEST(EnvironmentTest, RejectsNonFiniteAction) {
  auto env = make_environment({"pointmass"});
  env->reset(0);
  const double bad[] = {NAN, 0.0};
  EXPECT_THROW(env->step(bad), EnvError);
  EXPECT_THROW(make_environment({"cartpole"}), EnvError);
}

TEST(EnvironmentTest, ObservationRoundTrip) {
  for (const char* name : {"pointmass", "arm"}) {
    auto env = make_environment({name});
    env->reset(3);
    const auto obs = env->observation();
    auto other = make_environment({name});
    other->reset(99);
    other->set_observation(obs);
    EXPECT_EQ(other->observation(), obs);
    EXPECT_EQ(other->scripted_action(), env->scripted_action());
  }
}

TEST(EnvironmentTest, RenderProducesTwoViews) {
  auto env = make_environment({"arm"});
  env->reset(1);
  const auto views = env->render();
  ASSERT_EQ(views.size(), 2u);
  EXPECT_EQ(views[0].width, 64);
  EXPECT_EQ(views[1].height, 64);
  EXPECT_EQ(views, env->clone()->render());
}

TEST(EnvironmentTest, ScriptedControllerSolvesNearlyAllSeeds) {
  for (const char* name : {"pointmass", "arm"}) {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) ok += rollout_scripted({name}, seed).success;
    EXPECT_GE(ok, 99) << name;
  }
}

TEST(EnvironmentTest, StepLimitEndsEpisode) {
  auto env = make_environment({"pointmass", 0.0, 5});
  env->reset(0);
  const double zero[] = {0.0, 0.0};
  StepOutcome out;
  int steps = 0;
  while (!out.done) {
    out = env->step(zero);
    ++steps;
  }
  EXPECT_EQ(steps, 5);
  EXPECT_FALSE(out.success);
}

TEST(EnvironmentTest, StateStaysBoundedUnderRandomActions) {
  Rng rng(17);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto pm = pointmass_reset(seed);
    auto arm = arm_reset(seed);
    for (int t = 0; t < 300; ++t) {
      const double a[] = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-1, 2)};
      pointmass_step(pm, std::span(a, 2));
      arm_step(arm, std::span(a, 3));
      for (double p : pm.position) ASSERT_TRUE(p >= 0.0 && p <= 1.0);
      for (double q : arm.joint_angles) ASSERT_TRUE(q >= -M_PI && q <= M_PI);
    }
  }
}

TEST(EnvironmentTest, SameSeedAndActionsGiveSameTrajectory) {
  Rng rng(2);
  std::vector<std::vector<double>> actions;
  for (int t = 0; t < 50; ++t) actions.push_back({rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 1.0});
  for (const char* name : {"pointmass", "arm"}) {
    auto a = make_environment({name});
    auto b = make_environment({name});
    a->reset(5);
    b->reset(5);
    for (const auto& act : actions) {
      const std::span<const double> s(act.data(), static_cast<std::size_t>(a->action_dims()));
      a->step(s);
      b->step(s);
      ASSERT_EQ(a->observation(), b->observation());
    }
  }
}

TEST(DemosTest, CountLengthAndDeterminism) {
  const EnvConfig cfg{"pointmass"};
  const auto a = generate_demos(cfg, 20, 7);
  const auto b = generate_demos(cfg, 20, 7);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].success);
    EXPECT_GT(a[i].steps.size(), 0u);
    EXPECT_LE(a[i].steps.size(), static_cast<std::size_t>(kDefaultStepLimit));
    EXPECT_EQ(a[i].actions(), b[i].actions());
    EXPECT_EQ(a[i].seed, b[i].seed);
  }
  EXPECT_THROW(generate_demos(cfg, 0, 7), EnvError);
}

TEST(DemosTest, JsonlRoundTrip) {
  const auto demos = generate_demos({"arm"}, 3, 1);
  std::stringstream io;
  write_episodes(io, demos);
  const auto back = read_episodes(io);
  ASSERT_EQ(back.size(), demos.size());
  for (std::size_t i = 0; i < demos.size(); ++i) {
    EXPECT_EQ(back[i].env, demos[i].env);
    EXPECT_EQ(back[i].seed, demos[i].seed);
    EXPECT_EQ(back[i].instruction, demos[i].instruction);
    EXPECT_EQ(back[i].actions(), demos[i].actions());
    ASSERT_EQ(back[i].steps.size(), demos[i].steps.size());
    EXPECT_EQ(back[i].steps.back().state, demos[i].steps.back().state);
  }
}

}  // namespace
}  // namespace textact

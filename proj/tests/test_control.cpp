// Copyright 2026 The PogoSim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pogosim/control.hpp"

namespace pogosim {
namespace {

RigidState at(const Vec3& r) {
  RigidState s;
  s.r = r;
  return s;
}

TEST(PositionControl, EquilibriumAtGoal) {
  const RobotParams p;
  const ControlGains g;
  const Wrench w = position_control(at(Vec3(0, 0, 0.8)), Vec3(0, 0, 0.8), 0.0, g, p);
  EXPECT_NEAR(w.thrust, 0.30411, 1e-12);
  EXPECT_EQ(w.torque, Vec3::Zero());
}

TEST(PositionControl, BelowGoal) {
  const RobotParams p;
  ControlGains g;
  g.kx = 6.0;
  g.kv = 4.0;
  const Wrench w = position_control(at(Vec3(0, 0, 0.7)), Vec3(0, 0, 0.8), 0.0, g, p);
  EXPECT_NEAR(w.thrust, 0.90411, 1e-12);
  EXPECT_LT(w.torque.norm(), 1e-18);
}

// Independent SE(3) attitude law written out from its component formulas.
Vec3 reference_torque(const RigidState& s, const Vec3& target, double yaw, const ControlGains& g,
                      const RobotParams& p) {
  Vec3 f = -g.kx * (s.r - target) - g.kv * s.v + Vec3(0, 0, p.mass * p.gravity);
  // Tilt cap and vertical floor: raise the vertical part until both hold.
  const double h = std::hypot(f.x(), f.y());
  f.z() = std::max({f.z(), g.min_vertical * p.mass * p.gravity, h / std::tan(g.max_tilt)});
  const Vec3 b3 = f / f.norm();
  const Vec3 b1c(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 b2 = b3.cross(b1c).normalized();
  Mat3 rd;
  rd << b2.cross(b3), b2, b3;
  const Mat3 m = rd.transpose() * s.R - s.R.transpose() * rd;
  const Vec3 er = 0.5 * Vec3(m(2, 1), m(0, 2), m(1, 0));
  const Vec3 iw = p.inertia * s.w;
  const Vec3 gyro(s.w.y() * iw.z() - s.w.z() * iw.y(), s.w.z() * iw.x() - s.w.x() * iw.z(),
                  s.w.x() * iw.y() - s.w.y() * iw.x());
  return -g.kR * er - g.kw * s.w + gyro;
}

TEST(PositionControl, MatchesIndependentImplementation) {
  const RobotParams p;
  const ControlGains g;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec3 target(0, 0, 0.8);
  for (int i = 0; i < 1000; ++i) {
    RigidState s;
    s.r = target + 0.1 * Vec3(u(rng), u(rng), u(rng));
    s.v = 0.2 * Vec3(u(rng), u(rng), u(rng));
    s.R = exp_so3(Vec3(u(rng), u(rng), u(rng)), 0.3);
    s.w = Vec3(u(rng), u(rng), u(rng));
    const double yaw = 0.5 * u(rng);
    const Wrench w = position_control(s, target, yaw, g, p);
    EXPECT_LT((w.torque - reference_torque(s, target, yaw, g, p)).norm(), 1e-10) << i;
  }
}

TEST(PositionControl, DownwardDemandStaysNearUpright) {
  const RobotParams p;
  const ControlGains g;
  RigidState s = at(Vec3(0.001, 0, 0.5));
  s.v = Vec3(0, 0, 3.0);  // climbing fast: desired force points down
  const Vec3 axis = thrust_axis(-g.kx * (s.r - Vec3(0, 0, 0.8)) - g.kv * s.v + p.weight() * e3(), g.max_tilt,
                                g.min_vertical * p.weight());
  EXPECT_LT(std::acos(axis.z()), 0.01);
  EXPECT_EQ(position_control(s, Vec3(0, 0, 0.8), 0.0, g, p).thrust, 0.0);
}

TEST(ThrustAxis, TiltIsCapped) {
  const Vec3 axis = thrust_axis(Vec3(10, 0, 0.1), 0.6, 0.1);
  EXPECT_NEAR(std::acos(axis.z()), 0.6, 1e-12);
  EXPECT_NEAR(axis.norm(), 1.0, 1e-15);
  EXPECT_EQ(thrust_axis(Vec3(0, 0, -1), 0.6, 0.1), e3());
}

TEST(AttitudeControl, AlignedAtRest) {
  const RobotParams p;
  const ControlGains g;
  const BhcConfig cfg;
  RigidState s;
  s.R = rot_z(0.4);
  const Wrench w = attitude_control(s, 0.4, g, cfg, p);
  EXPECT_EQ(w.thrust, cfg.epsilon);
  EXPECT_LT(w.torque.norm(), 1e-18);
}

TEST(AttitudeControl, PureRateDamping) {
  const RobotParams p;
  ControlGains g;
  g.kw = 2.5e-4;
  RigidState s;
  s.R = rot_z(0.2);
  s.w = Vec3(0, 0, 1);
  const Wrench w = attitude_control(s, 0.2, g, BhcConfig{}, p);
  EXPECT_LT((w.torque - Vec3(0, 0, -2.5e-4)).norm(), 1e-15);
}

TEST(AttitudeControl, SmallRollError) {
  const Vec3 er = attitude_error(rot_x(0.01), Rot3::Identity());
  EXPECT_LT((er - Vec3(0.01, 0, 0)).norm(), 1e-5);
}

TEST(AttitudeControl, ZeroErrorGivesZeroTorque) {
  const RobotParams p;
  const ControlGains g;
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    RigidState s;
    s.R = exp_so3(Vec3(u(rng), u(rng), u(rng)), 1.0);
    EXPECT_EQ(attitude_torque(s, s.R, g, p), Vec3::Zero());
  }
}

TEST(Mix, SymmetricSplit) {
  const RobotParams p;
  for (double f : mix(0.3, Vec3::Zero(), p)) EXPECT_NEAR(f, 0.075, 1e-15);
  for (double f : mix(0.2, Vec3::Zero(), p)) EXPECT_NEAR(f, 0.05, 1e-15);
}

TEST(Mix, RoundTrip) {
  const RobotParams p;
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> thrust(0.1, 0.5);
  std::uniform_real_distribution<double> tau(-1e-3, 1e-3);
  for (int i = 0; i < 1000; ++i) {
    const double fq = thrust(rng);
    const Vec3 t(tau(rng), tau(rng), tau(rng) * 0.1);
    const Wrench back = allocate(unclamped_mix(fq, t, p), p);
    EXPECT_LT(std::abs(back.thrust - fq), 1e-12);
    EXPECT_LT((back.torque - t).norm(), 1e-12);
  }
}

TEST(Mix, ExactWhenInRange) {
  const RobotParams p;
  bool saturated = true;
  const auto f = mix(0.3, Vec3(1e-4, -2e-4, 1e-5), p, &saturated);
  EXPECT_FALSE(saturated);
  EXPECT_EQ(f, unclamped_mix(0.3, Vec3(1e-4, -2e-4, 1e-5), p));
}

TEST(Mix, TorqueKeptWhenCollectiveSaturates) {
  const RobotParams p;
  bool saturated = false;
  const Vec3 t(5e-4, -3e-4, 0.0);
  const auto f = mix(0.8, t, p, &saturated);
  EXPECT_TRUE(saturated);
  for (double x : f) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, p.rotor_max);
  }
  EXPECT_LT((allocate(f, p).torque - t).norm(), 1e-15);
  // Same at the low end: a torque demand with almost no thrust.
  const auto g = mix(1e-4, t, p, &saturated);
  EXPECT_TRUE(saturated);
  EXPECT_LT((allocate(g, p).torque - t).norm(), 1e-15);
}

TEST(Mix, OversizedTorqueScaledAlongItsDirection) {
  const RobotParams p;
  const Vec3 t(0.05, 0.0, 0.0);
  const auto f = mix(0.3, t, p);
  for (double x : f) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, p.rotor_max);
  }
  const Vec3 out = allocate(f, p).torque;
  EXPECT_GT(out.x(), 0.0);
  EXPECT_NEAR(out.y(), 0.0, 1e-15);
}

BhcConfig bhc_defaults() {
  BhcConfig c;
  c.sphere_radius = 0.05;
  c.rate_threshold = 0.5;
  return c;
}

TEST(BhcStep, DropWhenInsideSphereAndSlow) {
  const BhcConfig cfg = bhc_defaults();
  RigidState s = at(cfg.target + Vec3(0.01, 0, 0));
  s.w = Vec3(0.1, 0, 0);
  const BhcDecision d = bhc_step(BhcPhase::PositionHold, s, PogoState{}, cfg);
  EXPECT_EQ(d.phase, BhcPhase::Descend);
  EXPECT_EQ(d.mode, ControlMode::Attitude);

  s.w = Vec3(0.6, 0, 0);
  EXPECT_EQ(bhc_step(BhcPhase::PositionHold, s, PogoState{}, cfg).phase, BhcPhase::PositionHold);
  s.w = Vec3::Zero();
  s.r = cfg.target + Vec3(0, 0, 0.06);
  EXPECT_EQ(bhc_step(BhcPhase::PositionHold, s, PogoState{}, cfg).mode, ControlMode::Position);
}

TEST(BhcStep, CycleEdges) {
  const BhcConfig cfg = bhc_defaults();
  PogoState contact;
  contact.in_contact = true;
  contact.deformation = -0.01;
  const RigidState low = at(Vec3(0, 0, 0.045));

  EXPECT_EQ(bhc_step(BhcPhase::Descend, low, PogoState{}, cfg).phase, BhcPhase::Descend);
  const BhcDecision touch = bhc_step(BhcPhase::Descend, low, contact, cfg);
  EXPECT_EQ(touch.phase, BhcPhase::Compression);
  EXPECT_EQ(touch.mode, ControlMode::Attitude);

  contact.deformation_rate = -0.3;
  EXPECT_EQ(bhc_step(BhcPhase::Compression, low, contact, cfg).phase, BhcPhase::Compression);
  contact.deformation_rate = 0.01;
  const BhcDecision rebound = bhc_step(BhcPhase::Compression, low, contact, cfg);
  EXPECT_EQ(rebound.phase, BhcPhase::Rebound);
  EXPECT_EQ(rebound.mode, ControlMode::Position);

  EXPECT_EQ(bhc_step(BhcPhase::Rebound, low, contact, cfg).phase, BhcPhase::Rebound);
  EXPECT_EQ(bhc_step(BhcPhase::Rebound, low, PogoState{}, cfg).phase, BhcPhase::Ascend);
  EXPECT_EQ(bhc_step(BhcPhase::Ascend, low, PogoState{}, cfg).phase, BhcPhase::Ascend);
  EXPECT_EQ(bhc_step(BhcPhase::Ascend, at(cfg.target), PogoState{}, cfg).phase, BhcPhase::Descend);
}

TEST(BhcStep, CompressionWithoutContactFaults) {
  EXPECT_THROW(bhc_step(BhcPhase::Compression, at(Vec3(0, 0, 0.3)), PogoState{}, bhc_defaults()),
               SimulationFault);
}

TEST(BhcStep, DwellDelaysTheDrop) {
  BhcConfig cfg = bhc_defaults();
  cfg.dwell_time = 0.01;
  BounceHoverController c(cfg, true);
  const RigidState s = at(cfg.target);
  int held = 0;
  while (c.update(s, PogoState{}, 1e-3).phase == BhcPhase::PositionHold) ++held;
  EXPECT_NEAR(held, 11, 1);
}

TEST(BounceHoverController, FirstSampleHolds) {
  const BhcConfig cfg = bhc_defaults();
  BounceHoverController c(cfg, true);
  const RigidState s = at(cfg.target);
  EXPECT_EQ(c.update(s, PogoState{}, 1e-3).phase, BhcPhase::PositionHold);
  EXPECT_EQ(c.update(s, PogoState{}, 1e-3).phase, BhcPhase::Descend);
}

TEST(BounceHoverController, HoverModeIsPinned) {
  const BhcConfig cfg = bhc_defaults();
  BounceHoverController c(cfg, false);
  const RigidState s = at(cfg.target);
  for (int i = 0; i < 100; ++i) {
    const BhcDecision d = c.update(s, PogoState{}, 1e-3);
    EXPECT_EQ(d.phase, BhcPhase::PositionHold);
    EXPECT_EQ(d.mode, ControlMode::Position);
  }
}

TEST(BhcPhase, NamesRoundTrip) {
  for (BhcPhase ph : {BhcPhase::PositionHold, BhcPhase::Descend, BhcPhase::Compression, BhcPhase::Rebound,
                      BhcPhase::Ascend}) {
    EXPECT_EQ(parse_phase(to_string(ph)), ph);
  }
  EXPECT_FALSE(parse_phase("Hover"));
}

TEST(Gains, Validation) {
  EXPECT_NO_THROW(validate(ControlGains{}));
  ControlGains g;
  g.kR = 0;
  EXPECT_THROW(validate(g), ConfigError);
  BhcConfig c;
  EXPECT_NO_THROW(validate(c, RobotParams{}));
  c.epsilon = 0.0;
  EXPECT_THROW(validate(c, RobotParams{}), ConfigError);
  c.epsilon = 0.01;
  EXPECT_THROW(validate(c, RobotParams{}), ConfigError);
}

}  // namespace
}  // namespace pogosim

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

// Geometric position/attitude control on SE(3), X-frame motor mixing, and
// the Bounce-Hover phase machine that switches between them.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "pogosim/dynamics.hpp"
#include "pogosim/errors.hpp"
#include "pogosim/rigid.hpp"

namespace pogosim {

struct ControlGains {
  double kx = 0.3;       // N/m
  double kv = 0.5;       // N s/m
  double kR = 0.02;      // N m
  double kw = 9e-4;      // N m s
  // Largest tilt of the desired thrust axis from world z, rad.
  double max_tilt = 0.6;
  // Floor on the vertical desired force, as a fraction of the weight.
  double min_vertical = 0.5;
};

inline void validate(const ControlGains& g) {
  if (!(g.kx > 0 && g.kv > 0 && g.kR > 0 && g.kw > 0)) {
    throw ConfigError("gains: kx, kv, kR, kw must all be > 0");
  }
  if (!(g.min_vertical > 0)) throw ConfigError("gains: min_vertical must be > 0");
  if (!(g.max_tilt > 0 && g.max_tilt < M_PI / 2)) {
    throw ConfigError("gains: max_tilt must be in (0, pi/2)");
  }
}

struct BhcConfig {
  Vec3 target = Vec3(0.0, 0.0, 0.8);  // r_d, m
  double yaw = 0.0;                   // psi_d, rad
  double sphere_radius = 0.03;        // m
  double rate_threshold = 0.5;        // rad/s
  double epsilon = 1e-4;              // attitude-only thrust, N
  double dwell_time = 0.0;            // s inside the sphere before each drop
};

inline void validate(const BhcConfig& c, const RobotParams& p) {
  if (!c.target.allFinite() || !std::isfinite(c.yaw)) throw ConfigError("bhc: non-finite target");
  if (!(c.sphere_radius > 0)) throw ConfigError("bhc: sphere_radius must be > 0");
  if (!(c.rate_threshold > 0)) throw ConfigError("bhc: rate_threshold must be > 0");
  if (!(c.epsilon > 0 && c.epsilon <= 1e-3 * p.weight())) {
    throw ConfigError("bhc: epsilon must be in (0, 1e-3 * m * g]");
  }
  if (!(c.dwell_time >= 0)) throw ConfigError("bhc: dwell_time must be >= 0");
}

struct Wrench {
  double thrust = 0.0;
  Vec3 torque = Vec3::Zero();
};

/// SO(3) attitude error 0.5 * vee(Rd^T R - R^T Rd).
inline Vec3 attitude_error(const Rot3& R, const Rot3& Rd) {
  return 0.5 * vee(Rd.transpose() * R - R.transpose() * Rd);
}

/// Attitude loop shared by both modes; desired body rate is zero.
inline Vec3 attitude_torque(const RigidState& s, const Rot3& Rd, const ControlGains& g,
                            const RobotParams& p) {
  return -g.kR * attitude_error(s.R, Rd) - g.kw * s.w + s.w.cross(p.inertia * s.w);
}

/// Desired attitude with body z along `b3` and heading from `yaw`.
inline Rot3 desired_attitude(const Vec3& b3, double yaw) {
  const Vec3 heading(std::cos(yaw), std::sin(yaw), 0.0);
  Vec3 b2 = b3.cross(heading);
  const double n = b2.norm();
  if (n < 1e-9) return rot_z(yaw);
  b2 /= n;
  Rot3 Rd;
  Rd.col(0) = b2.cross(b3);
  Rd.col(1) = b2;
  Rd.col(2) = b3;
  return Rd;
}

/// Unit thrust axis for a desired force. The vertical part is floored at
/// `min_vertical` so a downward demand yields a small tilt toward the
/// horizontal error instead of a flip; the tilt is then capped at `max_tilt`.
inline Vec3 thrust_axis(const Vec3& force, double max_tilt, double min_vertical) {
  const Vec3 horizontal(force.x(), force.y(), 0.0);
  const double h = horizontal.norm();
  const double vertical = std::max(force.z(), min_vertical);
  if (h < 1e-12) return e3();
  const double tilt = std::min(std::atan2(h, vertical), max_tilt);
  return std::sin(tilt) * horizontal / h + std::cos(tilt) * e3();
}

/// Full position controller. Returns the desired (collective thrust, body
/// torque). Falls back to Rd = Rot_z(yaw) when the desired force vanishes.
inline Wrench position_control(const RigidState& s, const Vec3& target, double yaw,
                               const ControlGains& g, const RobotParams& p) {
  const Vec3 force = -g.kx * (s.r - target) - g.kv * s.v + p.weight() * e3();
  const Rot3 Rd = force.norm() < 1e-9
                      ? rot_z(yaw)
                      : desired_attitude(thrust_axis(force, g.max_tilt, g.min_vertical * p.weight()), yaw);
  Wrench out;
  out.thrust = std::max(0.0, force.dot(s.R * e3()));
  out.torque = attitude_torque(s, Rd, g, p);
  return out;
}

/// Attitude-only control: level with the desired yaw, near-zero thrust.
inline Wrench attitude_control(const RigidState& s, double yaw, const ControlGains& g,
                               const BhcConfig& cfg, const RobotParams& p) {
  return {cfg.epsilon, attitude_torque(s, rot_z(yaw), g, p)};
}

// X-frame layout, rotors at (+d,-d), (-d,-d), (-d,+d), (+d,+d) with
// d = arm / sqrt(2), spinning alternately. Row i holds rotor i's
// contribution signs to (roll, pitch, yaw).
inline constexpr std::array<std::array<double, 3>, 4> kRotorSigns{{
    {-1.0, -1.0, -1.0},
    {-1.0, +1.0, +1.0},
    {+1.0, +1.0, -1.0},
    {+1.0, -1.0, +1.0},
}};

/// Allocation matrix mapping rotor forces to (thrust, tau_x, tau_y, tau_z).
inline Eigen::Matrix4d allocation_matrix(const RobotParams& p) {
  const double d = p.arm / std::sqrt(2.0);
  Eigen::Matrix4d a;
  for (int i = 0; i < 4; ++i) {
    a(0, i) = 1.0;
    a(1, i) = d * kRotorSigns[i][0];
    a(2, i) = d * kRotorSigns[i][1];
    a(3, i) = p.yaw_coeff * kRotorSigns[i][2];
  }
  return a;
}

/// Wrench produced by a set of rotor forces.
inline Wrench allocate(const std::array<double, 4>& f, const RobotParams& p) {
  const Eigen::Vector4d w = allocation_matrix(p) * Eigen::Map<const Eigen::Vector4d>(f.data());
  return {w[0], Vec3(w[1], w[2], w[3])};
}

/// Exact inverse of the allocation, no limits applied.
inline std::array<double, 4> unclamped_mix(double thrust, const Vec3& torque, const RobotParams& p) {
  const double d = p.arm / std::sqrt(2.0);
  std::array<double, 4> f{};
  for (std::size_t i = 0; i < 4; ++i) {
    f[i] = 0.25 * (thrust + kRotorSigns[i][0] * torque.x() / d + kRotorSigns[i][1] * torque.y() / d +
                   kRotorSigns[i][2] * torque.z() / p.yaw_coeff);
  }
  return f;
}

/// Rotor forces for a wrench, limited to [0, rotor_max]. Torque has
/// priority over collective thrust: when the exact solution leaves the
/// range, the collective is shifted first, and the torque share is scaled
/// down only if its own spread exceeds rotor_max. `saturated` (if given)
/// reports whether the result differs from the exact solution.
inline std::array<double, 4> mix(double thrust, const Vec3& torque, const RobotParams& p,
                                 bool* saturated = nullptr) {
  const std::array<double, 4> exact = unclamped_mix(thrust, torque, p);
  const auto [lo, hi] = std::minmax_element(exact.begin(), exact.end());
  if (*lo >= 0.0 && *hi <= p.rotor_max) {
    if (saturated) *saturated = false;
    return exact;
  }
  std::array<double, 4> share{};
  for (std::size_t i = 0; i < 4; ++i) share[i] = exact[i] - 0.25 * thrust;
  const auto [slo, shi] = std::minmax_element(share.begin(), share.end());
  double tlo = *slo;
  double thi = *shi;
  const double spread = thi - tlo;
  if (spread > p.rotor_max) {
    const double scale = p.rotor_max / spread;
    for (double& x : share) x *= scale;
    tlo *= scale;
    thi *= scale;
  }
  const double base = std::clamp(0.25 * thrust, -tlo, p.rotor_max - thi);
  std::array<double, 4> f{};
  for (std::size_t i = 0; i < 4; ++i) f[i] = std::clamp(base + share[i], 0.0, p.rotor_max);
  if (saturated) *saturated = true;
  return f;
}

enum class BhcPhase { PositionHold, Descend, Compression, Rebound, Ascend };
enum class ControlMode { Position, Attitude };

inline constexpr std::array<std::string_view, 5> kPhaseNames{
    "PositionHold", "Descend", "Compression", "Rebound", "Ascend"};

inline std::string_view to_string(BhcPhase ph) { return kPhaseNames[static_cast<std::size_t>(ph)]; }

inline std::optional<BhcPhase> parse_phase(std::string_view name) {
  for (std::size_t i = 0; i < kPhaseNames.size(); ++i) {
    if (kPhaseNames[i] == name) return static_cast<BhcPhase>(i);
  }
  return std::nullopt;
}

inline ControlMode mode_for(BhcPhase ph) {
  return ph == BhcPhase::Descend || ph == BhcPhase::Compression ? ControlMode::Attitude
                                                               : ControlMode::Position;
}

/// Inside the acceptance sphere and rotating slower than the threshold.
inline bool ready_to_drop(const RigidState& s, const BhcConfig& cfg) {
  return (cfg.target - s.r).norm() <= cfg.sphere_radius && s.w.norm() < cfg.rate_threshold;
}

struct BhcDecision {
  BhcPhase phase;
  ControlMode mode;
};

/// One transition of the phase machine. `settled_for` is how long
/// ready_to_drop has held continuously; drops wait for cfg.dwell_time.
/// Throws SimulationFault for a contact phase without ground contact.
inline BhcDecision bhc_step(BhcPhase phase, const RigidState& s, const PogoState& pogo,
                            const BhcConfig& cfg, double settled_for = 0.0) {
  const bool ready = ready_to_drop(s, cfg) && settled_for >= cfg.dwell_time;
  BhcPhase next = phase;
  switch (phase) {
    case BhcPhase::PositionHold:
    case BhcPhase::Ascend:
      if (ready) next = BhcPhase::Descend;
      break;
    case BhcPhase::Descend:
      if (pogo.in_contact) next = BhcPhase::Compression;
      break;
    case BhcPhase::Compression:
      if (!pogo.in_contact) throw SimulationFault("Compression phase without ground contact");
      if (pogo.deformation_rate > 0.0) next = BhcPhase::Rebound;
      break;
    case BhcPhase::Rebound:
      if (!pogo.in_contact) next = BhcPhase::Ascend;
      break;
  }
  return {next, mode_for(next)};
}

/// Stateful wrapper that tracks the dwell timer. In hover mode the phase is
/// pinned to PositionHold.
class BounceHoverController {
 public:
  BounceHoverController(BhcConfig cfg, bool bounce) : cfg_(cfg), bounce_(bounce) {}

  BhcDecision update(const RigidState& s, const PogoState& pogo, double dt) {
    if (!bounce_) return {BhcPhase::PositionHold, ControlMode::Position};
    // The first sample always holds, so a run opens in PositionHold.
    if (!started_) {
      started_ = true;
      return {phase_, mode_for(phase_)};
    }
    settled_for_ = ready_to_drop(s, cfg_) ? settled_for_ + dt : 0.0;
    // The timer counts the current sample, so a zero dwell fires at once.
    const BhcDecision d = bhc_step(phase_, s, pogo, cfg_, settled_for_ - dt);
    phase_ = d.phase;
    return d;
  }

  BhcPhase phase() const { return phase_; }

 private:
  BhcConfig cfg_;
  bool bounce_;
  BhcPhase phase_ = BhcPhase::PositionHold;
  bool started_ = false;
  double settled_for_ = 0.0;
};

/// Controller output for the selected mode.
inline Wrench control_for(ControlMode mode, const RigidState& s, const ControlGains& g,
                          const BhcConfig& cfg, const RobotParams& p) {
  return mode == ControlMode::Attitude ? attitude_control(s, cfg.yaw, g, cfg, p)
                                       : position_control(s, cfg.target, cfg.yaw, g, p);
}

}  // namespace pogosim

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

// Hybrid flight/contact equations of motion for a quadrotor carrying a
// passive spring-damper leg, and the fixed-step integrator.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <utility>

#include "pogosim/errors.hpp"
#include "pogosim/rigid.hpp"

namespace pogosim {

struct RobotParams {
  double mass = 0.031;                                        // kg
  Inertia inertia = Vec3(1.4e-5, 1.4e-5, 2.2e-5).asDiagonal();  // kg m^2
  double spring_k = 400.0;                                    // N/m
  double damping_b = 1.0;                                     // N s/m
  double rest_length = 0.055;                                 // l0, m
  double min_length = 0.010;                                  // l_min, m
  double gravity = 9.81;                                      // m/s^2
  double arm = 0.046;                                         // rotor distance from center, m
  double yaw_coeff = 0.006;                                   // yaw torque per unit thrust, m
  double rotor_max = 0.15;                                    // per-rotor ceiling, N
  double stop_k = 20000.0;                                    // hard-stop stiffness, N/m
  // Damping ratio of the hard stop (1 = critical, a near-plastic impact).
  double stop_zeta = 1.0;
  // Use the inertia about the pivot at the natural length for every contact
  // step instead of recomputing it from the current compression.
  bool freeze_contact_inertia = false;

  double weight() const { return mass * gravity; }
  double stop_damping() const { return 2.0 * stop_zeta * std::sqrt(stop_k * mass); }
  double hover_rotor_force() const { return weight() / 4.0; }
};

/// Throws ConfigError naming the first violated constraint.
inline void validate(const RobotParams& p) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("robot: ") + msg);
  };
  require(p.mass > 0.0, "mass must be > 0");
  require(p.spring_k > 0.0, "spring_k must be > 0");
  require(p.damping_b >= 0.0, "damping_b must be >= 0");
  require(p.min_length > 0.0 && p.min_length < p.rest_length,
          "need 0 < min_length < rest_length");
  require(p.arm > 0.0, "arm must be > 0");
  require(p.rotor_max > 0.0, "rotor_max must be > 0");
  require(p.stop_k >= 10.0 * p.spring_k, "stop_k must be >= 10 * spring_k");
  require(p.stop_zeta >= 0.0, "stop_zeta must be >= 0");
  require(p.gravity > 0.0, "gravity must be > 0");
  require(p.yaw_coeff > 0.0, "yaw_coeff must be > 0");
  require((p.inertia - p.inertia.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          "inertia must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> eig(p.inertia);
  require(eig.eigenvalues().minCoeff() > 0.0, "inertia must be positive definite");
}

struct RigidState {
  Vec3 r = Vec3::Zero();         // world position of the center of mass, m
  Vec3 v = Vec3::Zero();         // world velocity, m/s
  Rot3 R = Rot3::Identity();     // body to world
  Vec3 w = Vec3::Zero();         // body angular velocity, rad/s

  bool finite() const { return r.allFinite() && v.allFinite() && R.allFinite() && w.allFinite(); }
};

struct PogoState {
  bool in_contact = false;
  Vec3 contact_point = Vec3::Zero();  // valid only while in contact
  double deformation = 0.0;           // l - l0, <= 0 while compressed
  double deformation_rate = 0.0;
  // Tilt (rad) applied to the spring force direction for the current
  // contact; drawn once per touchdown.
  double ground_angle = 0.0;
};

struct ControlCommand {
  double thrust = 0.0;                 // collective f_q along body z, N
  Vec3 torque = Vec3::Zero();          // body torque, N m
  std::array<double, 4> rotor_forces{};  // what the rotors actually produce, N
};

/// Pogo force magnitude along the leg. Never negative: the leg can push on
/// the ground but not pull. Below the minimum length a stiff damped penalty
/// spring stands in for the mechanical stop.
inline double spring_force(double deformation, double deformation_rate, const RobotParams& p) {
  double f = std::max(0.0, -p.spring_k * deformation - p.damping_b * deformation_rate);
  const double overrun = p.min_length - (p.rest_length + deformation);
  if (overrun > 0.0) {
    f += std::max(0.0, p.stop_k * overrun - p.stop_damping() * deformation_rate);
  }
  return f;
}

/// Foot position for a leg of length `length` along body -z.
inline Vec3 tip_position(const RigidState& s, double length) {
  return s.r - length * (s.R * e3());
}

/// Contact point (tip projected onto z = 0) if the undeformed leg reaches
/// the ground.
inline std::optional<Vec3> detect_touchdown(const RigidState& s, const RobotParams& p) {
  Vec3 tip = tip_position(s, p.rest_length);
  if (tip.z() > 0.0) return std::nullopt;
  tip.z() = 0.0;
  return tip;
}

struct SpringKinematics {
  double deformation;
  double rate;
};

/// Leg length is the projection of (r - p_c) on the body axis; the rate is
/// its analytic time derivative with p_c fixed (no slip).
inline SpringKinematics contact_spring_state(const RigidState& s, const Vec3& contact_point,
                                             const RobotParams& p) {
  const Vec3 axis = s.R * e3();
  const Vec3 offset = s.r - contact_point;
  const double length = axis.dot(offset);
  if (!(length > 0.0)) throw SimulationFault("pogo leg collapsed through the ground");
  const Vec3 axis_rate = s.R * hat(s.w) * e3();
  return {length - p.rest_length, axis_rate.dot(offset) + axis.dot(s.v)};
}

/// Unit spring-force direction: the body axis tilted by `angle` about the
/// horizontal axis normal to the plane spanned by the body axis and world z
/// (world y when upright).
inline Vec3 spring_direction(const Rot3& R, double angle) {
  const Vec3 axis_b = R * e3();
  if (angle == 0.0) return axis_b;
  Vec3 pivot = e3().cross(axis_b);
  const double n = pivot.norm();
  pivot = n > 1e-12 ? Vec3(pivot / n) : Vec3::UnitY();
  return (exp_so3(pivot, angle) * axis_b).normalized();
}

struct Accel {
  Vec3 linear;   // world frame, m/s^2
  Vec3 angular;  // body frame, rad/s^2
};

inline Accel flight_accel(const RigidState& s, const ControlCommand& cmd, const RobotParams& p) {
  const Vec3 lin = (cmd.thrust / p.mass) * (s.R * e3()) - p.gravity * e3();
  const Vec3 ang = p.inertia.ldlt().solve(cmd.torque - s.w.cross(p.inertia * s.w));
  return {lin, ang};
}

/// Inertia about the foot for the current leg length.
inline Inertia contact_inertia(const PogoState& pogo, const RobotParams& p) {
  const double length = p.freeze_contact_inertia ? p.rest_length : p.rest_length + pogo.deformation;
  return parallel_axis(p.inertia, p.mass, length);
}

/// Gravity moment about the foot, body frame.
inline Vec3 gravity_moment(const RigidState& s, double length, const RobotParams& p) {
  return (length * e3()).cross(s.R.transpose() * (-p.weight() * e3()));
}

inline Accel contact_accel(const RigidState& s, const PogoState& pogo, const ControlCommand& cmd,
                           const RobotParams& p) {
  const double fs = spring_force(pogo.deformation, pogo.deformation_rate, p);
  const Vec3 dir = spring_direction(s.R, pogo.ground_angle);
  const Vec3 lin =
      (cmd.thrust / p.mass) * (s.R * e3()) + (fs / p.mass) * dir - p.gravity * e3();
  const Inertia ip = contact_inertia(pogo, p);
  const Vec3 moment = gravity_moment(s, p.rest_length + pogo.deformation, p);
  const Vec3 ang = ip.ldlt().solve(cmd.torque + moment - s.w.cross(ip * s.w));
  return {lin, ang};
}

struct StepOutput {
  RigidState state;
  PogoState pogo;
  bool touchdown = false;
  bool liftoff = false;
};

inline Accel accel(const RigidState& s, const PogoState& pogo, const ControlCommand& cmd,
                   const RobotParams& p) {
  return pogo.in_contact ? contact_accel(s, pogo, cmd, p) : flight_accel(s, cmd, p);
}

/// Updates the contact flag and spring state of `pogo` for the pose in `s`:
/// touchdown when the undeformed leg reaches the ground, liftoff once the
/// leg is back to its natural length.
inline void resolve_contact(const RigidState& s, PogoState& pogo, const RobotParams& p,
                            StepOutput& out) {
  if (pogo.in_contact) {
    const SpringKinematics k = contact_spring_state(s, pogo.contact_point, p);
    if (k.deformation >= 0.0) {
      pogo = PogoState{};
      out.liftoff = true;
    } else {
      pogo.deformation = k.deformation;
      pogo.deformation_rate = k.rate;
    }
  } else if (auto contact = detect_touchdown(s, p)) {
    const SpringKinematics k = contact_spring_state(s, *contact, p);
    pogo.in_contact = true;
    pogo.contact_point = *contact;
    pogo.deformation = k.deformation;
    pogo.deformation_rate = k.rate;
    pogo.ground_angle = 0.0;
    out.touchdown = true;
  }
}

/// One fixed step of kick-drift-kick (Stormer-Verlet) integration with the
/// command held constant over the step. Contact transitions are resolved
/// at the drifted pose, before the closing half-kick. The attitude drifts
/// through the exponential map, so R stays on SO(3).
/// Throws SimulationFault on a non-finite state or collapsed leg.
inline StepOutput step(const RigidState& s, const PogoState& pogo, const ControlCommand& cmd,
                       const RobotParams& p, double dt) {
  const double half = 0.5 * dt;
  const Accel a0 = accel(s, pogo, cmd, p);

  StepOutput out;
  RigidState& n = out.state;
  n.v = s.v + half * a0.linear;
  n.w = s.w + half * a0.angular;
  n.r = s.r + dt * n.v;
  n.R = s.R * exp_so3(n.w, dt);
  if (!n.finite()) throw SimulationFault("non-finite state");

  out.pogo = pogo;
  resolve_contact(n, out.pogo, p, out);

  const Accel a1 = accel(n, out.pogo, cmd, p);
  n.v += half * a1.linear;
  n.w += half * a1.angular;
  if (!n.finite()) throw SimulationFault("non-finite state");
  if (out.pogo.in_contact) {
    out.pogo.deformation_rate = contact_spring_state(n, out.pogo.contact_point, p).rate;
  }
  return out;
}

/// Kinetic + gravitational + elastic (leg spring and hard stop) energy, J.
inline double mechanical_energy(const RigidState& s, const PogoState& pogo, const RobotParams& p) {
  const double kinetic = 0.5 * p.mass * s.v.squaredNorm() + 0.5 * s.w.dot(p.inertia * s.w);
  double elastic = 0.0;
  if (pogo.in_contact) {
    elastic = 0.5 * p.spring_k * pogo.deformation * pogo.deformation;
    const double overrun = p.min_length - (p.rest_length + pogo.deformation);
    if (overrun > 0.0) elastic += 0.5 * p.stop_k * overrun * overrun;
  }
  return kinetic + p.weight() * s.r.z() + elastic;
}

}  // namespace pogosim

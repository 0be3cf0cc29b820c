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

// Rotation and inertia utilities shared by the dynamics and controllers.

#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "pogosim/errors.hpp"

namespace pogosim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
// Body-to-world rotation. Kept as a plain matrix; the SO(3) invariants are
// maintained by construction (exp_so3, rot_z) rather than by the type.
using Rot3 = Eigen::Matrix3d;
// Symmetric positive-definite inertia tensor, kg m^2.
using Inertia = Eigen::Matrix3d;

inline constexpr double kSkewTolerance = 1e-9;

inline Vec3 e3() { return Vec3::UnitZ(); }

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

/// Skew-symmetric matrix such that hat(w) * u == w.cross(u).
inline Mat3 hat(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return s;
}

/// Inverse of hat. Throws DomainError if `s` is not skew within 1e-9.
inline Vec3 vee(const Mat3& s) {
  if ((s + s.transpose()).cwiseAbs().maxCoeff() > kSkewTolerance) {
    throw DomainError("vee: matrix is not skew-symmetric");
  }
  return Vec3(s(2, 1), s(0, 2), s(1, 0));
}

/// Rodrigues' formula for the rotation by angle |w|*dt about w/|w|.
inline Rot3 exp_so3(const Vec3& w, double dt) {
  const Vec3 phi = w * dt;
  const double theta = phi.norm();
  const Mat3 k = hat(phi);
  if (theta < 1e-8) {
    // Second-order series; the remainder is below double precision here.
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * k + b * k * k;
}

/// Rotation about world z by `psi` radians.
inline Rot3 rot_z(double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Rot3 r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

inline Rot3 rot_y(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Rot3 r;
  r << c, 0.0, s,
       0.0, 1.0, 0.0,
       -s, 0.0, c;
  return r;
}

inline Rot3 rot_x(double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Rot3 r;
  r << 1.0, 0.0, 0.0,
       0.0, c, -s,
       0.0, s, c;
  return r;
}

/// Inertia about a pivot displaced by `d` along body -z from the center of
/// mass. Only the transverse terms grow: I + m d^2 diag(1, 1, 0).
inline Inertia parallel_axis(const Inertia& inertia, double mass, double d) {
  Inertia shifted = inertia;
  const double md2 = mass * d * d;
  shifted(0, 0) += md2;
  shifted(1, 1) += md2;
  return shifted;
}

/// Frobenius norm of R^T R - I.
inline double orthonormality_error(const Rot3& r) {
  return (r.transpose() * r - Mat3::Identity()).norm();
}

}  // namespace pogosim

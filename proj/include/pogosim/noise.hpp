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

// Actuator and ground-contact disturbances.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numbers>
#include <random>

#include "pogosim/dynamics.hpp"

namespace pogosim {

struct NoiseConfig {
  double sigma = 0.2;       // dimensionless noise level
  std::uint64_t seed = 1;
  // Std of the ground-direction tilt is this multiple of sigma, in degrees.
  double ground_scale = 5.0;
};

// One generator per trial. Draw order is part of the determinism contract:
// the four rotors in order every step, then one ground draw per touchdown.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}

  double gaussian(double stddev) {
    if (stddev == 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, stddev)(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

/// Adds N(0, (sigma * f_hover)^2) to each rotor force, then clamps to the
/// rotor range. With sigma == 0 the input is returned untouched and no
/// draws are consumed.
inline std::array<double, 4> perturb_rotor_forces(const std::array<double, 4>& forces,
                                                  const NoiseConfig& cfg, const RobotParams& p,
                                                  NoiseSource& rng) {
  if (cfg.sigma == 0.0) return forces;
  const double stddev = cfg.sigma * p.hover_rotor_force();
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = std::clamp(forces[i] + rng.gaussian(stddev), 0.0, p.rotor_max);
  }
  return out;
}

/// Tilt angle G (rad) for one contact; its std is ground_scale * sigma degrees.
inline double draw_ground_angle(const NoiseConfig& cfg, NoiseSource& rng) {
  return rng.gaussian(cfg.ground_scale * cfg.sigma * std::numbers::pi / 180.0);
}

inline Vec3 perturb_spring_direction(const Rot3& R, const NoiseConfig& cfg, NoiseSource& rng) {
  return spring_direction(R, draw_ground_angle(cfg, rng));
}

}  // namespace pogosim

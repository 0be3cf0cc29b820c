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

// Energy metric and bounce statistics over a finished trial.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "pogosim/control.hpp"

namespace pogosim {

struct TrialMetrics {
  double energy = 0.0;              // N s
  int bounce_count = 0;
  double mean_recovery_time = 0.0;  // s, 0 when no bounce recovered
  int saturation_events = 0;        // steps where the mixer clamped
  bool settled = false;             // ended ready to drop (inside sphere, slow)
};

/// Left-Riemann integral of the summed rotor forces over uniformly spaced
/// samples: the last sample closes the final interval and is not weighted.
inline double energy(std::span<const std::array<double, 4>> rotor_forces, double dt) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < rotor_forces.size(); ++i) {
    const auto& f = rotor_forces[i];
    total += f[0] + f[1] + f[2] + f[3];
  }
  return total * dt;
}

/// Number of entries into Compression.
inline int count_bounces(std::span<const BhcPhase> phases) {
  int n = 0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i] == BhcPhase::Compression && (i == 0 || phases[i - 1] != BhcPhase::Compression)) ++n;
  }
  return n;
}

struct RecoveryTimes {
  std::vector<double> times;  // s, one per recovered bounce
  int unmatched = 0;          // rebounds with no sphere re-entry before the end
};

/// Time from each Rebound entry to the first later sample that satisfies
/// the drop condition (inside the sphere; angular rate below threshold when
/// `rates` is non-empty).
inline RecoveryTimes recovery_times(std::span<const BhcPhase> phases, std::span<const Vec3> positions,
                                    std::span<const double> rates, const BhcConfig& cfg, double dt) {
  RecoveryTimes out;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i] != BhcPhase::Rebound || (i > 0 && phases[i - 1] == BhcPhase::Rebound)) continue;
    bool found = false;
    for (std::size_t j = i + 1; j < phases.size() && j < positions.size(); ++j) {
      const bool inside = (cfg.target - positions[j]).norm() <= cfg.sphere_radius;
      const bool slow = rates.empty() || rates[j] < cfg.rate_threshold;
      if (inside && slow) {
        out.times.push_back(static_cast<double>(j - i) * dt);
        found = true;
        break;
      }
    }
    if (!found) ++out.unmatched;
  }
  return out;
}

}  // namespace pogosim

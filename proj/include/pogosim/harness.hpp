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

// Closed-loop trials and batch sweeps comparing bouncing with hovering.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pogosim/control.hpp"
#include "pogosim/dynamics.hpp"
#include "pogosim/errors.hpp"
#include "pogosim/metrics.hpp"
#include "pogosim/noise.hpp"

namespace pogosim {

enum class FlightMode { Hover, Bounce };

inline std::string_view to_string(FlightMode m) { return m == FlightMode::Hover ? "hover" : "bounce"; }

struct TrialConfig {
  FlightMode mode = FlightMode::Bounce;
  RobotParams params;
  ControlGains gains;
  BhcConfig bhc;
  NoiseConfig noise;
  double duration = 18.0;  // t_f, s
  double dt = 1e-3;        // s
  bool record_trajectory = false;

  std::int64_t step_count() const { return std::llround(duration / dt); }
};

inline void validate(const TrialConfig& c) {
  validate(c.params);
  validate(c.gains);
  validate(c.bhc, c.params);
  if (!(c.noise.sigma >= 0.0)) throw ConfigError("noise: sigma must be >= 0");
  if (!(c.noise.ground_scale >= 0.0)) throw ConfigError("noise: ground_scale must be >= 0");
  if (!(c.duration > 0.0)) throw ConfigError("trial: duration must be > 0");
  if (!(c.dt > 0.0)) throw ConfigError("trial: dt must be > 0");
  const double steps = c.duration / c.dt;
  if (std::abs(steps - std::round(steps)) > 1e-6) {
    throw ConfigError("trial: duration must be an integer multiple of dt");
  }
  if (!(c.bhc.target.z() > c.params.rest_length)) {
    throw ConfigError("bhc: target height must exceed the pogo rest length");
  }
}

struct TrajectoryRow {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  BhcPhase phase = BhcPhase::PositionHold;
  double spring_length = 0.0;
  double spring_force = 0.0;
  std::array<double, 4> rotor_forces{};
  double thrust = 0.0;           // commanded collective, N
  Vec3 torque = Vec3::Zero();    // commanded body torque, N m
};

struct TrialResult {
  TrialMetrics metrics;
  std::vector<double> recovery_times;
  int unmatched_rebounds = 0;
  std::vector<BhcPhase> phases;        // one per sample, t = 0 .. t_f
  std::vector<TrajectoryRow> trajectory;  // filled when record_trajectory
  RigidState final_state;
  PogoState final_pogo;
};

/// Runs one closed-loop trial starting at rest, upright, at the target.
/// Pipeline per step: phase machine, controller, mixer, rotor noise,
/// dynamics. Throws SimulationFault carrying the step index on divergence.
inline TrialResult run_trial(const TrialConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const RobotParams& p = cfg.params;
  const std::int64_t n = cfg.step_count();
  const auto samples = static_cast<std::size_t>(n + 1);

  RigidState state;
  state.r = cfg.bhc.target;
  PogoState pogo;
  NoiseSource rng(seed);
  BounceHoverController bhc(cfg.bhc, cfg.mode == FlightMode::Bounce);

  TrialResult out;
  out.phases.reserve(samples);
  std::vector<std::array<double, 4>> forces;
  forces.reserve(samples);
  std::vector<Vec3> positions;
  positions.reserve(samples);
  std::vector<double> rates;
  rates.reserve(samples);
  if (cfg.record_trajectory) out.trajectory.reserve(samples);

  for (std::int64_t i = 0;; ++i) {
    try {
      const BhcDecision decision = bhc.update(state, pogo, cfg.dt);
      const Wrench wanted = control_for(decision.mode, state, cfg.gains, cfg.bhc, p);
      bool saturated = false;
      const auto mixed = mix(wanted.thrust, wanted.torque, p, &saturated);
      const auto actual = perturb_rotor_forces(mixed, cfg.noise, p, rng);

      out.phases.push_back(decision.phase);
      forces.push_back(actual);
      positions.push_back(state.r);
      rates.push_back(state.w.norm());
      if (cfg.record_trajectory) {
        TrajectoryRow row;
        row.t = static_cast<double>(i) * cfg.dt;
        row.position = state.r;
        row.phase = decision.phase;
        row.spring_length = p.rest_length + pogo.deformation;
        row.spring_force =
            pogo.in_contact ? spring_force(pogo.deformation, pogo.deformation_rate, p) : 0.0;
        row.rotor_forces = actual;
        row.thrust = wanted.thrust;
        row.torque = wanted.torque;
        out.trajectory.push_back(row);
      }
      if (i == n) break;
      if (saturated) ++out.metrics.saturation_events;

      const Wrench realized = allocate(actual, p);
      const ControlCommand cmd{realized.thrust, realized.torque, actual};
      StepOutput next = step(state, pogo, cmd, p, cfg.dt);
      if (next.touchdown) next.pogo.ground_angle = draw_ground_angle(cfg.noise, rng);
      state = next.state;
      pogo = next.pogo;
    } catch (const SimulationFault& e) {
      throw SimulationFault(e.what(), i);
    }
  }

  out.metrics.energy = energy(forces, cfg.dt);
  out.metrics.bounce_count = count_bounces(out.phases);
  RecoveryTimes rec = recovery_times(out.phases, positions, rates, cfg.bhc, cfg.dt);
  out.recovery_times = std::move(rec.times);
  out.unmatched_rebounds = rec.unmatched;
  if (!out.recovery_times.empty()) {
    out.metrics.mean_recovery_time =
        std::accumulate(out.recovery_times.begin(), out.recovery_times.end(), 0.0) /
        static_cast<double>(out.recovery_times.size());
  }
  out.metrics.settled = ready_to_drop(state, cfg.bhc);
  out.final_state = state;
  out.final_pogo = pogo;
  return out;
}

/// Run-length compression of a phase series.
inline std::vector<BhcPhase> phase_sequence(std::span<const BhcPhase> phases) {
  std::vector<BhcPhase> seq;
  for (BhcPhase ph : phases) {
    if (seq.empty() || seq.back() != ph) seq.push_back(ph);
  }
  return seq;
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1); zero for fewer than two values.
inline double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct EnergySummary {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> energies;
  double mean_bounces = 0.0;
  double mean_recovery = 0.0;  // over trials that recovered at least once

  static EnergySummary from(std::span<const TrialMetrics> trials) {
    EnergySummary s;
    std::vector<double> bounces;
    std::vector<double> recovery;
    for (const TrialMetrics& m : trials) {
      s.energies.push_back(m.energy);
      bounces.push_back(m.bounce_count);
      if (m.mean_recovery_time > 0.0) recovery.push_back(m.mean_recovery_time);
    }
    s.mean = pogosim::mean(s.energies);
    s.std = sample_std(s.energies);
    s.mean_bounces = pogosim::mean(bounces);
    s.mean_recovery = pogosim::mean(recovery);
    return s;
  }
};

/// 1 - bounce/hover. Throws SimulationFault when the hover mean is zero.
inline double savings_fraction(double hover_mean, double bounce_mean) {
  if (hover_mean == 0.0) throw SimulationFault("hover mean energy is zero; savings undefined");
  return 1.0 - bounce_mean / hover_mean;
}

struct ModeComparison {
  EnergySummary hover;
  EnergySummary bounce;
  double savings = 0.0;
};

namespace detail {

// Runs `count` independent jobs on up to `jobs` threads. Each job writes only
// its own slot, so results do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

/// n hover and n bounce trials with seeds seed0 .. seed0 + n - 1 in each
/// mode. The first trial fault is rethrown with its trial index.
inline ModeComparison compare_modes(const TrialConfig& cfg, int n, std::uint64_t seed0,
                                    unsigned jobs = default_jobs()) {
  if (n < 1) throw ConfigError("compare: trial count must be >= 1");
  validate(cfg);
  const auto count = static_cast<std::size_t>(n);
  std::vector<TrialMetrics> metrics(2 * count);
  std::vector<std::exception_ptr> errors(2 * count);
  detail::parallel_for(2 * count, jobs, [&](std::size_t k) {
    TrialConfig c = cfg;
    c.mode = k < count ? FlightMode::Hover : FlightMode::Bounce;
    c.record_trajectory = false;
    try {
      metrics[k] = run_trial(c, seed0 + k % count).metrics;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const SimulationFault& e) {
      throw SimulationFault(std::string(to_string(k < count ? FlightMode::Hover : FlightMode::Bounce)) +
                            " trial " + std::to_string(k % count) + ": " + e.what());
    }
  }
  ModeComparison out;
  out.hover = EnergySummary::from(std::span(metrics).first(count));
  out.bounce = EnergySummary::from(std::span(metrics).subspan(count));
  out.savings = savings_fraction(out.hover.mean, out.bounce.mean);
  return out;
}

enum class SweepFactor { NoiseLevel, SpringConstant, DampingFactor, DesiredHeight };

inline constexpr std::array<std::string_view, 4> kFactorNames{
    "noise_level", "spring_constant", "damping_factor", "desired_height"};

inline std::string_view to_string(SweepFactor f) { return kFactorNames[static_cast<std::size_t>(f)]; }

inline std::optional<SweepFactor> parse_factor(std::string_view name) {
  for (std::size_t i = 0; i < kFactorNames.size(); ++i) {
    if (kFactorNames[i] == name) return static_cast<SweepFactor>(i);
  }
  return std::nullopt;
}

inline std::vector<double> default_grid(SweepFactor f) {
  switch (f) {
    case SweepFactor::NoiseLevel: return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    case SweepFactor::SpringConstant:
      return {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000, 1100};
    case SweepFactor::DampingFactor: return {0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
    case SweepFactor::DesiredHeight: return {0.5, 0.8, 1.0, 1.5, 2.0, 2.5, 3.0};
  }
  return {};
}

/// Copy of `base` with one factor overridden. Changing the spring constant
/// keeps the hard-stop to spring stiffness ratio of the base config.
inline TrialConfig apply_factor(const TrialConfig& base, SweepFactor f, double value) {
  TrialConfig c = base;
  switch (f) {
    case SweepFactor::NoiseLevel: c.noise.sigma = value; break;
    case SweepFactor::SpringConstant:
      c.params.stop_k = base.params.stop_k / base.params.spring_k * value;
      c.params.spring_k = value;
      break;
    case SweepFactor::DampingFactor: c.params.damping_b = value; break;
    case SweepFactor::DesiredHeight: c.bhc.target.z() = value; break;
  }
  return c;
}

struct SweepSpec {
  SweepFactor factor = SweepFactor::NoiseLevel;
  std::vector<double> values = default_grid(SweepFactor::NoiseLevel);
  int trials_per_value = 20;
  TrialConfig base;
};

inline void validate(const SweepSpec& s) {
  if (s.values.empty()) throw ConfigError("sweep: values must be non-empty");
  for (std::size_t i = 1; i < s.values.size(); ++i) {
    if (!(s.values[i] > s.values[i - 1])) throw ConfigError("sweep: values must be strictly increasing");
  }
  if (s.trials_per_value < 1) throw ConfigError("sweep: trials_per_value must be >= 1");
  validate(s.base);
}

struct SweepTrial {
  std::size_t value_index = 0;
  FlightMode mode = FlightMode::Hover;
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  TrialMetrics metrics;
};

struct SweepPoint {
  double value = 0.0;
  EnergySummary hover;
  EnergySummary bounce;
  std::vector<std::string> faults;  // empty when every trial completed
};

struct SweepResult {
  SweepFactor factor = SweepFactor::NoiseLevel;
  std::vector<SweepPoint> points;
  std::vector<SweepTrial> trials;  // ordered by (value, mode, trial)

  bool has_faults() const {
    return std::any_of(points.begin(), points.end(), [](const SweepPoint& p) { return !p.faults.empty(); });
  }
};

/// Trial seed. Every value and both modes reuse seed0 + trial, so hover and
/// bounce arms at different factor values see the same noise streams.
inline std::uint64_t sweep_seed(std::uint64_t seed0, std::size_t /*value_index*/, FlightMode /*mode*/,
                                int trial) {
  return seed0 + static_cast<std::uint64_t>(trial);
}

inline SweepResult sweep(const SweepSpec& spec, std::uint64_t seed0, unsigned jobs = default_jobs()) {
  validate(spec);
  const std::size_t per_value = 2 * static_cast<std::size_t>(spec.trials_per_value);
  const std::size_t total = spec.values.size() * per_value;

  SweepResult out;
  out.factor = spec.factor;
  out.trials.resize(total);
  std::vector<std::string> errors(total);
  detail::parallel_for(total, jobs, [&](std::size_t k) {
    SweepTrial& t = out.trials[k];
    t.value_index = k / per_value;
    const std::size_t within = k % per_value;
    t.mode = within < per_value / 2 ? FlightMode::Hover : FlightMode::Bounce;
    t.trial = static_cast<int>(within % (per_value / 2));
    t.seed = sweep_seed(seed0, t.value_index, t.mode, t.trial);
    TrialConfig c = apply_factor(spec.base, spec.factor, spec.values[t.value_index]);
    c.mode = t.mode;
    c.record_trajectory = false;
    try {
      t.metrics = run_trial(c, t.seed).metrics;
      t.ok = true;
    } catch (const std::exception& e) {
      errors[k] = std::string(to_string(t.mode)) + " trial " + std::to_string(t.trial) + ": " + e.what();
    }
  });

  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    SweepPoint pt;
    pt.value = spec.values[v];
    std::vector<TrialMetrics> hover;
    std::vector<TrialMetrics> bounce;
    for (std::size_t k = v * per_value; k < (v + 1) * per_value; ++k) {
      const SweepTrial& t = out.trials[k];
      if (!t.ok) {
        pt.faults.push_back(errors[k]);
        continue;
      }
      (t.mode == FlightMode::Hover ? hover : bounce).push_back(t.metrics);
    }
    pt.hover = EnergySummary::from(hover);
    pt.bounce = EnergySummary::from(bounce);
    out.points.push_back(std::move(pt));
  }
  return out;
}

}  // namespace pogosim

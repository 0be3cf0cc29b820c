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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "pogosim/harness.hpp"
#include "pogosim/io.hpp"

namespace {

using namespace pogosim;
namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 1;
constexpr int kTrials = 20;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s %2d  %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<double> ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

SweepResult run_sweep(SweepFactor f, SweepSpec* spec_out = nullptr) {
  SweepSpec spec;
  spec.factor = f;
  spec.values = default_grid(f);
  spec.trials_per_value = kTrials;
  if (spec_out) *spec_out = spec;
  return sweep(spec, kSeed);
}

std::string series(const SweepResult& r) {
  std::string s;
  for (const SweepPoint& p : r.points) s += fmt(" %g:%.3f/%.3f", p.value, p.hover.mean, p.bounce.mean);
  return s;
}

bool faulted(const SweepResult& r, int id) {
  if (!r.has_faults()) return false;
  report(id, false, "sweep had faulted trials: " + r.points.front().faults.front());
  return true;
}

void reference_savings() {
  const auto t0 = std::chrono::steady_clock::now();
  const ModeComparison c = compare_modes(TrialConfig{}, kTrials, kSeed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = c.bounce.mean < c.hover.mean && c.savings >= 0.04 && c.savings <= 0.20 && secs < 30.0;
  report(1, ok,
         fmt("reference savings %.2f %% (hover %.4f, bounce %.4f N s)", 100 * c.savings, c.hover.mean,
             c.bounce.mean) +
             fmt(", %.1f s wall", secs));
}

void noise_trend() {
  const SweepResult r = run_sweep(SweepFactor::NoiseLevel);
  if (faulted(r, 2)) return;
  std::vector<double> sigma, bounce;
  for (const SweepPoint& p : r.points) {
    sigma.push_back(p.value);
    bounce.push_back(p.bounce.mean);
  }
  const double rho = spearman(sigma, bounce);
  const double gap0 = r.points.front().hover.mean - r.points.front().bounce.mean;
  const double gap1 = r.points.back().hover.mean - r.points.back().bounce.mean;
  report(2, rho >= 0.9 && gap1 < gap0,
         fmt("noise: spearman %.3f, gap %.4f at sigma=0 -> %.4f at sigma=0.6;", rho, gap0, gap1) + series(r));
}

void spring_trend() {
  const SweepResult r = run_sweep(SweepFactor::SpringConstant);
  if (faulted(r, 3)) return;
  const auto at = [&](double k) {
    for (const SweepPoint& p : r.points)
      if (p.value == k) return p.bounce.mean;
    return std::numeric_limits<double>::quiet_NaN();
  };
  // Hover arm must not see the spring at all: energies bit-identical per seed.
  bool identical = true;
  for (const SweepTrial& t : r.trials) {
    if (t.mode != FlightMode::Hover) continue;
    const SweepTrial& ref = r.trials[static_cast<std::size_t>(t.trial)];
    identical = identical && t.metrics.energy == ref.metrics.energy;
  }
  report(3, at(100) > at(400) && identical,
         fmt("spring: bounce %.4f at k=100 vs %.4f at k=400, hover identical across k: ", at(100), at(400)) +
             (identical ? "yes;" : "no;") + series(r));
}

void damping_trend() {
  const SweepResult r = run_sweep(SweepFactor::DampingFactor);
  if (faulted(r, 4)) return;
  const auto point = [&](double b) -> const SweepPoint& {
    return *std::find_if(r.points.begin(), r.points.end(), [&](const SweepPoint& p) { return p.value == b; });
  };
  const SweepPoint& lo = point(0.01);
  const SweepPoint& hi = point(1.0);
  report(4, lo.bounce.mean >= lo.hover.mean && hi.bounce.mean < hi.hover.mean,
         fmt("damping: b=0.01 bounce %.4f vs hover %.4f; ", lo.bounce.mean, lo.hover.mean) +
             fmt("b=1 bounce %.4f vs hover %.4f;", hi.bounce.mean, hi.hover.mean) + series(r));
}

void height_trend() {
  SweepSpec spec;
  const SweepResult r = run_sweep(SweepFactor::DesiredHeight, &spec);
  if (faulted(r, 5)) return;
  const double first = r.points.front().bounce.mean;
  const double last = r.points.back().bounce.mean;
  bool interior = false;
  for (std::size_t i = 1; i + 1 < r.points.size(); ++i) {
    interior = interior || (r.points[i].bounce.mean < first && r.points[i].bounce.mean < last);
  }
  if (interior) {
    report(5, true, "height: interior minimum present;" + series(r));
    return;
  }
  std::ostringstream csv;
  write_sweep_csv(csv, spec, r);
  const std::string path = "acceptance_height_sweep.csv";
  write_file(path, csv.str());
  std::fputs(csv.str().c_str(), stdout);
  report(5, false, "SOFT height: no interior minimum of bounce energy; full sweep written to " +
                       fs::absolute(path).string() + ";" + series(r));
}

void conservation() {
  RobotParams p;
  p.damping_b = 0.0;
  RigidState s;
  s.r = Vec3(0, 0, 0.3);
  PogoState pogo;
  const double e0 = mechanical_energy(s, pogo, p);
  double worst = 0.0;
  bool touched = false;
  bool lifted = false;
  for (int i = 0; i < 100000 && !lifted; ++i) {
    const StepOutput out = step(s, pogo, ControlCommand{}, p, 1e-4);
    s = out.state;
    pogo = out.pogo;
    touched = touched || out.touchdown;
    lifted = touched && out.liftoff;
    worst = std::max(worst, std::abs(mechanical_energy(s, pogo, p) - e0) / e0);
  }
  report(6, lifted && worst < 0.01, fmt("conservation: max relative drift %.3e over one bounce", worst));
}

void ballistic() {
  const RobotParams p;
  RigidState s;
  s.r = Vec3(0, 0, 2.0);
  double worst = 0.0;
  for (int i = 1; i <= 500; ++i) {
    s = step(s, PogoState{}, ControlCommand{}, p, 1e-3).state;
    const double t = i * 1e-3;
    worst = std::max(worst, std::abs(s.r.z() - (2.0 - 0.5 * p.gravity * t * t)));
  }
  report(7, worst < 1e-3, fmt("ballistic: max |z error| %.3e m over 0.5 s", worst));
}

void attitude() {
  TrialConfig c;
  const TrialResult r = run_trial(c, kSeed);
  const double err = orthonormality_error(r.final_state.R);
  const auto steps = r.phases.size() - 1;
  report(8, err < 1e-9 && steps == 18000,
         fmt("attitude: ||R^T R - I||_F = %.3e after %.0f noisy bounce steps", err, static_cast<double>(steps)));
}

Mat3 cloud_inertia(const std::vector<Vec3>& pts, const std::vector<double>& m, const Vec3& pivot) {
  Mat3 out = Mat3::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 q = pts[i] - pivot;
    out += m[i] * (q.squaredNorm() * Mat3::Identity() - q * q.transpose());
  }
  return out;
}

void parallel_axis_oracle() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coord(-0.05, 0.05);
  std::uniform_real_distribution<double> mass(0.001, 0.01);
  std::uniform_real_distribution<double> offset(0.0, 0.1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + trial % 30;
    std::vector<Vec3> pts;
    std::vector<double> ms;
    Vec3 com = Vec3::Zero();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      pts.emplace_back(coord(rng), coord(rng), coord(rng));
      ms.push_back(mass(rng));
      com += ms.back() * pts.back();
      total += ms.back();
    }
    com /= total;
    for (Vec3& q : pts) q -= com;
    const double d = offset(rng);
    const Mat3 direct = cloud_inertia(pts, ms, Vec3(0, 0, -d));
    const Mat3 shifted = parallel_axis(cloud_inertia(pts, ms, Vec3::Zero()), total, d);
    worst = std::max(worst, (shifted - direct).norm() / direct.norm());
  }
  report(9, worst < 1e-9, fmt("parallel axis: worst relative error %.3e over 100 clouds", worst));
}

void mixer_round_trip() {
  const RobotParams p;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> thrust(0.0, 4.0 * p.rotor_max);
  std::uniform_real_distribution<double> tau(-2e-3, 2e-3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double fq = thrust(rng);
    const Vec3 t(tau(rng), tau(rng), 0.1 * tau(rng));
    const Wrench back = allocate(unclamped_mix(fq, t, p), p);
    worst = std::max({worst, std::abs(back.thrust - fq), (back.torque - t).cwiseAbs().maxCoeff()});
  }
  report(10, worst < 1e-12, fmt("mixer: worst round-trip error %.3e over 1000 samples", worst));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void determinism() {
  const std::string base = std::string("\"") + POGOSIM_CLI +
                           "\" sweep --factor noise_level --values 0,0.3 --trials 2 --seed 17 --out ";
  const std::string a = "acceptance_det_a.csv";
  const std::string b = "acceptance_det_b.csv";
  const std::string quiet = " >/dev/null";
  const int sa = std::system((base + a + quiet).c_str());
  const int sb = std::system((base + b + quiet).c_str());
  const bool ran = WIFEXITED(sa) && WEXITSTATUS(sa) == 0 && WIFEXITED(sb) && WEXITSTATUS(sb) == 0;
  const std::string ca = slurp(a);
  const bool same = ran && !ca.empty() && ca == slurp(b);
  report(11, same, std::string("determinism: two sweep invocations ") + (same ? "byte-identical" : "differ") +
                       fmt(" (%.0f bytes)", static_cast<double>(ca.size())));
  fs::remove(a);
  fs::remove(b);
}

// Complete cycles followed by at most one cut-off cycle at t_f.
const std::regex kGrammar(
    "PositionHold( Descend Compression Rebound Ascend)*( Descend( Compression( Rebound)?)?)?");

void phase_grammar() {
  std::vector<TrialConfig> configs;
  TrialConfig base;
  base.noise.sigma = 0.0;
  configs.push_back(base);
  for (SweepFactor f : {SweepFactor::SpringConstant, SweepFactor::DampingFactor, SweepFactor::DesiredHeight}) {
    for (double v : default_grid(f)) configs.push_back(apply_factor(base, f, v));
  }
  int bad = 0;
  int cycles = 0;
  std::string example;
  for (const TrialConfig& c : configs) {
    const TrialResult r = run_trial(c, kSeed);
    std::string text;
    for (BhcPhase ph : phase_sequence(r.phases)) text += (text.empty() ? "" : " ") + std::string(to_string(ph));
    cycles += r.metrics.bounce_count;
    if (!std::regex_match(text, kGrammar) || r.metrics.bounce_count == 0) {
      ++bad;
      if (example.empty()) example = text.substr(0, 120);
    }
  }
  report(12, bad == 0,
         fmt("phase grammar: %.0f of %.0f noiseless bounce trials conform, %.0f bounces total",
             static_cast<double>(configs.size() - bad), static_cast<double>(configs.size()),
             static_cast<double>(cycles)) +
             (example.empty() ? "" : "; first mismatch: " + example));
}

}  // namespace

int main() {
  try {
    reference_savings();
    noise_trend();
    spring_trend();
    damping_trend();
    height_trend();
    conservation();
    ballistic();
    attitude();
    parallel_axis_oracle();
    mixer_round_trip();
    determinism();
    phase_grammar();
  } catch (const std::exception& e) {
    std::printf("FAIL    aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

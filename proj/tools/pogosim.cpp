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

// pogosim: run single trials, factor sweeps and hover/bounce comparisons.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pogosim/config.hpp"
#include "pogosim/io.hpp"
#include "pogosim/svg.hpp"

namespace {

using namespace pogosim;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFault = 2;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
};

Config load(const Common& c) { return c.config_path.empty() ? Config{} : load_config(c.config_path); }

// --seed, then POGOSIM_SEED, then noise.seed from the config.
std::uint64_t resolve_seed(const Common& c, const Config& cfg) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("POGOSIM_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("POGOSIM_SEED must be a non-negative integer");
  }
  return cfg.trial.noise.seed;
}

unsigned resolve_jobs(const Common& c) { return c.jobs == 0 ? default_jobs() : c.jobs; }

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used == 0 || used != item.size()) throw ConfigError("--values: cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--values: empty list");
  return out;
}

int run_simulate(const Common& common, const std::string& mode, const std::string& out_path,
                 const std::string& plot_path) {
  Config cfg = load(common);
  if (mode == "hover") cfg.trial.mode = FlightMode::Hover;
  else if (mode == "bounce") cfg.trial.mode = FlightMode::Bounce;
  cfg.trial.record_trajectory = true;
  const std::uint64_t seed = resolve_seed(common, cfg);
  const TrialResult r = run_trial(cfg.trial, seed);

  std::ostringstream csv;
  write_trajectory_csv(csv, r.trajectory);
  write_file(out_path, csv.str());
  if (!plot_path.empty()) write_file(plot_path, trajectory_svg(r.trajectory));
  std::printf("%s trial, seed %llu: energy %.6f N s, %d bounces\n", std::string(to_string(cfg.trial.mode)).c_str(),
              static_cast<unsigned long long>(seed), r.metrics.energy, r.metrics.bounce_count);
  return kExitOk;
}

int run_sweep(const Common& common, const std::string& factor, const std::string& values,
              std::optional<int> trials, const std::string& out_path, const std::string& plot_path) {
  Config cfg = load(common);
  if (!factor.empty()) {
    const auto f = parse_factor(factor);
    if (!f) throw ConfigError("--factor: unknown factor '" + factor + "'");
    if (*f != cfg.factor) cfg.values.clear();
    cfg.factor = *f;
  }
  if (!values.empty()) cfg.values = parse_values(values);
  if (trials) cfg.trials_per_value = *trials;
  const SweepSpec spec = cfg.sweep_spec();
  validate(spec);
  const std::uint64_t seed = resolve_seed(common, cfg);
  const SweepResult result = sweep(spec, seed, resolve_jobs(common));

  std::ostringstream csv;
  write_sweep_csv(csv, spec, result);
  write_file(out_path, csv.str());
  if (!plot_path.empty()) write_file(plot_path, sweep_svg(spec, result));

  for (const SweepPoint& p : result.points) {
    std::printf("%-16s %-8s hover %.4f +- %.4f  bounce %.4f +- %.4f\n", std::string(to_string(spec.factor)).c_str(),
                fmt9(p.value).c_str(), p.hover.mean, p.hover.std, p.bounce.mean, p.bounce.std);
    for (const std::string& f : p.faults) std::fprintf(stderr, "fault at %s: %s\n", fmt9(p.value).c_str(), f.c_str());
  }
  return result.has_faults() ? kExitFault : kExitOk;
}

int run_compare(const Common& common, int trials, bool json) {
  Config cfg = load(common);
  const std::uint64_t seed = resolve_seed(common, cfg);
  const ModeComparison c = compare_modes(cfg.trial, trials, seed, resolve_jobs(common));
  if (json) {
    auto side = [](const EnergySummary& s) {
      return Json{{"mean", s.mean},
                  {"std", s.std},
                  {"mean_bounces", s.mean_bounces},
                  {"mean_recovery_s", s.mean_recovery},
                  {"energies", s.energies}};
    };
    const Json doc{{"trials", trials}, {"seed", seed}, {"hover", side(c.hover)}, {"bounce", side(c.bounce)},
                   {"savings", c.savings}};
    std::cout << doc.dump(2) << '\n';
    return kExitOk;
  }
  std::printf("%-7s %12s %10s %10s %12s\n", "mode", "energy_Ns", "std_Ns", "bounces", "recovery_s");
  for (const auto& [name, s] : {std::pair{"hover", &c.hover}, std::pair{"bounce", &c.bounce}}) {
    std::printf("%-7s %12.4f %10.4f %10.2f %12.3f\n", name, s->mean, s->std, s->mean_bounces, s->mean_recovery);
  }
  std::printf("savings %.2f %% over %d trials per mode (seed %llu)\n", 100.0 * c.savings, trials,
              static_cast<unsigned long long>(seed));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PogoDrone bounce/hover simulator"};
  app.require_subcommand(0, 1);
  bool print_default = false;
  app.add_flag("--print-default-config", print_default, "Print the full default config as JSON and exit");

  auto add_common = [](CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "JSON config file (defaults apply to missing fields)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Base seed (fallback: POGOSIM_SEED, then noise.seed)");
    sub->add_option("--jobs", c.jobs, "Concurrent trials (0: one per hardware thread)");
  };

  Common sim_common;
  std::string sim_mode, sim_out, sim_plot;
  CLI::App* sim = app.add_subcommand("simulate", "Run one trial and write its trajectory CSV");
  add_common(sim, sim_common);
  sim->add_option("--mode", sim_mode, "hover or bounce (default: trial.mode)")
      ->check(CLI::IsMember({"hover", "bounce"}));
  sim->add_option("--out", sim_out, "Trajectory CSV path")->required();
  sim->add_option("--plot", sim_plot, "Optional SVG path");

  Common sw_common;
  std::string sw_factor, sw_values, sw_out, sw_plot;
  std::optional<int> sw_trials;
  CLI::App* sw = app.add_subcommand("sweep", "Sweep one factor and write per-trial CSV");
  add_common(sw, sw_common);
  sw->add_option("--factor", sw_factor, "noise_level, spring_constant, damping_factor or desired_height");
  sw->add_option("--values", sw_values, "Comma-separated increasing values (default grid otherwise)");
  sw->add_option("--trials", sw_trials, "Trials per value and mode (default: sweep.trials_per_value)");
  sw->add_option("--out", sw_out, "Sweep CSV path")->required();
  sw->add_option("--plot", sw_plot, "Optional SVG path");

  Common cmp_common;
  int cmp_trials = 20;
  bool cmp_json = false;
  CLI::App* cmp = app.add_subcommand("compare", "Compare hover and bounce energy");
  add_common(cmp, cmp_common);
  cmp->add_option("--trials", cmp_trials, "Trials per mode")->check(CLI::PositiveNumber);
  cmp->add_flag("--json", cmp_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (print_default) {
      std::cout << default_config_text();
      return kExitOk;
    }
    if (sim->parsed()) return run_simulate(sim_common, sim_mode, sim_out, sim_plot);
    if (sw->parsed()) return run_sweep(sw_common, sw_factor, sw_values, sw_trials, sw_out, sw_plot);
    if (cmp->parsed()) return run_compare(cmp_common, cmp_trials, cmp_json);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SimulationFault& e) {
    std::cerr << "numerical fault: " << e.what() << '\n';
    return kExitFault;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

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

#pragma once

#include <cstdio>
#include <array>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pogosim/harness.hpp"

namespace pogosim {

inline constexpr std::string_view kTrajectoryHeader =
    "t,x,y,z,phase,spring_len,spring_force,f1,f2,f3,f4,fq,tau_x,tau_y,tau_z";
inline constexpr std::string_view kSweepHeader =
    "factor,value,mode,trial,seed,energy,bounces,mean_recovery_s,saturations";

/// Nine significant digits, C locale.
inline std::string fmt9(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows) {
  out << kTrajectoryHeader << '\n';
  std::string line;
  for (const TrajectoryRow& r : rows) {
    line.clear();
    line += fmt9(r.t);
    for (int i = 0; i < 3; ++i) line += ',' + fmt9(r.position(i));
    line += ',';
    line += to_string(r.phase);
    line += ',' + fmt9(r.spring_length);
    line += ',' + fmt9(r.spring_force);
    for (double f : r.rotor_forces) line += ',' + fmt9(f);
    line += ',' + fmt9(r.thrust);
    for (int i = 0; i < 3; ++i) line += ',' + fmt9(r.torque(i));
    out << line << '\n';
  }
}

/// One row per (value, mode, trial). Faulted trials keep their row with the
/// result columns left empty.
inline void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const SweepResult& result) {
  out << kSweepHeader << '\n';
  for (const SweepTrial& t : result.trials) {
    out << to_string(result.factor) << ',' << fmt9(spec.values[t.value_index]) << ',' << to_string(t.mode)
        << ',' << t.trial << ',' << t.seed << ',';
    if (t.ok) {
      out << fmt9(t.metrics.energy) << ',' << t.metrics.bounce_count << ','
          << fmt9(t.metrics.mean_recovery_time) << ',' << t.metrics.saturation_events;
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

/// Writes via a sibling temp file so a failed run leaves no torn output.
inline void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
    if (!f.flush()) throw std::runtime_error("cannot write " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot write " + path);
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::out_of_range("no column " + std::string(name));
  }
};

// Plain comma splitting; our writers never quote.
inline CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  auto split = [](std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    if (first) {
      t.header = split(line);
      first = false;
    } else {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

/// Energy recomputed from the f1..f4 columns of a trajectory CSV.
inline double trajectory_csv_energy(const CsvTable& t, double dt) {
  const std::size_t c1 = t.column("f1");
  std::vector<std::array<double, 4>> forces;
  forces.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    forces.push_back({std::stod(row[c1]), std::stod(row[c1 + 1]), std::stod(row[c1 + 2]), std::stod(row[c1 + 3])});
  }
  return energy(forces, dt);
}

}  // namespace pogosim

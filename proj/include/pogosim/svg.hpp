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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pogosim/harness.hpp"

namespace pogosim {

namespace svg_detail {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void include(double x) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  // Pads a degenerate or tight range so lines never sit on the frame.
  Range padded() const {
    double span = hi - lo;
    if (!(span > 0.0)) span = std::max(1.0, std::abs(hi));
    return {lo - 0.05 * span, hi + 0.05 * span};
  }
};

inline Range range_of(std::span<const double> ys) {
  Range r{ys.empty() ? 0.0 : ys[0], ys.empty() ? 1.0 : ys[0]};
  for (double y : ys) r.include(y);
  return r;
}

// Maps data to a plot box at (x0, y0) of size (w, h).
struct Frame {
  double x0, y0, w, h;
  Range xr, yr;

  double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
  double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

inline void axes(std::string& out, const Frame& f, const std::string& ylabel, const std::string& xlabel) {
  out += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.w) + "\" height=\"" +
         num(f.h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
    const double y = f.py(yv);
    out += "<line x1=\"" + num(f.x0 - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.x0) + "\" y2=\"" + num(y) +
           "\" stroke=\"#444\"/>\n";
    out += "<text x=\"" + num(f.x0 - 6) + "\" y=\"" + num(y + 4) +
           "\" font-size=\"10\" text-anchor=\"end\">" + label(yv) + "</text>\n";
  }
  for (int i = 0; i <= 6; ++i) {
    const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 6.0;
    const double x = f.px(xv);
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(f.y0 + f.h) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(f.y0 + f.h + 4) + "\" stroke=\"#444\"/>\n";
    out += "<text x=\"" + num(x) + "\" y=\"" + num(f.y0 + f.h + 15) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + label(xv) + "</text>\n";
  }
  out += "<text x=\"" + num(f.x0 - 48) + "\" y=\"" + num(f.y0 + f.h / 2) +
         "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 " + num(f.x0 - 48) + " " +
         num(f.y0 + f.h / 2) + ")\">" + ylabel + "</text>\n";
  if (!xlabel.empty()) {
    out += "<text x=\"" + num(f.x0 + f.w / 2) + "\" y=\"" + num(f.y0 + f.h + 30) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + xlabel + "</text>\n";
  }
}

inline void polyline(std::string& out, const Frame& f, std::span<const double> xs, std::span<const double> ys,
                     const char* color, const char* id) {
  out += "<polyline id=\"" + std::string(id) + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += num(f.px(xs[i])) + "," + num(f.py(ys[i]));
  }
  out += "\"/>\n";
}

inline const char* phase_color(BhcPhase p) {
  switch (p) {
    case BhcPhase::PositionHold: return "#ffffff";
    case BhcPhase::Descend: return "#dbe9f6";
    case BhcPhase::Compression: return "#f6d8d8";
    case BhcPhase::Rebound: return "#f8ecc9";
    case BhcPhase::Ascend: return "#dcf0dc";
  }
  return "#ffffff";
}

inline std::string open(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
         "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace svg_detail

/// Four stacked panels sharing the time axis: height with the BHC phase
/// shaded behind it, spring length, spring force and total rotor force.
inline std::string trajectory_svg(std::span<const TrajectoryRow> rows) {
  using namespace svg_detail;
  constexpr double kWidth = 760, kPanel = 130, kGap = 40, kLeft = 70, kTop = 20;
  std::string out = open(kWidth, kTop + 4 * (kPanel + kGap) + 10);
  if (rows.empty()) return out + "</svg>\n";

  // Decimate long runs; shading below still uses every sample.
  const std::size_t stride = std::max<std::size_t>(1, rows.size() / 3000);
  std::vector<double> t, z, len, fs, total;
  for (std::size_t i = 0; i < rows.size(); i += stride) {
    const TrajectoryRow& r = rows[i];
    t.push_back(r.t);
    z.push_back(r.position.z());
    len.push_back(r.spring_length);
    fs.push_back(r.spring_force);
    double sum = 0.0;
    for (double f : r.rotor_forces) sum += f;
    total.push_back(sum);
  }
  const Range tr{rows.front().t, std::max(rows.back().t, rows.front().t + 1e-9)};

  struct Series {
    const std::vector<double>* ys;
    const char* ylabel;
    const char* color;
    const char* id;
  };
  const Series panels[] = {{&z, "z (m)", "#1f4e9c", "z"},
                           {&len, "spring length (m)", "#2a7f3f", "spring_len"},
                           {&fs, "spring force (N)", "#b03030", "spring_force"},
                           {&total, "sum of rotor forces (N)", "#7a4fa0", "rotor_sum"}};
  for (int k = 0; k < 4; ++k) {
    const Frame f{kLeft, kTop + k * (kPanel + kGap), kWidth - kLeft - 20, kPanel, tr,
                  range_of(*panels[k].ys).padded()};
    if (k == 0) {
      std::size_t start = 0;
      for (std::size_t i = 1; i <= rows.size(); ++i) {
        if (i < rows.size() && rows[i].phase == rows[start].phase) continue;
        if (rows[start].phase != BhcPhase::PositionHold) {
          const double x1 = f.px(rows[start].t);
          const double x2 = f.px(rows[i - 1].t);
          out += "<rect class=\"phase\" x=\"" + num(x1) + "\" y=\"" + num(f.y0) + "\" width=\"" +
                 num(std::max(x2 - x1, 0.5)) + "\" height=\"" + num(f.h) + "\" fill=\"" +
                 phase_color(rows[start].phase) + "\"/>\n";
        }
        start = i;
      }
    }
    axes(out, f, panels[k].ylabel, k == 3 ? "t (s)" : "");
    polyline(out, f, t, *panels[k].ys, panels[k].color, panels[k].id);
  }
  double lx = kLeft;
  for (BhcPhase p : {BhcPhase::Descend, BhcPhase::Compression, BhcPhase::Rebound, BhcPhase::Ascend}) {
    out += "<rect x=\"" + num(lx) + "\" y=\"4\" width=\"10\" height=\"10\" fill=\"" + phase_color(p) +
           "\" stroke=\"#888\"/>\n<text x=\"" + num(lx + 14) + "\" y=\"13\" font-size=\"10\">" +
           std::string(to_string(p)) + "</text>\n";
    lx += 110;
  }
  return out + "</svg>\n";
}

/// Mean energy per factor value for both modes with +-1 std whiskers.
inline std::string sweep_svg(const SweepSpec& spec, const SweepResult& result) {
  using namespace svg_detail;
  constexpr double kWidth = 640, kHeight = 420, kLeft = 80, kTop = 30;
  std::string out = open(kWidth, kHeight);
  std::vector<double> xs, hover, bounce;
  Range yr{1e300, -1e300};
  for (const SweepPoint& p : result.points) {
    xs.push_back(p.value);
    hover.push_back(p.hover.mean);
    bounce.push_back(p.bounce.mean);
    yr.include(p.hover.mean - p.hover.std);
    yr.include(p.hover.mean + p.hover.std);
    yr.include(p.bounce.mean - p.bounce.std);
    yr.include(p.bounce.mean + p.bounce.std);
  }
  if (xs.empty()) return out + "</svg>\n";
  Range xr = range_of(xs).padded();
  const Frame f{kLeft, kTop, kWidth - kLeft - 30, kHeight - kTop - 60, xr, yr.padded()};
  axes(out, f, "energy (N s)", std::string(to_string(spec.factor)));

  auto whiskers = [&](const std::vector<double>& means, bool is_hover, const char* color) {
    for (std::size_t i = 0; i < result.points.size(); ++i) {
      const double sd = is_hover ? result.points[i].hover.std : result.points[i].bounce.std;
      const double x = f.px(xs[i]);
      out += "<line x1=\"" + num(x) + "\" y1=\"" + num(f.py(means[i] - sd)) + "\" x2=\"" + num(x) +
             "\" y2=\"" + num(f.py(means[i] + sd)) + "\" stroke=\"" + color + "\"/>\n";
      for (double y : {means[i] - sd, means[i] + sd}) {
        out += "<line x1=\"" + num(x - 4) + "\" y1=\"" + num(f.py(y)) + "\" x2=\"" + num(x + 4) + "\" y2=\"" +
               num(f.py(y)) + "\" stroke=\"" + color + "\"/>\n";
      }
    }
  };
  whiskers(hover, true, "#1f4e9c");
  whiskers(bounce, false, "#b03030");
  polyline(out, f, xs, hover, "#1f4e9c", "hover");
  polyline(out, f, xs, bounce, "#b03030", "bounce");
  out += "<text x=\"" + num(kLeft + 10) + "\" y=\"20\" font-size=\"11\" fill=\"#1f4e9c\">hover</text>\n";
  out += "<text x=\"" + num(kLeft + 60) + "\" y=\"20\" font-size=\"11\" fill=\"#b03030\">bounce</text>\n";
  return out + "</svg>\n";
}

}  // namespace pogosim

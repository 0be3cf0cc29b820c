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

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pogosim/harness.hpp"

namespace pogosim {

using Json = nlohmann::ordered_json;

/// Everything a config file can set. The sweep base is `trial`.
struct Config {
  TrialConfig trial;
  SweepFactor factor = SweepFactor::NoiseLevel;
  std::vector<double> values;  // empty: default grid for the factor
  int trials_per_value = 20;

  SweepSpec sweep_spec() const {
    SweepSpec s;
    s.factor = factor;
    s.values = values.empty() ? default_grid(factor) : values;
    s.trials_per_value = trials_per_value;
    s.base = trial;
    return s;
  }
};

namespace config_detail {

// Field lists are written once and walked by both the reader and the writer.
template <typename V>
void robot_fields(V& v, RobotParams& p) {
  v("mass", p.mass);
  v("inertia", p.inertia);
  v("spring_k", p.spring_k);
  v("damping_b", p.damping_b);
  v("rest_length", p.rest_length);
  v("min_length", p.min_length);
  v("gravity", p.gravity);
  v("arm", p.arm);
  v("yaw_coeff", p.yaw_coeff);
  v("rotor_max", p.rotor_max);
  v("stop_k", p.stop_k);
  v("stop_zeta", p.stop_zeta);
  v("freeze_contact_inertia", p.freeze_contact_inertia);
}

template <typename V>
void gains_fields(V& v, ControlGains& g) {
  v("kx", g.kx);
  v("kv", g.kv);
  v("kR", g.kR);
  v("kw", g.kw);
  v("max_tilt", g.max_tilt);
  v("min_vertical", g.min_vertical);
}

template <typename V>
void bhc_fields(V& v, BhcConfig& b) {
  v("target", b.target);
  v("yaw", b.yaw);
  v("sphere_radius", b.sphere_radius);
  v("rate_threshold", b.rate_threshold);
  v("epsilon", b.epsilon);
  v("dwell_time", b.dwell_time);
}

template <typename V>
void noise_fields(V& v, NoiseConfig& n) {
  v("sigma", n.sigma);
  v("seed", n.seed);
  v("ground_scale", n.ground_scale);
}

template <typename V>
void trial_fields(V& v, TrialConfig& t) {
  v("mode", t.mode);
  v("duration", t.duration);
  v("dt", t.dt);
}

template <typename V>
void sweep_fields(V& v, Config& c) {
  v("factor", c.factor);
  v("values", c.values);
  v("trials_per_value", c.trials_per_value);
}

template <typename V>
void all_sections(V& v, Config& c) {
  v.section("robot", [&](auto& s) { robot_fields(s, c.trial.params); });
  v.section("gains", [&](auto& s) { gains_fields(s, c.trial.gains); });
  v.section("bhc", [&](auto& s) { bhc_fields(s, c.trial.bhc); });
  v.section("noise", [&](auto& s) { noise_fields(s, c.trial.noise); });
  v.section("trial", [&](auto& s) { trial_fields(s, c.trial); });
  v.section("sweep", [&](auto& s) { sweep_fields(s, c); });
}

class Writer {
 public:
  explicit Writer(Json& out) : out_(out) {}

  template <typename Fn>
  void section(const char* name, Fn&& fn) {
    Writer sub(out_[name] = Json::object());
    fn(sub);
  }

  void operator()(const char* key, double& x) { out_[key] = x; }
  void operator()(const char* key, bool& x) { out_[key] = x; }
  void operator()(const char* key, int& x) { out_[key] = x; }
  void operator()(const char* key, std::uint64_t& x) { out_[key] = x; }
  void operator()(const char* key, Vec3& x) { out_[key] = {x.x(), x.y(), x.z()}; }
  void operator()(const char* key, Mat3& x) {
    Json rows = Json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({x(i, 0), x(i, 1), x(i, 2)});
    out_[key] = rows;
  }
  void operator()(const char* key, std::vector<double>& x) { out_[key] = x; }
  void operator()(const char* key, FlightMode& x) { out_[key] = std::string(to_string(x)); }
  void operator()(const char* key, SweepFactor& x) { out_[key] = std::string(to_string(x)); }

 private:
  Json& out_;
};

class Reader {
 public:
  Reader(const Json& in, std::string path) : in_(in), path_(std::move(path)) {}

  template <typename Fn>
  void section(const char* name, Fn&& fn) {
    known_.insert(name);
    if (!in_.contains(name)) return;
    const Json& sub = in_.at(name);
    const std::string where = join(name);
    if (!sub.is_object()) fail(where, "expected an object");
    Reader r(sub, where);
    fn(r);
    r.reject_unknown();
  }

  void operator()(const char* key, double& x) {
    if (const Json* j = find(key)) x = number(*j, join(key));
  }
  void operator()(const char* key, bool& x) {
    if (const Json* j = find(key)) {
      if (!j->is_boolean()) fail(join(key), "expected true or false");
      x = j->get<bool>();
    }
  }
  void operator()(const char* key, int& x) {
    if (const Json* j = find(key)) {
      if (!j->is_number_integer()) fail(join(key), "expected an integer");
      x = j->get<int>();
    }
  }
  void operator()(const char* key, std::uint64_t& x) {
    if (const Json* j = find(key)) {
      if (!j->is_number_unsigned()) fail(join(key), "expected a non-negative integer");
      x = j->get<std::uint64_t>();
    }
  }
  void operator()(const char* key, Vec3& x) {
    if (const Json* j = find(key)) {
      if (!j->is_array() || j->size() != 3) fail(join(key), "expected an array of 3 numbers");
      for (int i = 0; i < 3; ++i) x(i) = number((*j)[i], join(key));
    }
  }
  void operator()(const char* key, Mat3& x) {
    if (const Json* j = find(key)) {
      if (!j->is_array() || j->size() != 3) fail(join(key), "expected a 3x3 array");
      for (int i = 0; i < 3; ++i) {
        const Json& row = (*j)[i];
        if (!row.is_array() || row.size() != 3) fail(join(key), "expected a 3x3 array");
        for (int k = 0; k < 3; ++k) x(i, k) = number(row[k], join(key));
      }
    }
  }
  void operator()(const char* key, std::vector<double>& x) {
    if (const Json* j = find(key)) {
      if (!j->is_array()) fail(join(key), "expected an array of numbers");
      x.clear();
      for (const Json& e : *j) x.push_back(number(e, join(key)));
    }
  }
  void operator()(const char* key, FlightMode& x) {
    if (const Json* j = find(key)) {
      const std::string s = j->is_string() ? j->get<std::string>() : "";
      if (s == "hover") x = FlightMode::Hover;
      else if (s == "bounce") x = FlightMode::Bounce;
      else fail(join(key), "expected \"hover\" or \"bounce\"");
    }
  }
  void operator()(const char* key, SweepFactor& x) {
    if (const Json* j = find(key)) {
      const auto f = j->is_string() ? parse_factor(j->get<std::string>()) : std::nullopt;
      if (!f) fail(join(key), "unknown factor");
      x = *f;
    }
  }

  void reject_unknown() const {
    for (const auto& item : in_.items()) {
      if (!known_.count(item.key())) fail(join(item.key()), "unknown key");
    }
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* find(const char* key) {
    known_.insert(key);
    return in_.contains(key) ? &in_.at(key) : nullptr;
  }

  static double number(const Json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + where + ": " + what);
  }

  const Json& in_;
  std::string path_;
  std::set<std::string> known_;
};

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace config_detail

inline Json to_json(const Config& c) {
  Config copy = c;
  Json out = Json::object();
  config_detail::Writer w(out);
  config_detail::all_sections(w, copy);
  return out;
}

/// Parses a config document over the defaults. Missing fields keep their
/// defaults; unknown keys, wrong types and invalid values throw ConfigError.
inline Config parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config: " + config_detail::line_column(text, e.byte) + ": malformed JSON");
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  Config c;
  config_detail::Reader r(doc, "");
  config_detail::all_sections(r, c);
  r.reject_unknown();
  validate(c.sweep_spec());
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline std::string default_config_text() { return to_json(Config{}).dump(2) + "\n"; }

}  // namespace pogosim

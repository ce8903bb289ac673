// Copyright 2026 The qread Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Configuration files (flat INI-style key = value, or a JSON object) and CSV / JSON output.

#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qread/config.hpp"
#include "qread/qubit.hpp"
#include "qread/record.hpp"

namespace qread {

/// Readout parameters plus the knobs of the CLI commands.
struct RunSettings {
  ReadoutConfig cfg;
  /// Whether phi_lo was given explicitly; otherwise it follows the scheme's optimal phase.
  bool phi_explicit = false;
  int n_traj = 1000;
  /// Trajectory engine: "effective" or "full".
  std::string engine = "effective";
  /// Initial qubit state: plus, minus, plus_i, excited, ground.
  std::string initial = "plus";
  StepScheme step = StepScheme::Kraus;
  std::vector<double> snr_taus{1.0, 5.0, 10.0};
  int figure_points = 1000;
  double figure_t_max = 10.0;
  /// Time of the measurement segments in reset-demo.
  double reset_time = 2.0;

  /// Changes the scheme, moving phi_lo to the new optimum unless it was set explicitly.
  void set_scheme(Scheme s) {
    cfg.scheme = s;
    if (!phi_explicit) cfg.phi_lo = s == Scheme::Longitudinal ? kOptimalPhiLongitudinal : kOptimalPhiDispersive;
  }

  void validate() const {
    cfg.validate();
    if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
    if (engine != "effective" && engine != "full") throw ConfigError("engine must be 'effective' or 'full'");
    if (snr_taus.empty()) throw ConfigError("snr_taus must not be empty");
    for (double t : snr_taus)
      if (!(t > 0) || !std::isfinite(t)) throw ConfigError("snr_taus entries must be > 0");
    if (figure_points < 1) throw ConfigError("figure_points must be >= 1");
    if (!(figure_t_max > 0) || !std::isfinite(figure_t_max)) throw ConfigError("figure_t_max must be > 0");
    if (!(reset_time > 0) || !std::isfinite(reset_time)) throw ConfigError("reset_time must be > 0");
    (void)initial_state(initial);
  }

  static QubitState initial_state(std::string_view name) {
    if (name == "plus") return QubitState::plus();
    if (name == "minus") return QubitState::pure(1.0, -1.0);
    if (name == "plus_i") return QubitState::pure(1.0, cplx(0, 1));
    if (name == "excited") return QubitState::excited();
    if (name == "ground") return QubitState::ground();
    throw ConfigError("unknown initial state '" + std::string(name) + "'");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || trim(end).size() != 0) throw ConfigError("key '" + key + "': not a number: '" + text + "'");
  return v;
}

inline long long parse_integer(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || trim(end).size() != 0 || errno != 0) {
    throw ConfigError("key '" + key + "': not an integer: '" + text + "'");
  }
  return v;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

}  // namespace detail

/// Applies one `key = value` pair. Unknown keys are rejected.
inline void apply_setting(RunSettings& s, const std::string& key, const std::string& value) {
  using detail::parse_double;
  ReadoutConfig& c = s.cfg;
  if (key == "scheme") {
    s.set_scheme(parse_scheme(value));
  } else if (key == "drive" || key == "g_z" || key == "eps_m") {
    c.drive = parse_double(key, value);
  } else if (key == "chi") {
    c.chi = parse_double(key, value);
  } else if (key == "kappa") {
    c.kappa = parse_double(key, value);
  } else if (key == "phi_lo") {
    c.phi_lo = parse_double(key, value);
    s.phi_explicit = true;
  } else if (key == "gamma1") {
    c.gamma1 = parse_double(key, value);
  } else if (key == "gamma2") {
    c.gamma2 = parse_double(key, value);
  } else if (key == "dt") {
    c.dt = parse_double(key, value);
  } else if (key == "t_final") {
    c.t_final = parse_double(key, value);
  } else if (key == "seed") {
    const long long v = detail::parse_integer(key, value);
    if (v < 0) throw ConfigError("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(v);
  } else if (key == "n_max") {
    c.n_max = static_cast<int>(detail::parse_integer(key, value));
  } else if (key == "n_traj") {
    s.n_traj = static_cast<int>(detail::parse_integer(key, value));
  } else if (key == "engine") {
    s.engine = value;
  } else if (key == "initial") {
    s.initial = value;
  } else if (key == "step_scheme") {
    s.step = parse_step_scheme(value);
  } else if (key == "snr_taus") {
    s.snr_taus = detail::parse_list(key, value);
  } else if (key == "figure_points") {
    s.figure_points = static_cast<int>(detail::parse_integer(key, value));
  } else if (key == "figure_t_max") {
    s.figure_t_max = parse_double(key, value);
  } else if (key == "reset_time") {
    s.reset_time = parse_double(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

/// Parses `key = value` lines; '#' and ';' start comments, `[section]` lines are ignored.
inline RunSettings parse_ini(std::string_view text, RunSettings s = {}) {
  std::stringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    apply_setting(s, key, value);
  }
  s.validate();
  return s;
}

inline RunSettings parse_json(std::string_view text, RunSettings s = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON configuration: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("JSON configuration must be an object");
  // Apply the scheme first so that an explicit phi_lo is never overridden by its default.
  if (j.contains("scheme")) {
    if (!j["scheme"].is_string()) throw ConfigError("key 'scheme' must be a string");
    apply_setting(s, "scheme", j["scheme"].get<std::string>());
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "scheme") continue;
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      text = value.dump();
    } else if (value.is_number()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", value.get<double>());
      text = buf;
    } else if (value.is_array()) {
      for (const auto& v : value) {
        if (!v.is_number()) throw ConfigError("key '" + key + "': array entries must be numbers");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        text += (text.empty() ? "" : ",") + std::string(buf);
      }
    } else {
      throw ConfigError("key '" + key + "': unsupported value type");
    }
    apply_setting(s, key, text);
  }
  s.validate();
  return s;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Loads a `.json` file as JSON and anything else as INI.
inline RunSettings load_settings(const std::string& path) {
  const std::string text = read_text_file(path);
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? parse_json(text) : parse_ini(text);
}

inline nlohmann::json to_json(const ReadoutConfig& c) {
  return {{"scheme", std::string(to_string(c.scheme))},
          {"drive", c.drive},
          {"chi", c.chi},
          {"kappa", c.kappa},
          {"phi_lo", c.phi_lo},
          {"gamma1", c.gamma1},
          {"gamma2", c.gamma2},
          {"dt", c.dt},
          {"t_final", c.t_final},
          {"seed", c.seed},
          {"n_max", c.n_max}};
}

inline nlohmann::json to_json(const RunSettings& s) {
  nlohmann::json j = to_json(s.cfg);
  j["n_traj"] = s.n_traj;
  j["engine"] = s.engine;
  j["initial"] = s.initial;
  j["step_scheme"] = std::string(to_string(s.step));
  j["snr_taus"] = s.snr_taus;
  j["figure_points"] = s.figure_points;
  j["figure_t_max"] = s.figure_t_max;
  j["reset_time"] = s.reset_time;
  return j;
}

inline nlohmann::json to_json(const QubitState& q) {
  return {{"rho_ee", q.rho_ee}, {"rho_gg", q.rho_gg}, {"rho_eg_re", q.rho_eg.real()}, {"rho_eg_im", q.rho_eg.imag()}};
}

/// Shortest round-trip text for a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Comma-separated writer with a header row; refuses non-finite values.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot write '" + path + "'");
    columns_ = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    if (values.size() != columns_) throw std::logic_error("CSV row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) throw NumericalError("non-finite value in output '" + path_ + "'");
      out_ << (i ? "," : "") << format_double(values[i]);
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw ConfigError("failed writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
};

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

/// Columns t, current, xi, phi_lo.
inline void write_record_csv(const std::string& path, const HomodyneRecord& rec) {
  CsvWriter w(path, {"t", "current", "xi", "phi_lo"});
  for (std::size_t k = 0; k < rec.size(); ++k) w.row({rec.time(k), rec.current[k], rec.xi[k], rec.phi_lo});
  w.close();
}

/// Reads a record written by write_record_csv. The grid spacing is checked against cfg.dt (relative 1e-9)
/// and then taken to be exactly cfg.dt; the xi column is optional.
inline HomodyneRecord read_record_csv(const std::string& path, const ReadoutConfig& cfg) {
  std::stringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("record '" + path + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string h;
    while (std::getline(hs, h, ',')) header.push_back(detail::trim(h));
  }
  auto column = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int ct = column("t"), ci = column("current"), cx = column("xi"), cp = column("phi_lo");
  if (ct < 0 || ci < 0) throw ConfigError("record '" + path + "' needs columns t and current");

  HomodyneRecord rec;
  std::vector<double> times;
  std::vector<double> phis;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(detail::trim(cell));
    if (cells.size() != header.size()) throw ConfigError("record line " + std::to_string(lineno) + ": wrong width");
    const std::string where = "record line " + std::to_string(lineno);
    times.push_back(detail::parse_double(where, cells[static_cast<std::size_t>(ct)]));
    rec.current.push_back(detail::parse_double(where, cells[static_cast<std::size_t>(ci)]));
    if (cx >= 0) rec.xi.push_back(detail::parse_double(where, cells[static_cast<std::size_t>(cx)]));
    if (cp >= 0) phis.push_back(detail::parse_double(where, cells[static_cast<std::size_t>(cp)]));
  }
  if (times.empty()) throw ConfigError("record '" + path + "' has no samples");
  if (cx < 0) rec.xi.assign(rec.current.size(), 0.0);
  rec.t0 = times.front();
  rec.dt = cfg.dt;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double expect = rec.t0 + cfg.dt * static_cast<double>(k);
    if (std::abs(times[k] - expect) > 1e-9 * std::max(cfg.dt, std::abs(expect))) {
      throw ConfigError("record '" + path + "' is not on the configured dt grid");
    }
  }
  rec.phi_lo = phis.empty() ? cfg.phi_lo : phis.front();
  for (double p : phis)
    if (p != rec.phi_lo) throw ConfigError("record '" + path + "' has a varying phi_lo");
  return rec;
}

}  // namespace qread

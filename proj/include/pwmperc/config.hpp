#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pwmperc/device.hpp"
#include "pwmperc/errors.hpp"
#include "pwmperc/rational.hpp"
#include "pwmperc/solver.hpp"

namespace pwmperc {

// Numeric literal with optional SI suffix and unit, e.g. "10pF", "500MHz",
// "100kOhm", "2.5V". Meg and M are 1e6; m is 1e-3 (case matters).
inline double parse_si(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double base = std::strtod(begin, &end);
  if (end == begin) throw ConfigError("not a number: '" + text + "'");
  std::string rest(end);
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front())))
    rest.erase(rest.begin());
  double scale = 1.0;
  if (rest.rfind("Meg", 0) == 0) {
    scale = 1e6;
    rest.erase(0, 3);
  } else if (!rest.empty()) {
    switch (rest.front()) {
      case 'p': scale = 1e-12; rest.erase(0, 1); break;
      case 'n': scale = 1e-9; rest.erase(0, 1); break;
      case 'u': scale = 1e-6; rest.erase(0, 1); break;
      case 'm': scale = 1e-3; rest.erase(0, 1); break;
      case 'k': case 'K': scale = 1e3; rest.erase(0, 1); break;
      case 'M': scale = 1e6; rest.erase(0, 1); break;
      case 'G': scale = 1e9; rest.erase(0, 1); break;
      default: break;  // plain unit such as V or Hz
    }
  }
  for (char c : rest)
    if (!std::isalpha(static_cast<unsigned char>(c)))
      throw ConfigError("trailing garbage in number: '" + text + "'");
  return base * scale;
}

// Frequencies are snapped to micro-hertz resolution so they stay exact
// rationals for hyperperiod detection.
inline Rational frequency_rational(double hz) {
  if (!(hz > 0.0)) throw ConfigError("frequency must be > 0");
  return Rational(static_cast<std::int64_t>(std::llround(hz * 1e6)), 1'000'000);
}

/// Full resolved parameter set: Table-style defaults overlaid by config file
/// and command-line overrides.
struct Params {
  double v_dd = 2.5;

  double inverter_c_out = 1e-12;
  double inverter_r_out = 100e3;

  int adder_k = 3;
  int adder_n = 3;
  double adder_c_out = 10e-12;
  double adder_r_out_base = 100e3;
  std::vector<int> adder_weights = {7, 7, 7};
  std::vector<double> adder_duties = {0.25, 0.5, 0.75};

  double stimulus_freq = 500e6;
  double stimulus_duty = 0.5;
  double stimulus_phase = 0.0;

  std::string model_kind = "linear";  // linear | squarelaw
  double r_on_n = 10e3;
  double r_on_p = 10e3;
  double vth_n = 0.45;
  double vth_p = 0.45;
  double kp_n = 100e-6;
  double kp_p = 40e-6;

  double ss_tol = 1e-6;
  double newton_tol = 1e-6;
  int max_periods = 10000;
  double max_step = 0.0;  // 0 selects period/256
  double v_init = 0.0;

  DeviceModel device_model() const {
    if (model_kind == "linear") return LinearSwitchModel{r_on_n, r_on_p};
    return SquareLawModel{vth_n, vth_p, kp_n, kp_p};
  }

  SolverOptions solver_options() const {
    SolverOptions o;
    o.mode = model_kind == "linear" ? SolverMode::analytic_linear
                                    : SolverMode::implicit_nonlinear;
    o.ss_tol = ss_tol;
    o.newton_tol = newton_tol;
    o.max_periods = max_periods;
    o.max_step = max_step;
    o.v_init = v_init;
    return o;
  }

  std::string dump() const;
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) out.push_back(item);
  return out;
}

inline void set_key(Params& p, const std::string& key, const std::string& value) {
  auto num = [&] { return parse_si(value); };
  auto positive = [&](double v) {
    if (!(v > 0.0)) throw ConfigError(key + ": must be > 0, got '" + value + "'");
    return v;
  };
  auto nonneg = [&](double v) {
    if (v < 0.0) throw ConfigError(key + ": must be >= 0, got '" + value + "'");
    return v;
  };

  if (key == "supply.v_dd") p.v_dd = positive(num());
  else if (key == "inverter.c_out") p.inverter_c_out = positive(num());
  else if (key == "inverter.r_out") p.inverter_r_out = nonneg(num());
  else if (key == "adder.k") {
    p.adder_k = static_cast<int>(num());
    if (p.adder_k < 1) throw ConfigError(key + ": must be >= 1");
  } else if (key == "adder.n") {
    p.adder_n = static_cast<int>(num());
    if (p.adder_n < 1) throw ConfigError(key + ": must be >= 1");
  } else if (key == "adder.c_out") p.adder_c_out = positive(num());
  else if (key == "adder.r_out_base") p.adder_r_out_base = nonneg(num());
  else if (key == "adder.weights") {
    p.adder_weights.clear();
    for (const auto& it : split_list(value))
      p.adder_weights.push_back(static_cast<int>(parse_si(it)));
  } else if (key == "adder.duties") {
    p.adder_duties.clear();
    for (const auto& it : split_list(value)) {
      const double d = parse_si(it);
      if (d < 0.0 || d > 1.0) throw ConfigError(key + ": duty outside [0,1]");
      p.adder_duties.push_back(d);
    }
  } else if (key == "stimulus.freq") p.stimulus_freq = positive(num());
  else if (key == "stimulus.duty") {
    p.stimulus_duty = num();
    if (p.stimulus_duty < 0.0 || p.stimulus_duty > 1.0)
      throw ConfigError(key + ": duty outside [0,1]");
  } else if (key == "stimulus.phase") {
    p.stimulus_phase = num();
    if (p.stimulus_phase < 0.0 || p.stimulus_phase >= 1.0)
      throw ConfigError(key + ": phase outside [0,1)");
  } else if (key == "model.kind") {
    if (value != "linear" && value != "squarelaw")
      throw ConfigError(key + ": expected linear or squarelaw, got '" + value + "'");
    p.model_kind = value;
  } else if (key == "model.r_on_n") p.r_on_n = positive(num());
  else if (key == "model.r_on_p") p.r_on_p = positive(num());
  else if (key == "model.vth_n") p.vth_n = nonneg(num());
  else if (key == "model.vth_p") p.vth_p = nonneg(num());
  else if (key == "model.kp_n") p.kp_n = positive(num());
  else if (key == "model.kp_p") p.kp_p = positive(num());
  else if (key == "solver.ss_tol") p.ss_tol = positive(num());
  else if (key == "solver.newton_tol") p.newton_tol = positive(num());
  else if (key == "solver.max_periods") {
    p.max_periods = static_cast<int>(num());
    if (p.max_periods < 1) throw ConfigError(key + ": must be >= 1");
  } else if (key == "solver.max_step") p.max_step = nonneg(num());
  else if (key == "solver.v_init") p.v_init = nonneg(num());
  else throw ConfigError("unknown key '" + key + "'");
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline std::string Params::dump() const {
  using detail::fmt_num;
  std::ostringstream os;
  os << "adder.c_out=" << fmt_num(adder_c_out);
  os << " adder.duties=";
  for (std::size_t i = 0; i < adder_duties.size(); ++i)
    os << (i ? "," : "") << fmt_num(adder_duties[i]);
  os << " adder.k=" << adder_k << " adder.n=" << adder_n;
  os << " adder.r_out_base=" << fmt_num(adder_r_out_base);
  os << " adder.weights=";
  for (std::size_t i = 0; i < adder_weights.size(); ++i)
    os << (i ? "," : "") << adder_weights[i];
  os << " inverter.c_out=" << fmt_num(inverter_c_out)
     << " inverter.r_out=" << fmt_num(inverter_r_out);
  os << " model.kind=" << model_kind;
  os << " model.kp_n=" << fmt_num(kp_n) << " model.kp_p=" << fmt_num(kp_p);
  os << " model.r_on_n=" << fmt_num(r_on_n) << " model.r_on_p=" << fmt_num(r_on_p);
  os << " model.vth_n=" << fmt_num(vth_n) << " model.vth_p=" << fmt_num(vth_p);
  os << " solver.max_periods=" << max_periods << " solver.max_step=" << fmt_num(max_step);
  os << " solver.newton_tol=" << fmt_num(newton_tol) << " solver.ss_tol=" << fmt_num(ss_tol);
  os << " solver.v_init=" << fmt_num(v_init);
  os << " stimulus.duty=" << fmt_num(stimulus_duty) << " stimulus.freq=" << fmt_num(stimulus_freq)
     << " stimulus.phase=" << fmt_num(stimulus_phase);
  os << " supply.v_dd=" << fmt_num(v_dd);
  return os.str();
}

/// Apply one "key=value" override (command-line --set form).
inline void apply_override(Params& p, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + kv + "': expected key=value");
  detail::set_key(p, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
}

/// Parse a flat `section.key = value` file onto the defaults. `#` starts a
/// comment; blank lines are ignored. Errors name the offending line.
inline Params load_config(const std::string& path) {
  Params p;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      detail::set_key(p, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return p;
}

}  // namespace pwmperc

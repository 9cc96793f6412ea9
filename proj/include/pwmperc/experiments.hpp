#pragma once

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "pwmperc/analysis.hpp"
#include "pwmperc/config.hpp"
#include "pwmperc/netlist.hpp"
#include "pwmperc/solver.hpp"
#include "pwmperc/svg.hpp"

namespace pwmperc {

struct ExperimentSpec {
  std::string name;  // duty_sweep, freq_sweep, vdd_sweep_abs, vdd_sweep_rel,
                     // adder_table, power_sweep, single_run
  Params params;
  std::string out_dir = "out";
  bool plot = false;
};

namespace detail {

// Bounded worker pool over [0, n); result order is the caller's, so
// parallelism never affects output bytes.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline std::ofstream open_csv(const ExperimentSpec& spec, const std::string& filename) {
  std::filesystem::create_directories(spec.out_dir);
  std::ofstream out(std::filesystem::path(spec.out_dir) / filename, std::ios::binary);
  if (!out) throw ConfigError("cannot write to output directory '" + spec.out_dir + "'");
  out << "# pwmperc " << spec.name << " | " << spec.params.dump() << "\n";
  return out;
}

}  // namespace detail

// Default sweep grids.

inline std::vector<double> duty_grid() {
  std::vector<double> g;
  for (int pct = 1; pct <= 99; ++pct) g.push_back(pct / 100.0);
  return g;
}

inline std::vector<double> duty_sweep_r_outs() { return {0.0, 10e3, 100e3, 1e6}; }

inline std::vector<double> log_freq_grid(double lo_hz, double hi_hz, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) {
    const double f = lo_hz * std::pow(hi_hz / lo_hz, static_cast<double>(i) / (points - 1));
    g.push_back(static_cast<double>(std::llround(f)));  // integer Hz, exact rational
  }
  return g;
}

inline std::vector<double> vdd_grid() {
  std::vector<double> g;
  for (int i = 5; i <= 30; ++i) g.push_back(i / 10.0);
  return g;
}

inline std::vector<double> sweep_duties() { return {0.25, 0.5, 0.75}; }

// Single steady-state runs used by the sweeps.

inline SteadyStateResult pss_inverter(const Params& p, double freq_hz, double duty, double r_out,
                                      double v_dd) {
  CellGeometry g;
  g.r_out = r_out;
  Netlist nl = build_inverter(g, p.inverter_c_out, v_dd, p.device_model());
  PwmSpec spec;
  spec.frequency = frequency_rational(freq_hz);
  spec.duty_cycle = duty;
  spec.v_high = v_dd;
  return periodic_steady_state(nl, {spec}, p.solver_options());
}

inline SteadyStateResult pss_adder(const Params& p, const std::vector<double>& duties,
                                   const std::vector<int>& weights, double freq_hz) {
  AdderConfig cfg;
  cfg.k = static_cast<int>(weights.size());
  cfg.n = p.adder_n;
  cfg.weights = weights;
  cfg.v_dd = p.v_dd;
  cfg.c_out = p.adder_c_out;
  cfg.r_out_base = p.adder_r_out_base;
  cfg.model = p.device_model();
  Netlist nl = build_weighted_adder(cfg);
  std::vector<PwmSpec> stimuli;
  for (double d : duties) {
    PwmSpec s;
    s.frequency = frequency_rational(freq_hz);
    s.duty_cycle = d;
    s.v_high = p.v_dd;
    stimuli.push_back(s);
  }
  return periodic_steady_state(nl, stimuli, p.solver_options());
}

// The six weighted-adder benchmark cases (duties and 3-bit weights).
struct AdderCase {
  std::vector<double> duties;
  std::vector<int> weights;
};

inline std::vector<AdderCase> adder_benchmark_cases() {
  return {
      {{0.70, 0.80, 0.90}, {7, 7, 7}}, {{0.50, 0.50, 0.50}, {1, 2, 4}},
      {{0.20, 0.60, 0.80}, {5, 6, 7}}, {{0.95, 0.90, 0.80}, {7, 6, 6}},
      {{0.30, 0.40, 0.50}, {1, 4, 2}}, {{0.80, 0.20, 0.50}, {7, 3, 4}},
  };
}

// Experiment bodies. Each writes one deterministic CSV (and one SVG when
// plotting is enabled) into spec.out_dir.

inline void run_duty_sweep(const ExperimentSpec& spec) {
  const Params& p = spec.params;
  const auto r_outs = duty_sweep_r_outs();
  const auto duties = duty_grid();
  std::vector<double> results(r_outs.size() * duties.size());
  detail::parallel_for(results.size(), [&](std::size_t i) {
    const double r_out = r_outs[i / duties.size()];
    const double duty = duties[i % duties.size()];
    results[i] = pss_inverter(p, p.stimulus_freq, duty, r_out, p.v_dd).v_avg;
  });

  auto out = detail::open_csv(spec, "duty_sweep.csv");
  out << "r_out_ohm,duty,v_avg_V\n";
  for (std::size_t i = 0; i < results.size(); ++i)
    out << detail::fmt_num(r_outs[i / duties.size()]) << ","
        << detail::fmt_num(duties[i % duties.size()]) << "," << detail::fmt_num(results[i])
        << "\n";

  if (spec.plot) {
    SvgPlot plot("Output voltage vs input duty cycle", "duty cycle", "V_avg [V]");
    for (std::size_t r = 0; r < r_outs.size(); ++r) {
      std::vector<double> ys(results.begin() + r * duties.size(),
                             results.begin() + (r + 1) * duties.size());
      plot.add_series("R_out=" + detail::fmt_num(r_outs[r]), duties, ys);
    }
    plot.write((std::filesystem::path(spec.out_dir) / "duty_sweep.svg").string());
  }
}

inline void run_freq_sweep(const ExperimentSpec& spec) {
  const Params& p = spec.params;
  const auto freqs = log_freq_grid(1e6, 1500e6, 30);
  const auto duties = sweep_duties();
  std::vector<double> results(freqs.size() * duties.size());
  detail::parallel_for(results.size(), [&](std::size_t i) {
    const double f = freqs[i / duties.size()];
    const double d = duties[i % duties.size()];
    results[i] = pss_inverter(p, f, d, p.inverter_r_out, p.v_dd).v_avg;
  });

  auto out = detail::open_csv(spec, "freq_sweep.csv");
  out << "freq_hz,duty,v_avg_V\n";
  for (std::size_t i = 0; i < results.size(); ++i)
    out << detail::fmt_num(freqs[i / duties.size()]) << ","
        << detail::fmt_num(duties[i % duties.size()]) << "," << detail::fmt_num(results[i])
        << "\n";

  if (spec.plot) {
    SvgPlot plot("Output voltage vs input frequency", "frequency [Hz]", "V_avg [V]", true);
    for (std::size_t d = 0; d < duties.size(); ++d) {
      std::vector<double> ys;
      for (std::size_t f = 0; f < freqs.size(); ++f) ys.push_back(results[f * duties.size() + d]);
      plot.add_series("DC=" + detail::fmt_num(duties[d]), freqs, ys);
    }
    plot.write((std::filesystem::path(spec.out_dir) / "freq_sweep.svg").string());
  }
}

inline void run_vdd_sweep(const ExperimentSpec& spec, bool relative) {
  const Params& p = spec.params;
  const auto vdds = vdd_grid();
  const auto duties = sweep_duties();
  std::vector<double> results(vdds.size() * duties.size());
  detail::parallel_for(results.size(), [&](std::size_t i) {
    const double v_dd = vdds[i / duties.size()];
    const double d = duties[i % duties.size()];
    results[i] = pss_inverter(p, p.stimulus_freq, d, p.inverter_r_out, v_dd).v_avg;
  });

  auto out = detail::open_csv(spec, relative ? "vdd_sweep_rel.csv" : "vdd_sweep_abs.csv");
  out << (relative ? "v_dd_V,duty,v_avg_V,v_rel\n" : "v_dd_V,duty,v_avg_V\n");
  for (std::size_t i = 0; i < results.size(); ++i) {
    const double v_dd = vdds[i / duties.size()];
    out << detail::fmt_num(v_dd) << "," << detail::fmt_num(duties[i % duties.size()]) << ","
        << detail::fmt_num(results[i]);
    if (relative) out << "," << detail::fmt_num(results[i] / v_dd);
    out << "\n";
  }

  if (spec.plot) {
    SvgPlot plot(relative ? "Relative output voltage vs supply" : "Output voltage vs supply",
                 "V_dd [V]", relative ? "V_avg / V_dd" : "V_avg [V]");
    for (std::size_t d = 0; d < duties.size(); ++d) {
      std::vector<double> ys;
      for (std::size_t v = 0; v < vdds.size(); ++v) {
        double y = results[v * duties.size() + d];
        if (relative) y /= vdds[v];
        ys.push_back(y);
      }
      plot.add_series("DC=" + detail::fmt_num(duties[d]), vdds, ys);
    }
    plot.write((std::filesystem::path(spec.out_dir) /
                (relative ? "vdd_sweep_rel.svg" : "vdd_sweep_abs.svg"))
                   .string());
  }
}

inline void run_adder_table(const ExperimentSpec& spec) {
  const Params& p = spec.params;
  const auto cases = adder_benchmark_cases();
  std::vector<double> results(cases.size());
  detail::parallel_for(cases.size(), [&](std::size_t i) {
    results[i] = pss_adder(p, cases[i].duties, cases[i].weights, p.stimulus_freq).v_avg;
  });

  auto out = detail::open_csv(spec, "adder_table.csv");
  out << "dc1,w1,dc2,w2,dc3,w3,v_theoretical,v_simulated,v_simulated_model\n";
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const double theo = eq2_prediction(c.duties, c.weights, static_cast<int>(c.weights.size()),
                                       p.adder_n, p.v_dd);
    out << detail::fmt_num(c.duties[0]) << "," << c.weights[0] << ","
        << detail::fmt_num(c.duties[1]) << "," << c.weights[1] << ","
        << detail::fmt_num(c.duties[2]) << "," << c.weights[2] << "," << detail::fmt_num(theo)
        << "," << detail::fmt_num(results[i]) << "," << p.model_kind << "\n";
  }

  if (spec.plot) {
    SvgPlot plot("Weighted adder: simulated vs theoretical", "case", "V_out [V]");
    std::vector<double> xs, theo, sim;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      xs.push_back(static_cast<double>(i + 1));
      theo.push_back(eq2_prediction(cases[i].duties, cases[i].weights, 3, p.adder_n, p.v_dd));
      sim.push_back(results[i]);
    }
    plot.add_series("theoretical", xs, theo);
    plot.add_series("simulated", xs, sim);
    plot.write((std::filesystem::path(spec.out_dir) / "adder_table.svg").string());
  }
}

inline void run_power_sweep(const ExperimentSpec& spec) {
  const Params& p = spec.params;
  const auto freqs = log_freq_grid(1e6, 1000e6, 30);
  std::vector<double> results(freqs.size());
  detail::parallel_for(freqs.size(), [&](std::size_t i) {
    results[i] = average_power(pss_adder(p, p.adder_duties, p.adder_weights, freqs[i]));
  });

  auto out = detail::open_csv(spec, "power_sweep.csv");
  out << "freq_hz,avg_power_W\n";
  for (std::size_t i = 0; i < freqs.size(); ++i)
    out << detail::fmt_num(freqs[i]) << "," << detail::fmt_num(results[i]) << "\n";

  if (spec.plot) {
    SvgPlot plot("Average power vs input frequency", "frequency [Hz]", "power [W]", true);
    plot.add_series("P_avg", freqs, results);
    plot.write((std::filesystem::path(spec.out_dir) / "power_sweep.svg").string());
  }
}

inline void run_single(const ExperimentSpec& spec) {
  const Params& p = spec.params;
  const SteadyStateResult r =
      pss_inverter(p, p.stimulus_freq, p.stimulus_duty, p.inverter_r_out, p.v_dd);
  auto out = detail::open_csv(spec, "single_run.csv");
  out << "v_avg_V,ripple_pp_V,avg_power_W,periods_to_converge,window_s,converged\n";
  out << detail::fmt_num(r.v_avg) << "," << detail::fmt_num(r.ripple_pp) << ","
      << detail::fmt_num(r.avg_power) << "," << r.periods_to_converge << ","
      << detail::fmt_num(r.window) << "," << (r.converged ? 1 : 0) << "\n";
}

inline void run_experiment(const ExperimentSpec& spec) {
  if (spec.name == "duty_sweep") run_duty_sweep(spec);
  else if (spec.name == "freq_sweep") run_freq_sweep(spec);
  else if (spec.name == "vdd_sweep_abs") run_vdd_sweep(spec, false);
  else if (spec.name == "vdd_sweep_rel") run_vdd_sweep(spec, true);
  else if (spec.name == "adder_table") run_adder_table(spec);
  else if (spec.name == "power_sweep") run_power_sweep(spec);
  else if (spec.name == "single_run") run_single(spec);
  else throw ConfigError("unknown experiment '" + spec.name + "'");
}

}  // namespace pwmperc

// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pwmperc/analysis.hpp"
#include "pwmperc/experiments.hpp"
#include "pwmperc/netlist.hpp"
#include "pwmperc/solver.hpp"

using namespace pwmperc;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail = "") {
  std::printf("%s  criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

struct TableRow {
  std::vector<double> duties;
  std::vector<int> weights;
  double v_theoretical;  // published rounding
  double v_cadence;      // published simulated column, not reproduced here
};

const std::vector<TableRow> kRows = {
    {{0.70, 0.80, 0.90}, {7, 7, 7}, 2.00, 1.99}, {{0.50, 0.50, 0.50}, {1, 2, 4}, 0.42, 0.39},
    {{0.20, 0.60, 0.80}, {5, 6, 7}, 1.21, 1.17}, {{0.95, 0.90, 0.80}, {7, 6, 6}, 2.00, 2.05},
    {{0.30, 0.40, 0.50}, {1, 4, 2}, 0.34, 0.29}, {{0.80, 0.20, 0.50}, {7, 3, 4}, 0.96, 0.89},
};

PwmSpec spec_hz(double hz, double duty) {
  PwmSpec s;
  s.frequency = frequency_rational(hz);
  s.duty_cycle = duty;
  return s;
}

std::vector<PwmSpec> stimuli_for(const std::vector<double>& duties, double hz = 500e6) {
  std::vector<PwmSpec> out;
  for (double d : duties) out.push_back(spec_hz(hz, d));
  return out;
}

Netlist row_adder(const TableRow& row, DeviceModel model) {
  AdderConfig cfg;
  cfg.weights = row.weights;
  cfg.model = model;
  return build_weighted_adder(cfg);
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0, max_residual = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  LineFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  const double mean_y = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.slope * xs[i] + f.intercept);
    ss_res += r * r;
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    f.max_residual = std::max(f.max_residual, std::abs(r));
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------

void criterion_1_eq2_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const TableRow& row : kRows) {
    const double v = eq2_prediction(row.duties, row.weights, 3, 3, 2.5);
    worst = std::max(worst, std::abs(v - row.v_theoretical));
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  char detail[96];
  std::snprintf(detail, sizeof detail, "worst |dv|=%.4f V (<=0.005), %.3f ms (<1)", worst, ms);
  report(1, "eq2 prediction reproduces the published theoretical column", worst <= 0.005 && ms < 1.0,
         detail);
}

void criterion_2_exact_average() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const TableRow& row : kRows) {
    Netlist nl = row_adder(row, LinearSwitchModel{});
    const double predicted = divider_prediction(nl, row.duties);
    const double simulated = periodic_steady_state(nl, stimuli_for(row.duties)).v_avg;
    worst = std::max(worst, std::abs(simulated - predicted));
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char detail[96];
  std::snprintf(detail, sizeof detail, "worst |dv|=%.2e V (<=%.1e), %.2f s (<1)", worst, 1e-5 * 2.5,
                s);
  report(2, "PSS equals the divider prediction under the symmetric linear model",
         worst <= 1e-5 * 2.5 && s < 1.0, detail);
}

void criterion_3_square_law_deviation() {
  double worst = 0.0;
  std::printf("     square-law error report (theoretical / simulated / abs / rel):\n");
  SolverOptions opts;
  opts.mode = SolverMode::implicit_nonlinear;
  for (const TableRow& row : kRows) {
    Netlist nl = row_adder(row, SquareLawModel{});
    const double v = periodic_steady_state(nl, stimuli_for(row.duties), opts).v_avg;
    const PredictionReport rep = measure(row.v_theoretical, v, 2.5);
    std::printf("       %.2f V / %.3f V / %.3f V / %.4f\n", rep.v_theoretical, rep.v_simulated,
                rep.abs_error, rep.rel_error);
    worst = std::max(worst, rep.abs_error);
  }
  char detail[64];
  std::snprintf(detail, sizeof detail, "worst |dv|=%.3f V (<=0.15)", worst);
  report(3, "square-law model tracks the theoretical column", worst <= 0.15, detail);
}

void criterion_4_frequency_elasticity() {
  const auto freqs = log_freq_grid(1e6, 1500e6, 30);
  CellGeometry g;
  g.r_out = 100e3;
  double worst_lin = 0.0, worst_sq = 0.0;
  for (double duty : {0.25, 0.5, 0.75}) {
    double lo_l = 1e300, hi_l = -1e300, lo_s = 1e300, hi_s = -1e300;
    for (double f : freqs) {
      Netlist lin = build_inverter(g, 1e-12, 2.5, LinearSwitchModel{});
      const double v_l = periodic_steady_state(lin, {spec_hz(f, duty)}).v_avg;
      lo_l = std::min(lo_l, v_l);
      hi_l = std::max(hi_l, v_l);
      if (f >= 10e6) {
        Netlist sq = build_inverter(g, 1e-12, 2.5, SquareLawModel{});
        SolverOptions opts;
        opts.mode = SolverMode::implicit_nonlinear;
        const double v_s = periodic_steady_state(sq, {spec_hz(f, duty)}, opts).v_avg;
        lo_s = std::min(lo_s, v_s);
        hi_s = std::max(hi_s, v_s);
      }
    }
    worst_lin = std::max(worst_lin, hi_l - lo_l);
    worst_sq = std::max(worst_sq, hi_s - lo_s);
  }
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "linear spread %.2e V (<=%.1e), square-law spread %.3f V (<=%.2f, f>=10MHz)",
                worst_lin, 0.001 * 2.5, worst_sq, 0.02 * 2.5);
  report(4, "output is flat across 1-1500 MHz", worst_lin <= 0.001 * 2.5 && worst_sq <= 0.02 * 2.5,
         detail);
}

void criterion_5_supply_elasticity() {
  const auto vdds = vdd_grid();
  CellGeometry g;
  g.r_out = 100e3;
  double worst_lin_rel = 0.0, worst_sq_spread = 0.0;
  for (double duty : {0.25, 0.5, 0.75}) {
    double ratio_ref = 0.0;
    double lo_s = 1e300, hi_s = -1e300;
    bool first = true;
    for (double v_dd : vdds) {
      Netlist lin = build_inverter(g, 1e-12, v_dd, LinearSwitchModel{});
      PwmSpec s = spec_hz(500e6, duty);
      s.v_high = v_dd;
      const double ratio = periodic_steady_state(lin, {s}).v_avg / v_dd;
      if (first) {
        ratio_ref = ratio;
        first = false;
      } else {
        worst_lin_rel = std::max(worst_lin_rel, std::abs(ratio - ratio_ref) / ratio_ref);
      }
      if (v_dd >= 1.5) {
        Netlist sq = build_inverter(g, 1e-12, v_dd, SquareLawModel{});
        SolverOptions opts;
        opts.mode = SolverMode::implicit_nonlinear;
        const double r_sq = periodic_steady_state(sq, {s}, opts).v_avg / v_dd;
        lo_s = std::min(lo_s, r_sq);
        hi_s = std::max(hi_s, r_sq);
      }
    }
    worst_sq_spread = std::max(worst_sq_spread, hi_s - lo_s);
  }
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "linear ratio rel spread %.1e (<=1e-9), square-law ratio spread %.4f (<=0.02)",
                worst_lin_rel, worst_sq_spread);
  report(5, "output-to-supply ratio survives supply variation",
         worst_lin_rel <= 1e-9 && worst_sq_spread <= 0.02, detail);
}

void criterion_6_linearization_by_r_out() {
  SolverOptions opts;
  opts.mode = SolverMode::implicit_nonlinear;
  auto sweep = [&](double r_out) {
    std::vector<double> xs, ys;
    CellGeometry g;
    g.r_out = r_out;
    Netlist nl = build_inverter(g, 1e-12, 2.5, SquareLawModel{});
    for (int pct = 1; pct <= 99; pct += 2) {
      xs.push_back(pct / 100.0);
      ys.push_back(periodic_steady_state(nl, {spec_hz(500e6, pct / 100.0)}, opts).v_avg);
    }
    return fit_line(xs, ys);
  };
  const LineFit big = sweep(100e3);
  const LineFit none = sweep(0.0);
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "R2(100k)=%.6f (>=0.999), resid(0)=%.4f V vs resid(100k)=%.5f V (>=5x)", big.r2,
                none.max_residual, big.max_residual);
  report(6, "large output resistor linearizes the duty transfer curve",
         big.r2 >= 0.999 && none.max_residual >= 5.0 * big.max_residual, detail);
}

void criterion_7_solver_oracle_equivalence() {
  // Reference v_avg: explicit Euler at dt=period/1e4. The steady average is
  // extracted by shooting on the Euler period map (exactly affine for the
  // linear model) instead of letting 200 raw periods settle: the 10 pF adder
  // still carries ~6e-4 V of settling residue after 200 periods, above this
  // criterion's tolerance, and per-period extrapolation is limited by edge
  // sampling jitter.
  double worst = 0.0;
  const double T = 2e-9;
  for (const TableRow& row : kRows) {
    Netlist nl = row_adder(row, LinearSwitchModel{});
    const double ref = oracles::reference_pss_average(nl, stimuli_for(row.duties), T, 10000);
    const double pss = periodic_steady_state(nl, stimuli_for(row.duties)).v_avg;
    worst = std::max(worst, std::abs(ref - pss));
  }
  CellGeometry g;
  g.r_out = 100e3;
  Netlist inv = build_inverter(g, 1e-12, 2.5, LinearSwitchModel{});
  for (double duty : {0.25, 0.5, 0.75}) {
    const double ref = oracles::reference_pss_average(inv, {spec_hz(500e6, duty)}, T, 10000);
    const double pss = periodic_steady_state(inv, {spec_hz(500e6, duty)}).v_avg;
    worst = std::max(worst, std::abs(ref - pss));
  }
  char detail[64];
  std::snprintf(detail, sizeof detail, "worst |dv|=%.2e V (<=%.1e)", worst, 1e-4 * 2.5);
  report(7, "analytic PSS matches the brute-force Euler oracle", worst <= 1e-4 * 2.5, detail);
}

void criterion_8_invariant_suites() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> duty(0.0, 1.0), volts(0.0, 2.5), scale(0.01, 100.0);
  std::uniform_int_distribution<int> weight(0, 7), which(0, 2);
  int violations = 0;
  SolverOptions opts;

  // boundedness of transient samples
  for (int i = 0; i < 1000; ++i) {
    CellGeometry g;
    g.r_out = 100e3;
    Netlist nl = build_inverter(g, 1e-12, 2.5, LinearSwitchModel{});
    SolverOptions o;
    o.v_init = volts(rng);
    for (const TraceSample& s : transient(nl, {spec_hz(500e6, duty(rng))}, 20e-9, o).samples)
      if (s.v_node < -o.ss_tol || s.v_node > 2.5 + o.ss_tol) ++violations;
  }

  // contraction of the one-period affine map
  for (int i = 0; i < 1000; ++i) {
    AdderConfig cfg;
    cfg.weights = {weight(rng), weight(rng), weight(rng)};
    Netlist nl = build_weighted_adder(cfg);
    const auto map =
        affine_period_map(nl, stimuli_for({duty(rng), duty(rng), duty(rng)}), 0.0, 2e-9);
    if (!(map.a > 0.0 && map.a < 1.0)) ++violations;
  }

  // charge balance over one period from the fixed point
  for (int i = 0; i < 1000; ++i) {
    AdderConfig cfg;
    cfg.weights = {weight(rng), weight(rng), weight(rng)};
    Netlist nl = build_weighted_adder(cfg);
    auto stimuli = stimuli_for({duty(rng), duty(rng), duty(rng)});
    const auto map = affine_period_map(nl, stimuli, 0.0, 2e-9);
    const double v_star = map.b / (1.0 - map.a);
    SolverOptions o;
    o.v_init = v_star;
    const auto trace = transient(nl, stimuli, 2e-9, o);
    if (nl.c_out * std::abs(trace.samples.back().v_node - v_star) > nl.c_out * o.ss_tol)
      ++violations;
  }

  // duty monotonicity of the adder average
  for (int i = 0; i < 1000; ++i) {
    AdderConfig cfg;
    cfg.weights = {weight(rng), weight(rng), weight(rng)};
    Netlist nl = build_weighted_adder(cfg);
    std::vector<double> duties{duty(rng) * 0.9, duty(rng) * 0.9, duty(rng) * 0.9};
    const double base = periodic_steady_state(nl, stimuli_for(duties), opts).v_avg;
    auto bumped = duties;
    bumped[which(rng)] += 0.05;
    const double more = periodic_steady_state(nl, stimuli_for(bumped), opts).v_avg;
    if (more < base - 1e-12) ++violations;
  }

  // perceptron decision invariant under joint positive scaling
  for (int i = 0; i < 1000; ++i) {
    const double v = volts(rng), th = volts(rng), k = scale(rng);
    if (perceptron_output(v, th) != perceptron_output(k * v, k * th)) ++violations;
  }

  char detail[64];
  std::snprintf(detail, sizeof detail, "%d violations in 5x1000 randomized cases", violations);
  report(8, "invariant suites hold", violations == 0, detail);
}

void criterion_9_full_experiment_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> names = {"duty_sweep",  "freq_sweep",  "vdd_sweep_abs",
                                          "vdd_sweep_rel", "adder_table", "power_sweep"};
  const std::vector<std::string> models = {"linear", "squarelaw"};
  bool identical = true;
  const auto base = std::filesystem::temp_directory_path() / "pwmperc_acceptance";
  std::filesystem::remove_all(base);
  for (const std::string& model : models) {
    for (const std::string& name : names) {
      ExperimentSpec spec;
      spec.name = name;
      apply_override(spec.params, "model.kind=" + model);
      spec.out_dir = (base / (model + "_run1")).string();
      run_experiment(spec);
      ExperimentSpec again = spec;
      again.out_dir = (base / (model + "_run2")).string();
      run_experiment(again);
      const auto file = name + ".csv";
      if (slurp(std::filesystem::path(spec.out_dir) / file) !=
          slurp(std::filesystem::path(again.out_dir) / file))
        identical = false;
    }
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char detail[96];
  std::snprintf(detail, sizeof detail, "%s CSVs, %.1f s for 2x12 experiment runs (<60 per run set)",
                identical ? "byte-identical" : "DIFFERING", s);
  report(9, "full experiment suite is fast and deterministic", identical && s / 2.0 < 60.0,
         detail);
}

}  // namespace

int main() {
  criterion_1_eq2_oracle();
  criterion_2_exact_average();
  criterion_3_square_law_deviation();
  criterion_4_frequency_elasticity();
  criterion_5_supply_elasticity();
  criterion_6_linearization_by_r_out();
  criterion_7_solver_oracle_equivalence();
  criterion_8_invariant_suites();
  criterion_9_full_experiment_suite();
  std::printf("%s (%d criterion(s) failed)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}

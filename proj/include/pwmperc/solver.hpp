#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pwmperc/errors.hpp"
#include "pwmperc/netlist.hpp"
#include "pwmperc/signal.hpp"

namespace pwmperc {

enum class SolverMode { analytic_linear, implicit_nonlinear };

struct SolverOptions {
  SolverMode mode = SolverMode::analytic_linear;
  double max_step = 0.0;     // nonlinear substep cap; 0 selects period/256
  double newton_tol = 1e-6;  // volts
  double ss_tol = 1e-6;      // period-to-period start-voltage change, volts
  int max_periods = 10000;
  double v_init = 0.0;
  double horizon = 0.0;  // long-run averaging window for incommensurate stimuli
};

struct TraceSample {
  double t = 0.0;
  double v_node = 0.0;
  double i_supply = 0.0;
};

struct TransientTrace {
  std::vector<TraceSample> samples;
};

struct SteadyStateResult {
  double v_avg = 0.0;
  double ripple_pp = 0.0;
  double avg_power = 0.0;
  int periods_to_converge = 0;
  double window = 0.0;
  bool converged = true;
};

namespace detail {

struct Segment {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<Branch> branches;  // one per cell
};

// Constant-level segments between consecutive PWM edges. Levels are sampled
// at the segment midpoint, which is unambiguous for nonzero-length segments.
inline std::vector<Segment> make_segments(const Netlist& nl, const std::vector<PwmSpec>& stimuli,
                                          double t_start, double t_end) {
  std::vector<double> bounds{t_start};
  for (const EdgeEvent& e : edge_schedule(stimuli, t_start, t_end))
    if (e.time > t_start && e.time != bounds.back()) bounds.push_back(e.time);
  bounds.push_back(t_end);

  std::vector<Segment> segs;
  segs.reserve(bounds.size() - 1);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    if (bounds[i + 1] <= bounds[i]) continue;
    Segment s{bounds[i], bounds[i + 1], {}};
    const double mid = 0.5 * (s.t0 + s.t1);
    s.branches.reserve(nl.cells.size());
    for (const CellInstance& c : nl.cells)
      s.branches.push_back(drive_state(c, level_at(stimuli[c.input_index], mid)));
    segs.push_back(std::move(s));
  }
  return segs;
}

struct LinearAggregate {
  double g_total = 0.0;
  double g_up = 0.0;  // pull-up side only
};

inline LinearAggregate linear_aggregate(const Netlist& nl, const std::vector<Branch>& branches) {
  LinearAggregate agg;
  for (std::size_t c = 0; c < nl.cells.size(); ++c) {
    const double g = branch_conductance(nl.model, nl.cells[c].geometry, nl.v_dd, 0.0, branches[c]);
    agg.g_total += g;
    if (branches[c] == Branch::pull_up) agg.g_up += g;
  }
  return agg;
}

// Total current into the node plus the supply current (pull-up side).
inline double node_current(const Netlist& nl, const std::vector<Branch>& branches, double v,
                           double* i_supply = nullptr) {
  double i_total = 0.0, i_up = 0.0;
  for (std::size_t c = 0; c < nl.cells.size(); ++c) {
    const double i = branch_current(nl.model, nl.cells[c].geometry, nl.v_dd, v, branches[c]);
    i_total += i;
    if (branches[c] == Branch::pull_up) i_up += i;
  }
  if (i_supply) *i_supply = i_up;
  return i_total;
}

inline double node_conductance(const Netlist& nl, const std::vector<Branch>& branches, double v) {
  double g = 0.0;
  for (std::size_t c = 0; c < nl.cells.size(); ++c)
    g += branch_conductance(nl.model, nl.cells[c].geometry, nl.v_dd, v, branches[c]);
  return g;
}

// One backward-Euler step C*(V1-V0) = dt*I(V1), Newton to tol. The residual
// is monotone increasing in V, so a sign bracket guards against limit cycles
// at the conduction kinks near the rails.
inline double implicit_step(const Netlist& nl, const std::vector<Branch>& branches, double v0,
                            double dt, double tol, double t_now) {
  double lo = std::min(v0, 0.0) - 1.0;
  double hi = std::max(v0, nl.v_dd) + 1.0;
  double v = v0;
  for (int it = 0; it < 100; ++it) {
    const double f = nl.c_out * (v - v0) - dt * node_current(nl, branches, v);
    (f > 0.0 ? hi : lo) = v;
    const double fp = nl.c_out + dt * node_conductance(nl, branches, v);
    double next = v - f / fp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double dv = next - v;
    v = next;
    if (std::abs(dv) <= tol || hi - lo <= tol) return v;
  }
  throw SolverError("backward Euler: Newton stalled", t_now, v);
}

struct PeriodAccum {
  double v_end = 0.0;
  double v_integral = 0.0;       // integral of V dt
  double supply_integral = 0.0;  // integral of i_supply dt
  double v_min = 0.0;
  double v_max = 0.0;
};

// Exact piecewise-exponential pass over one set of segments (linear model).
inline PeriodAccum linear_period(const Netlist& nl, const std::vector<Segment>& segs, double v0,
                                 TransientTrace* trace) {
  PeriodAccum acc;
  acc.v_min = acc.v_max = v0;
  double v = v0;
  for (const Segment& s : segs) {
    const LinearAggregate agg = linear_aggregate(nl, s.branches);
    const double len = s.t1 - s.t0;
    if (trace) trace->samples.push_back({s.t0, v, agg.g_up * (nl.v_dd - v)});
    double v_next, v_int;
    if (agg.g_total <= 0.0) {
      v_next = v;
      v_int = v * len;
    } else {
      const double v_tgt = agg.g_up * nl.v_dd / agg.g_total;
      const double tau = nl.c_out / agg.g_total;
      const double decay = std::exp(-len / tau);
      v_next = v_tgt + (v - v_tgt) * decay;
      v_int = v_tgt * len + (v - v_tgt) * tau * (1.0 - decay);
    }
    acc.v_integral += v_int;
    acc.supply_integral += agg.g_up * (nl.v_dd * len - v_int);
    v = v_next;
    acc.v_min = std::min(acc.v_min, v);
    acc.v_max = std::max(acc.v_max, v);
  }
  if (trace && !segs.empty())
    trace->samples.push_back(
        {segs.back().t1, v,
         linear_aggregate(nl, segs.back().branches).g_up * (nl.v_dd - v)});
  acc.v_end = v;
  return acc;
}

// Backward-Euler pass over one set of segments, substeps capped at max_step.
inline PeriodAccum implicit_period(const Netlist& nl, const std::vector<Segment>& segs, double v0,
                                   double max_step, double tol, TransientTrace* trace) {
  PeriodAccum acc;
  acc.v_min = acc.v_max = v0;
  double v = v0;
  for (const Segment& s : segs) {
    const double len = s.t1 - s.t0;
    const int nsub = std::max(1, static_cast<int>(std::ceil(len / max_step)));
    const double dt = len / nsub;
    double i_sup = 0.0;
    node_current(nl, s.branches, v, &i_sup);
    if (trace) trace->samples.push_back({s.t0, v, i_sup});
    for (int k = 0; k < nsub; ++k) {
      const double t_now = s.t0 + (k + 1) * dt;
      const double v_next = implicit_step(nl, s.branches, v, dt, tol, t_now);
      double i_sup_next = 0.0;
      node_current(nl, s.branches, v_next, &i_sup_next);
      acc.v_integral += 0.5 * (v + v_next) * dt;
      acc.supply_integral += 0.5 * (i_sup + i_sup_next) * dt;
      v = v_next;
      i_sup = i_sup_next;
      acc.v_min = std::min(acc.v_min, v);
      acc.v_max = std::max(acc.v_max, v);
      if (trace) trace->samples.push_back({t_now, v, i_sup});
    }
  }
  acc.v_end = v;
  return acc;
}

inline double default_max_step(const std::vector<PwmSpec>& stimuli, const SolverOptions& opts) {
  if (opts.max_step > 0.0) return opts.max_step;
  double min_period = std::numeric_limits<double>::infinity();
  for (const PwmSpec& s : stimuli) min_period = std::min(min_period, s.period_s());
  if (!std::isfinite(min_period)) min_period = 1.0;
  return min_period / 256.0;
}

}  // namespace detail

/// Coefficients of the one-period affine map V -> A*V + B (linear model only).
struct AffinePeriodMap {
  double a = 1.0;
  double b = 0.0;
};

inline AffinePeriodMap affine_period_map(const Netlist& nl, const std::vector<PwmSpec>& stimuli,
                                         double t_start, double period) {
  if (!is_linear(nl.model))
    throw std::invalid_argument("affine_period_map: linear device model required");
  AffinePeriodMap map;
  for (const auto& s : detail::make_segments(nl, stimuli, t_start, t_start + period)) {
    const auto agg = detail::linear_aggregate(nl, s.branches);
    const double len = s.t1 - s.t0;
    if (agg.g_total <= 0.0) continue;  // node floats, map unchanged
    const double v_tgt = agg.g_up * nl.v_dd / agg.g_total;
    const double decay = std::exp(-len * agg.g_total / nl.c_out);
    map.a *= decay;
    map.b = decay * map.b + v_tgt * (1.0 - decay);
  }
  return map;
}

/// Node-voltage trajectory over [0, t_end] by event-driven integration.
inline TransientTrace transient(const Netlist& nl, const std::vector<PwmSpec>& stimuli,
                                double t_end, const SolverOptions& opts = {}) {
  if (static_cast<int>(stimuli.size()) < nl.input_count())
    throw std::invalid_argument("transient: one stimulus per input required");
  if (!(t_end > 0.0)) throw std::invalid_argument("transient: t_end must be > 0");
  for (const PwmSpec& s : stimuli) s.validate();

  const auto segs = detail::make_segments(nl, stimuli, 0.0, t_end);
  TransientTrace trace;
  if (opts.mode == SolverMode::analytic_linear) {
    if (!is_linear(nl.model))
      throw std::invalid_argument("transient: analytic mode requires the linear model");
    detail::linear_period(nl, segs, opts.v_init, &trace);
  } else {
    detail::implicit_period(nl, segs, opts.v_init, detail::default_max_step(stimuli, opts),
                            opts.newton_tol, &trace);
  }
  return trace;
}

/// Periodic steady state of the node: time-averaged voltage, ripple and
/// supply power over one hyperperiod. Linear model: closed form via the
/// affine period map. Nonlinear: period iteration from v_init with secant
/// acceleration, settled when the start voltage moves less than ss_tol.
inline SteadyStateResult periodic_steady_state(const Netlist& nl,
                                               const std::vector<PwmSpec>& stimuli,
                                               const SolverOptions& opts = {}) {
  if (static_cast<int>(stimuli.size()) < nl.input_count())
    throw std::invalid_argument("periodic_steady_state: one stimulus per input required");
  for (const PwmSpec& s : stimuli) s.validate();

  const std::optional<double> hyper = hyperperiod(stimuli);
  const bool linear_path = (opts.mode == SolverMode::analytic_linear);
  if (linear_path && !is_linear(nl.model))
    throw std::invalid_argument("periodic_steady_state: analytic mode requires the linear model");

  SteadyStateResult res;
  if (!hyper) {
    if (!(opts.horizon > 0.0))
      throw std::invalid_argument(
          "periodic_steady_state: incommensurate stimuli need an explicit horizon");
    const auto segs = detail::make_segments(nl, stimuli, 0.0, opts.horizon);
    const auto acc =
        linear_path
            ? detail::linear_period(nl, segs, opts.v_init, nullptr)
            : detail::implicit_period(nl, segs, opts.v_init,
                                      detail::default_max_step(stimuli, opts), opts.newton_tol,
                                      nullptr);
    res.v_avg = acc.v_integral / opts.horizon;
    res.ripple_pp = acc.v_max - acc.v_min;
    res.avg_power = nl.v_dd * acc.supply_integral / opts.horizon;
    res.window = opts.horizon;
    return res;
  }

  const double T = *hyper;
  const auto segs = detail::make_segments(nl, stimuli, 0.0, T);

  if (linear_path) {
    AffinePeriodMap map;
    for (const auto& s : segs) {
      const auto agg = detail::linear_aggregate(nl, s.branches);
      if (agg.g_total <= 0.0) continue;
      const double v_tgt = agg.g_up * nl.v_dd / agg.g_total;
      const double decay = std::exp(-(s.t1 - s.t0) * agg.g_total / nl.c_out);
      map.a *= decay;
      map.b = decay * map.b + v_tgt * (1.0 - decay);
    }
    const double v_star = (map.a < 1.0) ? map.b / (1.0 - map.a) : opts.v_init;
    const auto acc = detail::linear_period(nl, segs, v_star, nullptr);
    res.v_avg = acc.v_integral / T;
    res.ripple_pp = acc.v_max - acc.v_min;
    res.avg_power = nl.v_dd * acc.supply_integral / T;
    res.window = T;
    return res;
  }

  const double max_step = detail::default_max_step(stimuli, opts);
  double v_prev = opts.v_init;
  double v_before = v_prev;
  int periods = 0;
  detail::PeriodAccum acc;
  bool settled = false;
  while (periods < opts.max_periods) {
    acc = detail::implicit_period(nl, segs, v_prev, max_step, opts.newton_tol, nullptr);
    ++periods;
    const double delta = acc.v_end - v_prev;
    if (std::abs(delta) < opts.ss_tol) {
      settled = true;
      break;
    }
    const double delta_prev = v_prev - v_before;
    v_before = v_prev;
    // Secant jump toward the fixed point of the (near-affine) period map,
    // clamped into the rail range where the fixed point must lie.
    if (periods >= 2 && delta_prev != 0.0) {
      const double a_est = delta / delta_prev;
      if (a_est > 0.0 && a_est < 1.0) {
        v_prev = std::clamp(acc.v_end + delta * a_est / (1.0 - a_est), 0.0, nl.v_dd);
        continue;
      }
    }
    v_prev = acc.v_end;
  }
  // Measure over one final period from the settled start voltage.
  const double v_start = settled ? acc.v_end : v_prev;
  acc = detail::implicit_period(nl, segs, v_start, max_step, opts.newton_tol, nullptr);
  res.v_avg = acc.v_integral / T;
  res.ripple_pp = acc.v_max - acc.v_min;
  res.avg_power = nl.v_dd * acc.supply_integral / T;
  res.periods_to_converge = periods;
  res.window = T;
  res.converged = settled;
  return res;
}

/// Fixed-step explicit Euler with no event logic; brute-force oracle for the
/// event-driven paths. Test use only.
inline TransientTrace reference_integrator(const Netlist& nl, const std::vector<PwmSpec>& stimuli,
                                           double t_end, double dt, double v_init = 0.0) {
  if (!(dt > 0.0)) throw std::invalid_argument("reference_integrator: dt must be > 0");
  TransientTrace trace;
  const auto n_steps = static_cast<std::size_t>(std::llround(t_end / dt));
  trace.samples.reserve(n_steps + 1);
  std::vector<Branch> branches(nl.cells.size());
  double v = v_init;
  for (std::size_t step = 0; step <= n_steps; ++step) {
    const double t = step * dt;
    for (std::size_t c = 0; c < nl.cells.size(); ++c)
      branches[c] = drive_state(nl.cells[c], level_at(stimuli[nl.cells[c].input_index], t));
    double i_sup = 0.0;
    const double i_total = detail::node_current(nl, branches, v, &i_sup);
    trace.samples.push_back({t, v, i_sup});
    v += dt * i_total / nl.c_out;
  }
  return trace;
}

/// CSV export of a trace: `t_s,v_node_V,i_supply_A`.
template <typename Stream>
void write_trace_csv(const TransientTrace& trace, Stream& out) {
  out << "t_s,v_node_V,i_supply_A\n";
  char buf[128];
  for (const TraceSample& s : trace.samples) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", s.t, s.v_node, s.i_supply);
    out << buf;
  }
}

}  // namespace pwmperc

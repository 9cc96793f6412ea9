#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "pwmperc/errors.hpp"

namespace pwmperc {

enum class Branch { pull_up, pull_down };

/// Sizing of one cell: binary-weighted width multiplier plus the per-cell
/// series output resistor. Physical widths/length are bookkeeping only.
struct CellGeometry {
  int width_multiplier = 1;
  double r_out = 100e3;          // ohms, already divided per weight bit
  double base_n_width = 320e-9;  // meters
  double base_p_width = 865e-9;
  double channel_length = 1.2e-6;

  void validate() const {
    if (width_multiplier < 1) throw std::invalid_argument("CellGeometry: multiplier < 1");
    if (r_out < 0.0) throw std::invalid_argument("CellGeometry: r_out < 0");
    if (base_n_width <= 0 || base_p_width <= 0 || channel_length <= 0)
      throw std::invalid_argument("CellGeometry: nonpositive dimension");
  }
};

/// Ideal switched resistor: the conducting transistor is a fixed on-resistance
/// scaled down by the width multiplier.
struct LinearSwitchModel {
  double r_on_n = 10e3;  // X1 pull-down
  double r_on_p = 10e3;  // X1 pull-up
};

/// Square-law transistor: triode below Vov, constant-current saturation above.
/// kp is process gain times the X1 W/L.
struct SquareLawModel {
  double vth_n = 0.45;
  double vth_p = 0.45;
  double kp_n = 100e-6;  // A/V^2
  double kp_p = 40e-6;
};

using DeviceModel = std::variant<LinearSwitchModel, SquareLawModel>;

inline bool is_linear(const DeviceModel& m) {
  return std::holds_alternative<LinearSwitchModel>(m);
}

namespace detail {

inline double square_law_current(double k, double v_ov, double v_ds) {
  if (v_ds <= 0.0 || v_ov <= 0.0) return 0.0;
  if (v_ds >= v_ov) return 0.5 * k * v_ov * v_ov;
  return k * (v_ov * v_ds - 0.5 * v_ds * v_ds);
}

// Solve I = f(v_ds) with f monotone and v_ds = headroom - I*r_out.
// Newton on v_ds with bisection safeguard; converges to |dI| <= 1 pA.
inline double series_stack_current(double k, double v_ov, double r_out, double headroom,
                                   double t_hint, double v_hint) {
  if (headroom <= 0.0 || v_ov <= 0.0) return 0.0;
  double lo = 0.0, hi = headroom;
  auto g = [&](double v_ds) {
    return square_law_current(k, v_ov, v_ds) * r_out + v_ds - headroom;
  };
  if (g(lo) > 0.0 || g(hi) < 0.0)
    throw SolverError("square-law branch: root bracket failure", t_hint, v_hint);
  double v_ds = std::min(headroom, v_ov > 0 ? headroom / (1.0 + k * v_ov * r_out) : headroom);
  double i_prev = square_law_current(k, v_ov, v_ds);
  for (int it = 0; it < 200; ++it) {
    const double gv = g(v_ds);
    (gv > 0.0 ? hi : lo) = v_ds;
    const double di_dv = (v_ds < v_ov) ? k * (v_ov - v_ds) : 0.0;
    const double slope = di_dv * r_out + 1.0;
    double next = v_ds - gv / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    v_ds = next;
    const double i_now = square_law_current(k, v_ov, v_ds);
    if (std::abs(i_now - i_prev) <= 1e-12) return i_now;
    i_prev = i_now;
  }
  throw SolverError("square-law branch: no convergence", t_hint, v_hint);
}

}  // namespace detail

/// Current into the shared node from one active branch. Positive for pull-up,
/// negative for pull-down. `rail` is the cell supply (also the ideal gate
/// drive for the square-law model).
inline double branch_current(const DeviceModel& model, const CellGeometry& geom, double rail,
                             double v_node, Branch branch) {
  const double mult = static_cast<double>(geom.width_multiplier);
  if (const auto* lin = std::get_if<LinearSwitchModel>(&model)) {
    const double r_on = (branch == Branch::pull_up) ? lin->r_on_p : lin->r_on_n;
    const double target = (branch == Branch::pull_up) ? rail : 0.0;
    return (target - v_node) / (r_on / mult + geom.r_out);
  }
  const auto& sq = std::get<SquareLawModel>(model);
  if (branch == Branch::pull_up) {
    const double headroom = rail - v_node;
    return detail::series_stack_current(sq.kp_p * mult, rail - sq.vth_p, geom.r_out, headroom,
                                        0.0, v_node);
  }
  const double headroom = v_node;
  return -detail::series_stack_current(sq.kp_n * mult, rail - sq.vth_n, geom.r_out, headroom,
                                       0.0, v_node);
}

/// Magnitude of dI/dV at the node. Exact constant for the linear model,
/// central difference with a 1 mV step for the square-law model.
inline double branch_conductance(const DeviceModel& model, const CellGeometry& geom, double rail,
                                 double v_node, Branch branch) {
  if (const auto* lin = std::get_if<LinearSwitchModel>(&model)) {
    const double r_on = (branch == Branch::pull_up) ? lin->r_on_p : lin->r_on_n;
    return 1.0 / (r_on / static_cast<double>(geom.width_multiplier) + geom.r_out);
  }
  const double h = 1e-3;
  const double ip = branch_current(model, geom, rail, v_node + h, branch);
  const double im = branch_current(model, geom, rail, v_node - h, branch);
  return std::abs(ip - im) / (2.0 * h);
}

}  // namespace pwmperc

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pwmperc/netlist.hpp"
#include "pwmperc/solver.hpp"

namespace pwmperc {

struct PredictionReport {
  double v_theoretical = 0.0;
  double v_simulated = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;  // referenced to full scale (v_dd)
};

/// Closed-form weighted-adder output: v_dd * sum(DC_i * W_i) / (k * (2^n - 1)).
inline double eq2_prediction(const std::vector<double>& duties, const std::vector<int>& weights,
                             int k, int n, double v_dd) {
  if (static_cast<int>(duties.size()) != k || static_cast<int>(weights.size()) != k)
    throw std::invalid_argument("eq2_prediction: need k duties and k weights");
  if (n < 1) throw std::invalid_argument("eq2_prediction: n must be >= 1");
  const int w_max = (1 << n) - 1;
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    if (duties[i] < 0.0 || duties[i] > 1.0)
      throw std::invalid_argument("eq2_prediction: duty outside [0,1]");
    if (weights[i] < 0 || weights[i] > w_max)
      throw std::invalid_argument("eq2_prediction: weight out of range");
    acc += duties[i] * weights[i];
  }
  return v_dd * acc / (static_cast<double>(k) * w_max);
}

/// Duty-weighted conductance-divider prediction of the PSS average. For each
/// cell, alpha is the fraction of time it drives high; the average sits where
/// the time-averaged pull-up and pull-down conductances balance. Reduces to
/// eq2_prediction for the symmetric gated adder. Linear model only.
inline double divider_prediction(const Netlist& nl, const std::vector<double>& duties) {
  const auto* lin = std::get_if<LinearSwitchModel>(&nl.model);
  if (!lin)
    throw std::invalid_argument("divider_prediction: no closed form for the nonlinear model");
  double num = 0.0, den = 0.0;
  for (const CellInstance& c : nl.cells) {
    const double duty = duties.at(c.input_index);
    const double alpha =
        (c.kind == CellKind::inverter) ? 1.0 - duty : duty * c.weight_bit;
    const double mult = static_cast<double>(c.geometry.width_multiplier);
    const double g_up = 1.0 / (lin->r_on_p / mult + c.geometry.r_out);
    const double g_dn = 1.0 / (lin->r_on_n / mult + c.geometry.r_out);
    num += alpha * g_up;
    den += alpha * g_up + (1.0 - alpha) * g_dn;
  }
  if (den <= 0.0) return 0.0;
  return nl.v_dd * num / den;
}

inline PredictionReport measure(double v_theoretical, double v_simulated, double v_dd) {
  PredictionReport r;
  r.v_theoretical = v_theoretical;
  r.v_simulated = v_simulated;
  r.abs_error = std::abs(v_theoretical - v_simulated);
  r.rel_error = v_dd > 0.0 ? r.abs_error / v_dd : 0.0;
  return r;
}

inline double average_power(const SteadyStateResult& pss) {
  if (!pss.converged)
    throw std::invalid_argument("average_power: steady state did not converge");
  return pss.avg_power;
}

/// Threshold decision of Eq-style perceptron: 1 iff the averaged output
/// exceeds the threshold strictly.
inline int perceptron_output(double v_avg, double v_threshold) {
  return v_avg > v_threshold ? 1 : 0;
}

/// Electrical threshold realizing a dot-product bias b under the adder's
/// output scaling: compare against v_dd * (-b) / (k * (2^n - 1)).
inline double threshold_from_bias(double bias, int k, int n, double v_dd) {
  return v_dd * (-bias) / (static_cast<double>(k) * ((1 << n) - 1));
}

}  // namespace pwmperc

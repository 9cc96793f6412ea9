#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwmperc/device.hpp"
#include "pwmperc/signal.hpp"

namespace pwmperc {

enum class CellKind { inverter, gated };

struct CellInstance {
  CellKind kind = CellKind::inverter;
  int input_index = 0;
  int bit_index = 0;  // 0 = LSB
  CellGeometry geometry;
  int weight_bit = 1;  // gated cells only
};

/// A set of driver cells sharing one output node with a capacitor to ground.
struct Netlist {
  std::vector<CellInstance> cells;
  double c_out = 1e-12;
  double v_dd = 2.5;
  DeviceModel model = LinearSwitchModel{};
  int transistor_count = 0;  // 6 per gated cell, 2 per inverter

  int input_count() const {
    int n = 0;
    for (const auto& c : cells) n = std::max(n, c.input_index + 1);
    return n;
  }

  std::string summary() const {
    std::ostringstream os;
    os << "cell  kind      input  bit  mult  r_out_ohm  weight_bit\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      os << i << "     " << (c.kind == CellKind::inverter ? "inverter" : "gated   ") << "  "
         << c.input_index << "      " << c.bit_index << "    " << c.geometry.width_multiplier
         << "     " << c.geometry.r_out << "      "
         << (c.kind == CellKind::gated ? std::to_string(c.weight_bit) : "-") << "\n";
    }
    os << "c_out=" << c_out << " F, v_dd=" << v_dd << " V, transistors=" << transistor_count
       << "\n";
    return os.str();
  }
};

/// k-input, n-bit weighted adder configuration.
struct AdderConfig {
  int k = 3;
  int n = 3;
  std::vector<int> weights = {7, 7, 7};
  double v_dd = 2.5;
  double c_out = 10e-12;
  double r_out_base = 100e3;
  DeviceModel model = LinearSwitchModel{};

  void validate() const {
    if (k < 1 || n < 1) throw std::invalid_argument("AdderConfig: k and n must be >= 1");
    if (static_cast<int>(weights.size()) != k)
      throw std::invalid_argument("AdderConfig: need one weight per input");
    const int w_max = (1 << n) - 1;
    for (int w : weights)
      if (w < 0 || w > w_max)
        throw std::invalid_argument("AdderConfig: weight " + std::to_string(w) +
                                    " outside [0," + std::to_string(w_max) + "]");
    if (c_out <= 0.0) throw std::invalid_argument("AdderConfig: c_out must be > 0");
  }
};

inline Netlist build_inverter(const CellGeometry& geometry, double c_out, double v_dd,
                              DeviceModel model = LinearSwitchModel{}) {
  geometry.validate();
  Netlist nl;
  nl.cells.push_back({CellKind::inverter, 0, 0, geometry, 1});
  nl.c_out = c_out;
  nl.v_dd = v_dd;
  nl.model = model;
  nl.transistor_count = 2;
  return nl;
}

inline Netlist build_weighted_adder(const AdderConfig& config) {
  config.validate();
  Netlist nl;
  nl.c_out = config.c_out;
  nl.v_dd = config.v_dd;
  nl.model = config.model;
  for (int i = 0; i < config.k; ++i) {
    for (int j = 0; j < config.n; ++j) {
      CellGeometry g;
      g.width_multiplier = 1 << j;
      g.r_out = config.r_out_base / static_cast<double>(1 << j);
      CellInstance cell{CellKind::gated, i, j, g, (config.weights[i] >> j) & 1};
      nl.cells.push_back(cell);
    }
  }
  nl.transistor_count = 6 * config.k * config.n;
  return nl;
}

/// Which branch the cell drives for a given input level. A gated cell with a
/// cleared weight bit (or a low input) actively pulls the node low.
inline Branch drive_state(const CellInstance& cell, Level input_level) {
  if (cell.kind == CellKind::inverter)
    return input_level == Level::low ? Branch::pull_up : Branch::pull_down;
  return (input_level == Level::high && cell.weight_bit == 1) ? Branch::pull_up
                                                              : Branch::pull_down;
}

}  // namespace pwmperc

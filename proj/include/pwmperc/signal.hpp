#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pwmperc/rational.hpp"

namespace pwmperc {

enum class Level { low, high };

/// One periodic rail-to-rail PWM stimulus.
///
/// Convention: the high interval opens each period, i.e. the signal rises at
/// phase 0 and falls after `duty_cycle` of the period.
struct PwmSpec {
  Rational frequency{500'000'000, 1};  // Hz, exact rational
  double duty_cycle = 0.5;             // fraction in [0,1]
  double phase = 0.0;                  // fraction of period in [0,1)
  double v_high = 2.5;
  double v_low = 0.0;
  bool irrational = false;  // flags a stimulus whose period is not commensurate
                            // with any rational grid; forces long-run averaging

  void validate() const {
    if (frequency.num <= 0) throw std::invalid_argument("PwmSpec: frequency must be > 0");
    if (duty_cycle < 0.0 || duty_cycle > 1.0)
      throw std::invalid_argument("PwmSpec: duty cycle outside [0,1]");
    if (phase < 0.0 || phase >= 1.0) throw std::invalid_argument("PwmSpec: phase outside [0,1)");
    if (v_high < v_low) throw std::invalid_argument("PwmSpec: v_high < v_low");
  }

  double frequency_hz() const { return frequency.value(); }
  double period_s() const { return frequency.inverse().value(); }
};

struct EdgeEvent {
  double time = 0.0;   // seconds
  int input_index = 0;
  Level new_level = Level::low;
};

/// Instantaneous level of the stimulus at time t.
inline Level level_at(const PwmSpec& spec, double t) {
  if (spec.duty_cycle <= 0.0) return Level::low;
  if (spec.duty_cycle >= 1.0) return Level::high;
  double pos = std::fmod(t * spec.frequency_hz() + spec.phase, 1.0);
  if (pos < 0.0) pos += 1.0;
  return pos < spec.duty_cycle ? Level::high : Level::low;
}

/// All level transitions of all stimuli in [t_start, t_end), sorted by time.
/// Edges of distinct inputs that land on the same instant (within a relative
/// tolerance of the shortest period) are snapped to one shared timestamp.
inline std::vector<EdgeEvent> edge_schedule(const std::vector<PwmSpec>& specs,
                                            double t_start, double t_end) {
  if (!(t_start < t_end)) throw std::invalid_argument("edge_schedule: empty window");

  std::vector<EdgeEvent> events;
  double min_period = t_end - t_start;
  for (int i = 0; i < static_cast<int>(specs.size()); ++i) {
    const PwmSpec& s = specs[i];
    if (s.duty_cycle <= 0.0 || s.duty_cycle >= 1.0) continue;  // no transitions
    const double T = s.period_s();
    min_period = std::min(min_period, T);
    // Rising edge k at (k - phase)*T, falling edge k at (k - phase + duty)*T.
    const std::int64_t k_lo =
        static_cast<std::int64_t>(std::floor(t_start / T + s.phase)) - 1;
    const std::int64_t k_hi = static_cast<std::int64_t>(std::ceil(t_end / T + s.phase)) + 1;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
      const double rise = (static_cast<double>(k) - s.phase) * T;
      const double fall = rise + s.duty_cycle * T;
      if (rise >= t_start && rise < t_end) events.push_back({rise, i, Level::high});
      if (fall >= t_start && fall < t_end) events.push_back({fall, i, Level::low});
    }
  }

  std::sort(events.begin(), events.end(), [](const EdgeEvent& a, const EdgeEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.input_index < b.input_index;
  });

  // Snap near-coincident timestamps onto the earliest representative.
  const double eps = min_period * 1e-9;
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].time - events[i - 1].time <= eps) events[i].time = events[i - 1].time;
  }
  return events;
}

/// Least common period of the stimuli, or nullopt when incommensurate
/// (flagged irrational or integer overflow in the exact lcm).
inline std::optional<double> hyperperiod(const std::vector<PwmSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("hyperperiod: empty stimulus list");
  Rational acc{0, 1};
  for (const PwmSpec& s : specs) {
    if (s.irrational) return std::nullopt;
    auto next = rational_lcm(acc, s.frequency.inverse());
    if (!next) return std::nullopt;
    acc = *next;
  }
  return acc.value();
}

/// Quantize a real input in [0,1] onto q levels; round to nearest, ties away
/// from zero. Monotone nondecreasing in x.
inline double encode_input(double x, int q) {
  if (q < 2) throw std::invalid_argument("encode_input: need at least 2 levels");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("encode_input: x outside [0,1]");
  return std::round(x * (q - 1)) / (q - 1);
}

}  // namespace pwmperc

#pragma once

#include <stdexcept>
#include <string>

namespace pwmperc {

// Raised for malformed configuration input (unknown key, bad value, range).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised for numerical failures in the solver (Newton or bracket breakdown).
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& msg, double time_s, double v_node)
      : std::runtime_error(msg), time_s(time_s), v_node(v_node) {}

  double time_s;
  double v_node;
};

}  // namespace pwmperc

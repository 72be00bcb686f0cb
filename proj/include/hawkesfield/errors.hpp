#pragma once

#include <stdexcept>
#include <string>

namespace hawkesfield {

// Config and schema violations. `path` is a JSON pointer-like location
// ("/model/firing_rate/slope") when the error comes from a config file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg, std::string path = {})
      : std::runtime_error(path.empty() ? msg : path + ": " + msg),
        path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Mismatched grids, empty supports, wrong dimensions.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical procedure on valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dominating rate overflowed or crossed the guard; `time` is the simulated
// time reached when the guard fired.
class ExplosionError : public NumericalError {
 public:
  ExplosionError(double time, double rate)
      : NumericalError("simulation exploded at t=" + std::to_string(time) +
                       " (dominating rate " + std::to_string(rate) + ")"),
        time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(int iterations, double residual)
      : NumericalError("fixed point not reached after " +
                       std::to_string(iterations) +
                       " iterations (last residual " +
                       std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Grid too coarse for the requested quantization step.
class ResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hawkesfield

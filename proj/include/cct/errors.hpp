#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cct {

// Base for every error the toolkit raises; name() is the stable identifier
// printed by the CLI on failure.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::vector<std::string>& violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// A backward coefficient integration exceeded the blow-up threshold.
class EscapeDetected : public Error {
 public:
  explicit EscapeDetected(double t)
      : Error("EscapeDetected", "coefficient blow-up detected at t = " + std::to_string(t)),
        t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class NoRealEquilibrium : public Error {
 public:
  NoRealEquilibrium()
      : Error("NoRealEquilibrium", "algebraic Riccati equation has no real equilibrium") {}
};

class HorizonInfeasible : public Error {
 public:
  HorizonInfeasible(double horizon, double escape_time)
      : Error("HorizonInfeasible", "horizon T = " + std::to_string(horizon) +
                                       " is not below the escape time " +
                                       std::to_string(escape_time)),
        escape_time_(escape_time) {}
  double escape_time() const noexcept { return escape_time_; }

 private:
  double escape_time_;
};

class InfeasibleMarginals : public Error {
 public:
  explicit InfeasibleMarginals(const std::string& what) : Error("InfeasibleMarginals", what) {}
};

class MaxIterExceeded : public Error {
 public:
  MaxIterExceeded(std::vector<double> best_g, double best_residual)
      : Error("MaxIterExceeded", "semi-discrete dual ascent did not reach its tolerance (residual " +
                                     std::to_string(best_residual) + ")"),
        best_g_(std::move(best_g)),
        best_residual_(best_residual) {}
  const std::vector<double>& best_weights() const noexcept { return best_g_; }
  double best_residual() const noexcept { return best_residual_; }

 private:
  std::vector<double> best_g_;
  double best_residual_;
};

class MaxOuterExceeded : public Error {
 public:
  MaxOuterExceeded(std::vector<double> best_p, double best_j)
      : Error("MaxOuterExceeded", "projected subgradient loop hit its iteration cap"),
        best_p_(std::move(best_p)),
        best_j_(best_j) {}
  const std::vector<double>& best_point() const noexcept { return best_p_; }
  double best_value() const noexcept { return best_j_; }

 private:
  std::vector<double> best_p_;
  double best_j_;
};

class CapExceeded : public Error {
 public:
  CapExceeded(double count, double cap)
      : Error("CapExceeded", "enumeration size " + std::to_string(count) + " exceeds cap " +
                                 std::to_string(cap)),
        count_(count) {}
  double count() const noexcept { return count_; }

 private:
  double count_;
};

class UnsupportedDimension : public Error {
 public:
  explicit UnsupportedDimension(const std::string& what) : Error("UnsupportedDimension", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

}  // namespace cct

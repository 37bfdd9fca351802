#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nlci {

// Invalid argument or configuration value (bad k, beta <= 2, zero h_i, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Eigen-solver or quadrature failure.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sigma is not stable (spectral abscissa >= 0); the asymptotic covariance
// integral does not exist.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, double abscissa)
      : std::runtime_error(what), abscissa_(abscissa) {}
  double abscissa() const noexcept { return abscissa_; }

 private:
  double abscissa_;
};

// Identity-type nonlinearity combined with an infinite-variance density.
class DivergentVarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A nonlinearity / density pair violates the standing assumptions
// (e.g. phi'(0) <= 0).
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every problem found while reading a config file, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> items)
      : std::runtime_error(join(items)), items_(std::move(items)) {}
  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration:";
    for (const auto& item : items) out += "\n  - " + item;
    return out;
  }
  std::vector<std::string> items_;
};

}  // namespace nlci

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace seli {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown by validate(); carries every violated invariant, not just the first.
struct InvalidConfig : Error {
  std::vector<std::string> violations;

  explicit InvalidConfig(std::vector<std::string> v)
      : Error(format(v)), violations(std::move(v)) {}

 private:
  static std::string format(const std::vector<std::string>& v) {
    std::ostringstream os;
    os << "invalid configuration (" << v.size() << " violation"
       << (v.size() == 1 ? "" : "s") << "):";
    for (const auto& s : v) os << "\n  - " << s;
    return os.str();
  }
};

struct IntegrationDiverged : Error {
  explicit IntegrationDiverged(const std::string& m) : Error(m) {}
};

struct DegenerateQuadratic : Error {
  explicit DegenerateQuadratic(const std::string& m) : Error(m) {}
};

struct StepTooLarge : Error {
  explicit StepTooLarge(const std::string& m) : Error(m) {}
};

struct GridMismatch : Error {
  explicit GridMismatch(const std::string& m) : Error(m) {}
};

struct InvalidPopulation : Error {
  explicit InvalidPopulation(const std::string& m) : Error(m) {}
};

struct ParseError : Error {
  int line;
  ParseError(int line_, const std::string& m)
      : Error("parse error at line " + std::to_string(line_) + ": " + m),
        line(line_) {}
};

/// Calibration finished but the best fit is worse than the per-class error
/// budget. Carries the best point found so callers can proceed with it.
struct CalibrationFailed : Error {
  double best_nu;
  std::vector<double> per_class_error;
  CalibrationFailed(double nu, std::vector<double> errors, const std::string& m)
      : Error(m), best_nu(nu), per_class_error(std::move(errors)) {}
};

}  // namespace seli

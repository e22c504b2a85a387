#pragma once

// One-dimensional calibration of the shared curing rate against baseline
// infected-fraction targets.

#include <cmath>
#include <sstream>
#include <vector>

#include "seli/errors.hpp"
#include "seli/model.hpp"
#include "seli/solver.hpp"

namespace seli {

struct CalibrationResult {
  double nu = 0.0;
  std::vector<double> per_class_error;  ///< baseline m_I(T) minus target
  double sse = 0.0;
};

namespace detail {

inline ScenarioConfig with_shared_nu(ScenarioConfig config, double nu) {
  for (NodeClassParams& c : config.network.classes) c.nu = nu;
  return config;
}

inline std::vector<double> baseline_infected_at_horizon(
    const ScenarioConfig& config) {
  const ControlPolicy ones =
      ControlPolicy::constant(config.grid, config.network.n_classes(), 1.0);
  ForwardResult fwd = integrate_forward(ones, config.network, config.grid);
  std::vector<double> infected(config.network.n_classes());
  for (std::size_t c = 0; c < infected.size(); ++c)
    infected[c] = fwd.trajectory.states[config.grid.n_steps][c][3];
  return infected;
}

}  // namespace detail

/// Finds the single curing rate, shared across classes, that minimizes the
/// sum of squared gaps between the baseline infected fractions at the horizon
/// and the supplied targets. Golden-section search over (0, 5]; throws
/// CalibrationFailed (carrying the best point) when any per-class error
/// exceeds 0.1 in absolute value.
inline CalibrationResult calibrate_nu(const ScenarioConfig& config,
                                      const std::vector<double>& targets) {
  if (targets.size() != config.network.n_classes())
    throw InvalidConfig({"calibrate_nu: target count " +
                         std::to_string(targets.size()) +
                         " does not match class count " +
                         std::to_string(config.network.n_classes())});
  for (double t : targets)
    if (!(t > 0.0 && t < 1.0))
      throw InvalidConfig({"calibrate_nu: targets must lie in (0,1)"});

  auto objective = [&](double nu) {
    const std::vector<double> infected =
        detail::baseline_infected_at_horizon(detail::with_shared_nu(config, nu));
    double sse = 0.0;
    for (std::size_t c = 0; c < infected.size(); ++c) {
      const double gap = infected[c] - targets[c];
      sse += gap * gap;
    }
    return sse;
  };

  constexpr double inv_phi = 0.6180339887498949;
  double lo = 1e-6, hi = 5.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = objective(a), fb = objective(b);
  while (hi - lo > 1e-5) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = objective(b);
    }
  }

  CalibrationResult result;
  result.nu = 0.5 * (lo + hi);
  result.sse = objective(result.nu);
  const std::vector<double> infected = detail::baseline_infected_at_horizon(
      detail::with_shared_nu(config, result.nu));
  for (std::size_t c = 0; c < infected.size(); ++c)
    result.per_class_error.push_back(infected[c] - targets[c]);

  for (double err : result.per_class_error)
    if (std::abs(err) > 0.1) {
      std::ostringstream os;
      os << "calibration residual exceeds 0.1: best nu=" << result.nu;
      throw CalibrationFailed(result.nu, result.per_class_error, os.str());
    }
  return result;
}

}  // namespace seli

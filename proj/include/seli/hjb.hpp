#pragma once

// Backward integration of the Hamilton-Jacobi value equations and the
// closed-form best-response map.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "seli/dynamics.hpp"
#include "seli/errors.hpp"
#include "seli/model.hpp"
#include "seli/paths.hpp"
#include "seli/qoi.hpp"

namespace seli {

/// Below this |a1| the susceptible-state Hamiltonian is linear in alpha and
/// the quadratic minimizer is ill-conditioned.
inline constexpr double kDegenerateA1 = 1e-8;

/// Bang-bang minimizer of the alpha-linear Hamiltonian remainder, used when
/// the quadratic term vanishes. Ties resolve to 0, the infection-averse side.
inline double linear_best_response(const ValueVec& u, const NodeClassParams& c,
                                   double theta) {
  const double R = infection_pressure(c, theta);
  const double L = clean_probability(c, theta);
  const double uS = u[0], uE = u[1], uL = u[2], uI = u[3];
  const double slope = R * (uI - uS) - R * (uE - uS) - L * (uL - uS);
  return slope >= 0.0 ? 0.0 : 1.0;
}

/// Closed-form minimizer of the susceptible-state Hamiltonian over [0,1].
/// Throws DegenerateQuadratic when |a1| < kDegenerateA1; callers fall back to
/// linear_best_response.
inline double best_response(const ValueVec& u, const NodeClassParams& c,
                            double theta, double eta) {
  const QoiCoefficients q = expected_qoi_coefficients(c, theta, eta);
  if (std::abs(q.a1) < kDegenerateA1) {
    std::ostringstream os;
    os << "quadratic coefficient a1 = " << q.a1 << " below " << kDegenerateA1;
    throw DegenerateQuadratic(os.str());
  }
  const double R = infection_pressure(c, theta);
  const double L = clean_probability(c, theta);
  const double uS = u[0], uE = u[1], uL = u[2], uI = u[3];
  const double g = (R * (uE - uS) + L * (uL - uS) - R * (uI - uS) +
                    2.0 * q.a1 * (c.effective_target() - q.a2)) /
                   (2.0 * q.a1 * q.a1);
  return std::clamp(g, 0.0, 1.0);
}

/// best_response with the degenerate fallback resolved internally.
inline double resolved_best_response(const ValueVec& u, const NodeClassParams& c,
                                     double theta, double eta) {
  const QoiCoefficients q = expected_qoi_coefficients(c, theta, eta);
  if (std::abs(q.a1) < kDegenerateA1) return linear_best_response(u, c, theta);
  return best_response(u, c, theta, eta);
}

struct HamiltonianResult {
  double value = 0.0;
  double alpha = 0.0;  ///< minimizing control; 0 for states without actions
};

/// Minimized running cost plus rate-weighted value differences at one state.
/// Only S has a nonempty action set.
inline HamiltonianResult hamiltonian(State state, const ValueVec& u,
                                     const NodeClassParams& c, double theta,
                                     double eta) {
  const double uS = u[0], uE = u[1], uL = u[2], uI = u[3];
  const double exit_rate = 1.0 - c.delta;
  switch (state) {
    case State::S: {
      const double a = resolved_best_response(u, c, theta, eta);
      const double R = infection_pressure(c, theta);
      const double L = clean_probability(c, theta);
      const double value = running_cost(State::S, a, c, theta, eta) +
                           (1.0 - a) * R * (uE - uS) +
                           (1.0 - a) * L * (uL - uS) + a * R * (uI - uS);
      return {value, a};
    }
    case State::E:
      return {exit_rate * c.beta_E * (uI - uE) + exit_rate * c.gamma_E * (uS - uE),
              0.0};
    case State::L:
      return {exit_rate * (uS - uL), 0.0};
    case State::I:
      return {c.infection_cost + c.nu * (uS - uI), 0.0};
  }
  return {};
}

struct BackwardResult {
  ValueTrajectory values;
  ControlPolicy policy;
};

/// Integrates -du/dt = h(...) from u(T) = 0 down to t = 0 with RK4 on the
/// reversed time axis. Aggregates are interpolated linearly between grid
/// points; the recorded policy is the Hamiltonian minimizer at each point.
inline BackwardResult integrate_backward(const AggregatePath& aggregates,
                                         const NetworkModel& net,
                                         const TimeGrid& grid) {
  if (aggregates.theta.size() != static_cast<std::size_t>(grid.n_points()) ||
      aggregates.eta.size() != static_cast<std::size_t>(grid.n_points()))
    throw GridMismatch("integrate_backward: aggregate paths do not cover the grid");

  const std::size_t nc = net.classes.size();
  const double dt = grid.dt();

  BackwardResult result;
  result.values.grid = grid;
  result.values.values.assign(grid.n_points(), std::vector<ValueVec>(nc));
  result.policy.grid = grid;
  result.policy.alpha.assign(grid.n_points(), std::vector<double>(nc, 0.0));

  std::vector<ValueVec> u(nc, ValueVec{0.0, 0.0, 0.0, 0.0});

  auto record = [&](int j) {
    result.values.values[j] = u;
    for (std::size_t c = 0; c < nc; ++c)
      result.policy.alpha[j][c] = resolved_best_response(
          u[c], net.classes[c], aggregates.theta[j], aggregates.eta[j]);
  };
  record(grid.n_steps);

  // du/dtau = +h along tau = T - t
  auto rhs = [&](const std::vector<ValueVec>& v, double theta, double eta,
                 std::vector<ValueVec>& out) {
    out.resize(nc);
    for (std::size_t c = 0; c < nc; ++c)
      for (int l = 0; l < kNumStates; ++l)
        out[c][l] =
            hamiltonian(static_cast<State>(l), v[c], net.classes[c], theta, eta)
                .value;
  };

  std::vector<ValueVec> k1, k2, k3, k4, tmp(nc);
  for (int j = grid.n_steps - 1; j >= 0; --j) {
    const double theta_hi = aggregates.theta[j + 1], eta_hi = aggregates.eta[j + 1];
    const double theta_lo = aggregates.theta[j], eta_lo = aggregates.eta[j];
    const double theta_mid = 0.5 * (theta_hi + theta_lo);
    const double eta_mid = 0.5 * (eta_hi + eta_lo);

    rhs(u, theta_hi, eta_hi, k1);
    for (std::size_t c = 0; c < nc; ++c)
      for (int l = 0; l < kNumStates; ++l)
        tmp[c][l] = u[c][l] + 0.5 * dt * k1[c][l];
    rhs(tmp, theta_mid, eta_mid, k2);
    for (std::size_t c = 0; c < nc; ++c)
      for (int l = 0; l < kNumStates; ++l)
        tmp[c][l] = u[c][l] + 0.5 * dt * k2[c][l];
    rhs(tmp, theta_mid, eta_mid, k3);
    for (std::size_t c = 0; c < nc; ++c)
      for (int l = 0; l < kNumStates; ++l)
        tmp[c][l] = u[c][l] + dt * k3[c][l];
    rhs(tmp, theta_lo, eta_lo, k4);

    for (std::size_t c = 0; c < nc; ++c)
      for (int l = 0; l < kNumStates; ++l) {
        u[c][l] += dt / 6.0 *
                   (k1[c][l] + 2.0 * k2[c][l] + 2.0 * k3[c][l] + k4[c][l]);
        if (!std::isfinite(u[c][l]))
          throw IntegrationDiverged("value function became non-finite at t=" +
                                    std::to_string(grid.time_at(j)));
      }
    record(j);
  }
  return result;
}

}  // namespace seli

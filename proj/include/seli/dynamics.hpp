#pragma once

// Coupling aggregates and the forward Kolmogorov equations of the population.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "seli/errors.hpp"
#include "seli/model.hpp"
#include "seli/paths.hpp"

namespace seli {

/// Probability that a randomly chosen link points to an infected node:
/// sum over classes of k pi m_I / <k>.
inline double link_infection_probability(const ClassStates& state,
                                         const NetworkModel& net) {
  double acc = 0.0;
  for (std::size_t c = 0; c < net.classes.size(); ++c)
    acc += net.classes[c].degree * net.weights[c] *
           state[c][static_cast<int>(State::I)];
  return acc / net.mean_degree;
}

/// Susceptible analogue of link_infection_probability.
inline double link_susceptible_probability(const ClassStates& state,
                                           const NetworkModel& net) {
  double acc = 0.0;
  for (std::size_t c = 0; c < net.classes.size(); ++c)
    acc += net.classes[c].degree * net.weights[c] *
           state[c][static_cast<int>(State::S)];
  return acc / net.mean_degree;
}

/// Total misinformation arrival rate R = lambda + k theta.
inline double infection_pressure(const NodeClassParams& c, double theta) {
  return c.lambda + c.degree * theta;
}

/// Probability L = (1 - lambda)(1 - theta)^k of receiving no misinformation.
inline double clean_probability(const NodeClassParams& c, double theta) {
  const double base = std::max(0.0, 1.0 - theta);
  return (1.0 - c.lambda) * std::pow(base, static_cast<double>(c.degree));
}

/// Right-hand side of the Kolmogorov equations for one class. The four
/// components sum to zero exactly in algebra (beta + gamma = 1 per branch).
inline Occupancy occupancy_rhs(const Occupancy& m, double alpha,
                               const NodeClassParams& c, double theta) {
  const double R = infection_pressure(c, theta);
  const double L = clean_probability(c, theta);
  const double exit_rate = 1.0 - c.delta;
  const double mS = m[0], mE = m[1], mL = m[2], mI = m[3];

  Occupancy d;
  d[0] = -(R + (1.0 - alpha) * L) * mS + exit_rate * c.gamma_E * mE +
         exit_rate * mL + c.nu * mI;
  d[1] = (1.0 - alpha) * R * mS - exit_rate * mE;
  d[2] = (1.0 - alpha) * L * mS - exit_rate * mL;
  d[3] = alpha * R * mS + exit_rate * c.beta_E * mE - c.nu * mI;
  return d;
}

/// Derivative of the full population state; theta is recomputed from the
/// supplied state, so the coupling tracks the integrator stages.
inline void kolmogorov_rhs(const ClassStates& state,
                           const std::vector<double>& alpha,
                           const NetworkModel& net, ClassStates& out) {
  const double theta = link_infection_probability(state, net);
  out.resize(state.size());
  for (std::size_t c = 0; c < state.size(); ++c)
    out[c] = occupancy_rhs(state[c], alpha[c], net.classes[c], theta);
}

struct ForwardResult {
  MeanFieldTrajectory trajectory;
  AggregatePath aggregates;
};

namespace detail {

inline void check_same_grid(const TimeGrid& a, const TimeGrid& b,
                            const char* what) {
  if (a.n_steps != b.n_steps || std::abs(a.horizon - b.horizon) > 1e-12) {
    std::ostringstream os;
    os << what << ": grid mismatch (" << a.n_steps << " steps over " << a.horizon
       << " vs " << b.n_steps << " steps over " << b.horizon << ")";
    throw GridMismatch(os.str());
  }
}

// Clamp roundoff-scale excursions; anything past the 1e-6 band means the
// step size is too large for the dynamics.
inline void clamp_or_fail(ClassStates& state, double t) {
  constexpr double band = 1e-6;
  for (auto& occ : state) {
    for (double& x : occ) {
      if (x < -band || x > 1.0 + band) {
        std::ostringstream os;
        os << "occupancy " << x << " left [0,1] at t=" << t
           << "; reduce the time step";
        throw IntegrationDiverged(os.str());
      }
      x = std::clamp(x, 0.0, 1.0);
    }
  }
}

}  // namespace detail

/// Integrates the Kolmogorov equations from t=0 to t=horizon with classical
/// RK4. The policy is held piecewise-constant over each step; the coupling
/// aggregates are recomputed at every stage.
inline ForwardResult integrate_forward(const ControlPolicy& policy,
                                       const NetworkModel& net,
                                       const TimeGrid& grid,
                                       const ClassStates* initial = nullptr) {
  detail::check_same_grid(policy.grid, grid, "integrate_forward");
  const std::size_t nc = net.classes.size();
  if (policy.alpha.size() != static_cast<std::size_t>(grid.n_points()) ||
      (nc > 0 && policy.alpha[0].size() != nc))
    throw GridMismatch("integrate_forward: policy shape does not match the network");
  if (initial && initial->size() != nc)
    throw GridMismatch("integrate_forward: initial state has the wrong class count");
  const double dt = grid.dt();

  ClassStates m = initial ? *initial : all_susceptible(nc);

  ForwardResult result;
  result.trajectory.grid = grid;
  result.trajectory.states.reserve(grid.n_points());
  result.aggregates.theta.reserve(grid.n_points());
  result.aggregates.eta.reserve(grid.n_points());

  auto record = [&](const ClassStates& s) {
    result.trajectory.states.push_back(s);
    result.aggregates.theta.push_back(link_infection_probability(s, net));
    result.aggregates.eta.push_back(link_susceptible_probability(s, net));
  };
  record(m);

  ClassStates k1, k2, k3, k4, tmp(nc);
  for (int j = 0; j < grid.n_steps; ++j) {
    const std::vector<double>& alpha = policy.alpha[j];

    kolmogorov_rhs(m, alpha, net, k1);
    for (std::size_t c = 0; c < nc; ++c)
      for (int l = 0; l < kNumStates; ++l)
        tmp[c][l] = m[c][l] + 0.5 * dt * k1[c][l];
    kolmogorov_rhs(tmp, alpha, net, k2);
    for (std::size_t c = 0; c < nc; ++c)
      for (int l = 0; l < kNumStates; ++l)
        tmp[c][l] = m[c][l] + 0.5 * dt * k2[c][l];
    kolmogorov_rhs(tmp, alpha, net, k3);
    for (std::size_t c = 0; c < nc; ++c)
      for (int l = 0; l < kNumStates; ++l)
        tmp[c][l] = m[c][l] + dt * k3[c][l];
    kolmogorov_rhs(tmp, alpha, net, k4);

    for (std::size_t c = 0; c < nc; ++c)
      for (int l = 0; l < kNumStates; ++l)
        m[c][l] += dt / 6.0 *
                   (k1[c][l] + 2.0 * k2[c][l] + 2.0 * k3[c][l] + k4[c][l]);

    detail::clamp_or_fail(m, grid.time_at(j + 1));
    record(m);
  }
  return result;
}

}  // namespace seli

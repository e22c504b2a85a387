#pragma once

// Fixed-point driver for the mean-field equilibrium (forward-backward sweep),
// baseline evaluation, and summary metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "seli/dynamics.hpp"
#include "seli/hjb.hpp"
#include "seli/model.hpp"
#include "seli/paths.hpp"
#include "seli/qoi.hpp"

namespace seli {

struct EquilibriumSolution {
  ControlPolicy policy;             ///< equilibrium population policy
  MeanFieldTrajectory trajectory;   ///< forward sweep of the stored policy
  AggregatePath aggregates;
  ValueTrajectory values;
  int iterations_used = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> residual_history;  ///< sup |alpha - BR(alpha)| per iterate
};

namespace detail {

inline double policy_sup_distance(const ControlPolicy& a, const ControlPolicy& b) {
  double sup = 0.0;
  for (std::size_t j = 0; j < a.alpha.size(); ++j)
    for (std::size_t c = 0; c < a.alpha[j].size(); ++c)
      sup = std::max(sup, std::abs(a.alpha[j][c] - b.alpha[j][c]));
  return sup;
}

struct SweepOutput {
  ForwardResult forward;
  BackwardResult backward;
};

inline SweepOutput full_sweep(const ControlPolicy& policy,
                              const ScenarioConfig& config,
                              const ClassStates* initial) {
  SweepOutput out;
  out.forward = integrate_forward(policy, config.network, config.grid, initial);
  out.backward =
      integrate_backward(out.forward.aggregates, config.network, config.grid);
  return out;
}

inline EquilibriumSolution solve_attempt(const ScenarioConfig& config,
                                         double damping,
                                         const ClassStates* initial,
                                         std::vector<double>& history,
                                         int& iterations) {
  ControlPolicy policy = ControlPolicy::constant(
      config.grid, config.network.n_classes(), config.initial_policy);

  ControlPolicy best_policy = policy;
  double best_residual = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    SweepOutput sweep = full_sweep(policy, config, initial);
    const ControlPolicy& response = sweep.backward.policy;
    const double residual = policy_sup_distance(policy, response);
    history.push_back(residual);
    ++iterations;

    if (residual < best_residual) {
      best_residual = residual;
      best_policy = policy;
    }
    if (residual <= config.tolerance) break;

    for (std::size_t j = 0; j < policy.alpha.size(); ++j)
      for (std::size_t c = 0; c < policy.alpha[j].size(); ++c)
        policy.alpha[j][c] = damping * response.alpha[j][c] +
                             (1.0 - damping) * policy.alpha[j][c];
  }

  // Rebuild the full solution from the best iterate so the stored pieces are
  // mutually consistent.
  SweepOutput sweep = full_sweep(best_policy, config, initial);
  EquilibriumSolution solution;
  solution.policy = std::move(best_policy);
  solution.trajectory = std::move(sweep.forward.trajectory);
  solution.aggregates = std::move(sweep.forward.aggregates);
  solution.values = std::move(sweep.backward.values);
  solution.final_residual =
      policy_sup_distance(solution.policy, sweep.backward.policy);
  solution.converged = solution.final_residual <= config.tolerance;
  return solution;
}

}  // namespace detail

/// Residual of a candidate equilibrium: sup over classes and grid points of
/// |alpha - BR(alpha)|, where BR is one full forward+backward sweep. Zero iff
/// the candidate is an exact fixed point.
inline double equilibrium_residual(const ControlPolicy& candidate,
                                   const ScenarioConfig& config,
                                   const ClassStates* initial = nullptr) {
  detail::SweepOutput sweep = detail::full_sweep(candidate, config, initial);
  return detail::policy_sup_distance(candidate, sweep.backward.policy);
}

/// Forward-backward sweep iteration for the mean-field equilibrium. Not
/// guaranteed to converge in general; on failure with undamped updates the
/// solve restarts once with damping 0.5 and the better iterate wins. The
/// returned solution is the iterate with the smallest residual either way,
/// with `converged` false when the tolerance was not reached.
inline EquilibriumSolution solve_mfe(const ScenarioConfig& config,
                                     const ClassStates* initial = nullptr) {
  std::vector<double> history;
  int iterations = 0;
  EquilibriumSolution solution =
      detail::solve_attempt(config, config.damping, initial, history, iterations);

  if (!solution.converged && config.damping == 1.0) {
    EquilibriumSolution retry =
        detail::solve_attempt(config, 0.5, initial, history, iterations);
    if (retry.final_residual < solution.final_residual) solution = std::move(retry);
  }

  solution.residual_history = std::move(history);
  solution.iterations_used = iterations;
  return solution;
}

/// Expected QoI per grid point and class under a policy, unscaled (reporting
/// convention): E_alpha[Q] = a1 alpha + a2 at the trajectory's aggregates.
inline std::vector<std::vector<double>> expected_qoi_path(
    const AggregatePath& aggregates, const ControlPolicy& policy,
    const NetworkModel& net) {
  const std::size_t n_points = aggregates.theta.size();
  std::vector<std::vector<double>> path(n_points,
                                        std::vector<double>(net.n_classes()));
  for (std::size_t j = 0; j < n_points; ++j)
    for (std::size_t c = 0; c < net.n_classes(); ++c) {
      const QoiCoefficients q = unscaled_qoi_coefficients(
          net.classes[c], aggregates.theta[j], aggregates.eta[j]);
      path[j][c] = q.a1 * policy.alpha[j][c] + q.a2;
    }
  return path;
}

/// Cumulative running cost per class (trapezoid rule over the grid), using
/// the game's own (possibly scaled) cost.
inline std::vector<double> cumulative_cost(const MeanFieldTrajectory& trajectory,
                                           const AggregatePath& aggregates,
                                           const ControlPolicy& policy,
                                           const NetworkModel& net) {
  const std::size_t nc = net.n_classes();
  const int n_points = trajectory.grid.n_points();
  std::vector<double> total(nc, 0.0);
  std::vector<double> prev_rate(nc, 0.0), rate(nc, 0.0);
  for (int j = 0; j < n_points; ++j) {
    for (std::size_t c = 0; c < nc; ++c) {
      const NodeClassParams& params = net.classes[c];
      const Occupancy& m = trajectory.states[j][c];
      rate[c] = m[0] * running_cost(State::S, policy.alpha[j][c], params,
                                    aggregates.theta[j], aggregates.eta[j]) +
                m[3] * params.infection_cost;
      if (j > 0)
        total[c] += 0.5 * (prev_rate[c] + rate[c]) * trajectory.grid.dt();
    }
    std::swap(prev_rate, rate);
  }
  return total;
}

struct BaselineResult {
  MeanFieldTrajectory trajectory;
  AggregatePath aggregates;
  std::vector<std::vector<double>> qoi;   ///< [point][class], unscaled
  std::vector<double> cumulative_cost;    ///< per class
};

/// Forward sweep under the always-accept policy plus cost bookkeeping.
inline BaselineResult baseline_evaluation(const ScenarioConfig& config,
                                          const ClassStates* initial = nullptr) {
  const ControlPolicy ones =
      ControlPolicy::constant(config.grid, config.network.n_classes(), 1.0);
  ForwardResult fwd = integrate_forward(ones, config.network, config.grid, initial);
  BaselineResult result;
  result.qoi = expected_qoi_path(fwd.aggregates, ones, config.network);
  result.cumulative_cost =
      cumulative_cost(fwd.trajectory, fwd.aggregates, ones, config.network);
  result.trajectory = std::move(fwd.trajectory);
  result.aggregates = std::move(fwd.aggregates);
  return result;
}

/// Reductions are undefined when the baseline quantity is below this.
inline constexpr double kDivisionGuard = 1e-12;

struct ClassComparison {
  int degree = 0;
  int type_id = 0;
  double infected_baseline = 0.0;
  double infected_mfe = 0.0;
  std::optional<double> infection_reduction_pct;  ///< 100 (1 - mfe/baseline)
  double qoi_baseline = 0.0;
  double qoi_mfe = 0.0;
  std::optional<double> qoi_ratio;                ///< mfe / baseline
  std::optional<double> qoi_gain;                 ///< (mfe - baseline)/|baseline|
};

struct SummaryMetrics {
  std::vector<ClassComparison> per_class;
  double theta_baseline = 0.0;
  double theta_mfe = 0.0;
  std::optional<double> theta_reduction_pct;
};

/// Terminal-time comparison between the equilibrium and the baseline.
inline SummaryMetrics summary_metrics(const EquilibriumSolution& mfe,
                                      const BaselineResult& baseline,
                                      const ScenarioConfig& config) {
  const NetworkModel& net = config.network;
  const int last = config.grid.n_steps;
  const auto qoi_mfe_path =
      expected_qoi_path(mfe.aggregates, mfe.policy, net);

  SummaryMetrics out;
  for (std::size_t c = 0; c < net.n_classes(); ++c) {
    ClassComparison row;
    row.degree = net.classes[c].degree;
    row.type_id = net.classes[c].type_id;
    row.infected_baseline = baseline.trajectory.states[last][c][3];
    row.infected_mfe = mfe.trajectory.states[last][c][3];
    if (row.infected_baseline >= kDivisionGuard)
      row.infection_reduction_pct =
          100.0 * (1.0 - row.infected_mfe / row.infected_baseline);
    row.qoi_baseline = baseline.qoi[last][c];
    row.qoi_mfe = qoi_mfe_path[last][c];
    if (std::abs(row.qoi_baseline) >= kDivisionGuard) {
      row.qoi_ratio = row.qoi_mfe / row.qoi_baseline;
      row.qoi_gain =
          (row.qoi_mfe - row.qoi_baseline) / std::abs(row.qoi_baseline);
    }
    out.per_class.push_back(row);
  }
  out.theta_baseline = baseline.aggregates.theta[last];
  out.theta_mfe = mfe.aggregates.theta[last];
  if (out.theta_baseline >= kDivisionGuard)
    out.theta_reduction_pct =
        100.0 * (1.0 - out.theta_mfe / out.theta_baseline);
  return out;
}

}  // namespace seli

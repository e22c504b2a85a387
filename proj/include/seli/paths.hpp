#pragma once

#include <array>
#include <vector>

#include "seli/model.hpp"

namespace seli {

/// Occupancy fractions (m_S, m_E, m_L, m_I) of one class; sums to 1.
using Occupancy = std::array<double, kNumStates>;

/// Occupancy of every class at one instant, in network class order.
using ClassStates = std::vector<Occupancy>;

/// Cost-to-go (u_S, u_E, u_L, u_I) of one class.
using ValueVec = std::array<double, kNumStates>;

inline ClassStates all_susceptible(std::size_t n_classes) {
  return ClassStates(n_classes, Occupancy{1.0, 0.0, 0.0, 0.0});
}

/// State-occupancy curves on the grid; states[j][c] is class c at t_j.
struct MeanFieldTrajectory {
  TimeGrid grid;
  std::vector<ClassStates> states;
};

/// The coupling fields over the grid: theta(t) is the probability that a
/// random link points to an infected node, eta(t) the susceptible analogue.
struct AggregatePath {
  std::vector<double> theta;
  std::vector<double> eta;
};

/// Per-class acceptance probabilities alpha(t_j) in [0,1].
struct ControlPolicy {
  TimeGrid grid;
  std::vector<std::vector<double>> alpha;  ///< [point][class]

  static ControlPolicy constant(const TimeGrid& grid, std::size_t n_classes,
                                double value) {
    ControlPolicy p;
    p.grid = grid;
    p.alpha.assign(grid.n_points(), std::vector<double>(n_classes, value));
    return p;
  }
};

/// Per-class value functions on the grid; values[j][c] is class c at t_j.
struct ValueTrajectory {
  TimeGrid grid;
  std::vector<std::vector<ValueVec>> values;
};

}  // namespace seli

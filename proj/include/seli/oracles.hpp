#pragma once

// Independent reference computations used only by the test and verification
// harnesses. Each deliberately avoids the closed forms it cross-checks: the
// expected QoI is enumerated from the multinomial link distribution, and the
// best response is recovered by brute-force minimization.

#include <cmath>
#include <vector>

#include "seli/dynamics.hpp"
#include "seli/model.hpp"
#include "seli/paths.hpp"
#include "seli/qoi.hpp"

namespace seli::oracles {

/// Multinomial probability of (n1 infected, n2 susceptible) link endpoints
/// among k links with cell probabilities (theta, eta, 1 - theta - eta).
inline double multinomial_pmf(int k, int n1, int n2, double theta, double eta) {
  const double rest = 1.0 - theta - eta;
  double log_coeff = std::lgamma(k + 1.0) - std::lgamma(n1 + 1.0) -
                     std::lgamma(n2 + 1.0) - std::lgamma(k - n1 - n2 + 1.0);
  double value = std::exp(log_coeff);
  for (int i = 0; i < n1; ++i) value *= theta;
  for (int i = 0; i < n2; ++i) value *= eta;
  for (int i = 0; i < k - n1 - n2; ++i) value *= rest;
  return value;
}

/// Misinformation QoI recovered by exhaustive enumeration over (n1, n2).
inline double enumerated_misinformation_qoi(const NodeClassParams& c,
                                            double theta, double eta) {
  double acc = 0.0;
  for (int n1 = 0; n1 <= c.degree; ++n1)
    for (int n2 = 0; n2 <= c.degree - n1; ++n2) {
      const double pmf = multinomial_pmf(c.degree, n1, n2, theta, eta);
      const double term = c.lambda * (n2 - n1 - 1.0) +
                          (1.0 - c.lambda) * (n2 - n1) -
                          (1.0 - c.lambda) * n2;
      acc += pmf * term;
    }
  return acc;
}

/// True-information QoI E[n2 + 1] recovered by enumeration.
inline double enumerated_true_info_qoi(const NodeClassParams& c, double theta,
                                       double eta) {
  double acc = 0.0;
  for (int n1 = 0; n1 <= c.degree; ++n1)
    for (int n2 = 0; n2 <= c.degree - n1; ++n2)
      acc += multinomial_pmf(c.degree, n1, n2, theta, eta) * (n2 + 1.0);
  return acc;
}

/// Expected QoI of a susceptible node at acceptance probability alpha,
/// built from the enumerated pieces and the acceptance branches (true info
/// accepted now / after processing / rejected; misinformation accepted now /
/// after processing / rejected). Practical for k <= 8.
inline double enumerated_expected_qoi(const NodeClassParams& c, double theta,
                                      double eta, double alpha) {
  const double L = clean_probability(c, theta);
  const double shift = c.qoi_shift();
  const double penalty = c.kappa * c.delta;
  const double vt = enumerated_true_info_qoi(c, theta, eta);
  const double fm = enumerated_misinformation_qoi(c, theta, eta);

  const double accept_now = L * (vt + shift) + fm + shift * (1.0 - L);
  const double doubt = L * c.beta_L * (vt + shift - penalty) +
                       c.beta_E * (fm + (shift - penalty) * (1.0 - L));
  return alpha * accept_now + (1.0 - alpha) * doubt;
}

/// Susceptible-state Hamiltonian evaluated at a specific alpha (no
/// minimization), the quantity the closed-form best response minimizes.
inline double state_s_hamiltonian_at(double alpha, const ValueVec& u,
                                     const NodeClassParams& c, double theta,
                                     double eta) {
  const double R = infection_pressure(c, theta);
  const double L = clean_probability(c, theta);
  const double uS = u[0], uE = u[1], uL = u[2], uI = u[3];
  return running_cost(State::S, alpha, c, theta, eta) +
         (1.0 - alpha) * R * (uE - uS) + (1.0 - alpha) * L * (uL - uS) +
         alpha * R * (uI - uS);
}

/// Brute-force minimizer of the susceptible-state Hamiltonian over a uniform
/// grid on [0,1]; keeps the first minimum on ties.
inline double grid_best_response(const ValueVec& u, const NodeClassParams& c,
                                 double theta, double eta,
                                 int n_points = 100000) {
  double best_alpha = 0.0;
  double best_value = state_s_hamiltonian_at(0.0, u, c, theta, eta);
  for (int i = 1; i < n_points; ++i) {
    const double alpha = static_cast<double>(i) / (n_points - 1);
    const double value = state_s_hamiltonian_at(alpha, u, c, theta, eta);
    if (value < best_value) {
      best_value = value;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

}  // namespace seli::oracles

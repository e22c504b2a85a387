#pragma once

// Quality-of-information model: closed-form misinformation QoI, the
// affine-in-alpha expected QoI, and the per-state running costs.

#include <cmath>

#include "seli/dynamics.hpp"
#include "seli/model.hpp"

namespace seli {

/// Closed form of the misinformation QoI sum:
/// F^M = k eta - k theta - lambda - (1 - lambda) k eta. The conditional QoI
/// given that misinformation is received is F^M / (1 - L).
inline double misinformation_qoi(const NodeClassParams& c, double theta,
                                 double eta) {
  const double k = c.degree;
  return k * eta - k * theta - c.lambda - (1.0 - c.lambda) * k * eta;
}

/// Expected QoI when a susceptible node accepts true information: k eta + 1.
inline double true_info_qoi(const NodeClassParams& c, double eta) {
  return c.degree * eta + 1.0;
}

/// Slope/intercept of the expected QoI in the acceptance probability:
/// E_alpha[Q] = a1 alpha + a2.
struct QoiCoefficients {
  double a1 = 0.0;
  double a2 = 0.0;
  bool scaled = false;
};

/// Coefficients with an explicit shift added to the QoI of accepted
/// information (the doubt branches also pay the kappa*delta age penalty).
inline QoiCoefficients qoi_coefficients_with_shift(const NodeClassParams& c,
                                                   double theta, double eta,
                                                   double shift) {
  const double L = clean_probability(c, theta);
  const double fm = misinformation_qoi(c, theta, eta);
  const double vt = true_info_qoi(c, eta);
  const double penalty = c.kappa * c.delta;

  QoiCoefficients q;
  q.scaled = shift != 0.0;
  // accept-after-processing branches, weighted by the branch probabilities
  q.a2 = L * c.beta_L * (vt + shift - penalty) +
         c.beta_E * (fm + (shift - penalty) * (1.0 - L));
  // accept-now expectation minus the doubt expectation
  const double accept_now = L * (vt + shift) + fm + shift * (1.0 - L);
  q.a1 = accept_now - q.a2;
  return q;
}

/// Coefficients under the class's own scaling setting.
inline QoiCoefficients expected_qoi_coefficients(const NodeClassParams& c,
                                                 double theta, double eta) {
  return qoi_coefficients_with_shift(c, theta, eta, c.qoi_shift());
}

/// Coefficients with the scaling shift suppressed (used for reporting).
inline QoiCoefficients unscaled_qoi_coefficients(const NodeClassParams& c,
                                                 double theta, double eta) {
  return qoi_coefficients_with_shift(c, theta, eta, 0.0);
}

/// Running cost of one state: S pays the squared QoI gap, I the infection
/// cost, E and L nothing.
inline double running_cost(State state, double alpha, const NodeClassParams& c,
                           double theta, double eta) {
  switch (state) {
    case State::S: {
      const QoiCoefficients q = expected_qoi_coefficients(c, theta, eta);
      const double gap = q.a1 * alpha + q.a2 - c.effective_target();
      return gap * gap;
    }
    case State::I:
      return c.infection_cost;
    case State::E:
    case State::L:
      return 0.0;
  }
  return 0.0;
}

/// Actual strong-convexity margin of the scaled cost (the slope a1).
inline double convexity_margin(const NodeClassParams& c, double theta,
                               double eta) {
  return qoi_coefficients_with_shift(c, theta, eta, c.degree + 2.0).a1;
}

/// The margin lower bound claimed for beta_L >= beta_E; evaluated for
/// reporting, not assumed.
inline double claimed_convexity_bound(const NodeClassParams& c) {
  return (1.0 - c.beta_L) * (2.0 * c.degree - 1.0) + c.beta_E * c.delta;
}

}  // namespace seli

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "seli/errors.hpp"

namespace seli {

/// Compartments of the SELI chain: susceptible, exposed (processing suspected
/// misinformation), latent (processing true information), infected.
enum class State : int { S = 0, E = 1, L = 2, I = 3 };

inline constexpr int kNumStates = 4;

inline const char* state_name(State s) {
  switch (s) {
    case State::S: return "S";
    case State::E: return "E";
    case State::L: return "L";
    case State::I: return "I";
  }
  return "?";
}

/// All per-class constants of a node class (degree, type) pair.
struct NodeClassParams {
  int degree = 1;        ///< number of links k, >= 1
  int type_id = 0;       ///< type index i within degree-k nodes
  double lambda = 0.0;   ///< attacker injection rate, in [0,1]
  double delta = 0.0;    ///< probability of remaining in E/L per unit time, in [0,1)
  double beta_E = 0.5;   ///< acceptance probability on leaving E
  double gamma_E = 0.5;  ///< rejection probability on leaving E (= 1 - beta_E)
  double beta_L = 0.5;   ///< acceptance probability on leaving L
  double gamma_L = 0.5;  ///< rejection probability on leaving L (= 1 - beta_L)
  double nu = 0.5;       ///< curing rate (discard of stale misinformation)
  double infection_cost = 0.0;  ///< running cost c while infected
  double target_qoi = 0.0;      ///< QoI target Q_T of the susceptible-state cost
  double kappa = 3.0;           ///< processing-delay penalty normalization
  bool scaling_enabled = true;  ///< apply the convexity shift k+2 to accepted QoI values
  bool shift_target = false;    ///< also shift the QoI target by k+2 when scaling

  /// Shift added to the QoI of accepted information when scaling is on.
  double qoi_shift() const {
    return scaling_enabled ? static_cast<double>(degree) + 2.0 : 0.0;
  }

  /// Target the susceptible-state running cost drives the expected QoI to.
  double effective_target() const {
    return target_qoi + (shift_target ? qoi_shift() : 0.0);
  }

  bool operator==(const NodeClassParams&) const = default;
};

/// The class population: parameters, weights pi_ik = P(k) p_k(i), and the
/// cached mean degree <k> = sum_k k P(k).
struct NetworkModel {
  std::vector<NodeClassParams> classes;
  std::vector<double> weights;
  double mean_degree = 0.0;  ///< cached by validate()

  std::size_t n_classes() const { return classes.size(); }

  bool operator==(const NetworkModel&) const = default;
};

/// Uniform time grid t_j = j dt, j = 0..n_steps, dt = horizon / n_steps.
struct TimeGrid {
  double horizon = 0.0;
  int n_steps = 0;

  double dt() const { return horizon / n_steps; }
  int n_points() const { return n_steps + 1; }
  double time_at(int j) const { return j * dt(); }

  bool operator==(const TimeGrid&) const = default;
};

/// Full experiment description: network, grid, and solver knobs.
struct ScenarioConfig {
  NetworkModel network;
  TimeGrid grid{0.9, 900};
  double tolerance = 1e-4;     ///< sup-norm convergence threshold of the sweep
  int max_iterations = 100;
  double damping = 1.0;        ///< policy update weight, in (0,1]
  double initial_policy = 0.5; ///< constant initial acceptance-probability guess
  std::uint64_t seed = 20177;
  std::string output_dir = "out";

  bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

inline bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

inline std::string class_label(const NodeClassParams& c) {
  std::ostringstream os;
  os << "class (k=" << c.degree << ", i=" << c.type_id << ")";
  return os.str();
}

inline void check_class(const NodeClassParams& c, std::vector<std::string>& out) {
  const std::string who = class_label(c);
  auto fail = [&](const std::string& msg) { out.push_back(who + ": " + msg); };

  if (c.degree < 1) fail("degree must be >= 1, got " + std::to_string(c.degree));
  if (!in_unit_interval(c.lambda)) fail("lambda outside [0,1]");
  if (!(c.delta >= 0.0 && c.delta < 1.0)) fail("delta outside [0,1)");
  for (auto [name, value] : {std::pair{"beta_E", c.beta_E}, {"gamma_E", c.gamma_E},
                             {"beta_L", c.beta_L}, {"gamma_L", c.gamma_L}}) {
    if (!in_unit_interval(value))
      fail(std::string(name) + " outside [0,1]");
  }
  if (std::abs(c.beta_E + c.gamma_E - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "beta_E + gamma_E = " << (c.beta_E + c.gamma_E) << ", expected 1";
    fail(os.str());
  }
  if (std::abs(c.beta_L + c.gamma_L - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "beta_L + gamma_L = " << (c.beta_L + c.gamma_L) << ", expected 1";
    fail(os.str());
  }
  if (!(c.nu >= 0.0)) fail("nu must be nonnegative");
  if (!(c.infection_cost >= 0.0)) fail("infection_cost must be nonnegative");
  if (!(c.kappa >= 0.0)) fail("kappa must be nonnegative");
  if (!std::isfinite(c.target_qoi)) fail("target_qoi must be finite");
}

}  // namespace detail

/// Checks every invariant of the configuration and returns a copy with the
/// cached quantities (mean degree) populated. Idempotent.
inline ScenarioConfig validate(ScenarioConfig config) {
  std::vector<std::string> violations;
  const NetworkModel& net = config.network;

  if (net.classes.empty()) violations.push_back("network has no classes");
  if (net.weights.size() != net.classes.size())
    violations.push_back("weights length " + std::to_string(net.weights.size()) +
                         " does not match class count " +
                         std::to_string(net.classes.size()));

  for (const auto& c : net.classes) detail::check_class(c, violations);

  std::set<std::pair<int, int>> seen;
  for (const auto& c : net.classes) {
    if (!seen.insert({c.degree, c.type_id}).second)
      violations.push_back("duplicate " + detail::class_label(c));
  }

  double weight_sum = 0.0;
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    if (!(net.weights[i] >= 0.0))
      violations.push_back("weight " + std::to_string(i) + " is negative");
    weight_sum += net.weights[i];
  }
  if (!net.weights.empty() && std::abs(weight_sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "weights sum " << weight_sum << ", expected 1";
    violations.push_back(os.str());
  }

  if (!(config.grid.horizon > 0.0)) violations.push_back("horizon must be > 0");
  if (config.grid.n_steps < 1) violations.push_back("n_steps must be >= 1");
  if (!(config.tolerance > 0.0)) violations.push_back("tolerance must be > 0");
  if (config.max_iterations < 1) violations.push_back("max_iterations must be >= 1");
  if (!(config.damping > 0.0 && config.damping <= 1.0))
    violations.push_back("damping outside (0,1]");
  if (!detail::in_unit_interval(config.initial_policy))
    violations.push_back("initial_policy outside [0,1]");

  if (!violations.empty()) throw InvalidConfig(std::move(violations));

  double mean_degree = 0.0;
  for (std::size_t i = 0; i < net.classes.size(); ++i)
    mean_degree += net.classes[i].degree * net.weights[i];
  config.network.mean_degree = mean_degree;

  if (!(config.network.mean_degree > 0.0))
    throw InvalidConfig({"mean degree is not positive"});

  return config;
}

/// The bundled reproduction scenario: a hierarchical network with degrees
/// {1, 10, 15, 20} under weights {0.4, 0.3, 0.2, 0.1}, one type per degree,
/// attacker rate 0.2 everywhere, horizon 0.9 s.
inline ScenarioConfig default_scenario() {
  struct Row {
    int k;
    double weight, delta, beta_E, beta_L, cost;
  };
  constexpr Row rows[] = {
      {1, 0.4, 0.0, 0.5, 0.5, 1.0},
      {10, 0.3, 0.4, 0.3, 0.6, 10.0},
      {15, 0.2, 0.3, 0.2, 0.7, 20.0},
      {20, 0.1, 0.3, 0.1, 0.8, 30.0},
  };

  ScenarioConfig config;
  for (const Row& r : rows) {
    NodeClassParams c;
    c.degree = r.k;
    c.type_id = 0;
    c.lambda = 0.2;
    c.delta = r.delta;
    c.beta_E = r.beta_E;
    c.gamma_E = 1.0 - r.beta_E;
    c.beta_L = r.beta_L;
    c.gamma_L = 1.0 - r.beta_L;
    c.nu = 0.5;
    c.infection_cost = r.cost;
    c.target_qoi = r.k;
    c.kappa = 3.0;
    c.scaling_enabled = true;
    c.shift_target = false;
    config.network.classes.push_back(c);
    config.network.weights.push_back(r.weight);
  }
  config.grid = TimeGrid{0.9, 900};
  return validate(config);
}

}  // namespace seli

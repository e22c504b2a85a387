#pragma once

// Stochastic simulation of the N-node game under a fixed policy, empirical
// aggregates, and the mean-field deviation metric.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "seli/dynamics.hpp"
#include "seli/errors.hpp"
#include "seli/model.hpp"
#include "seli/paths.hpp"

namespace seli {

using ClassCounts = std::array<long long, kNumStates>;

/// Node counts per class and state at one instant.
struct PopulationCounts {
  std::vector<ClassCounts> counts;      ///< [class][state]
  std::vector<long long> class_sizes;   ///< N_ik, invariant per class
};

/// Largest-remainder apportionment of N nodes to the class weights.
/// Every class must receive at least one node.
inline std::vector<long long> allocate_population(const NetworkModel& net,
                                                  long long n) {
  const std::size_t nc = net.n_classes();
  std::vector<long long> sizes(nc);
  std::vector<std::pair<double, std::size_t>> remainders(nc);
  long long assigned = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    const double exact = net.weights[c] * static_cast<double>(n);
    sizes[c] = static_cast<long long>(std::floor(exact));
    remainders[c] = {exact - std::floor(exact), c};
    assigned += sizes[c];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long long r = 0; r < n - assigned; ++r)
    ++sizes[remainders[static_cast<std::size_t>(r) % nc].second];

  for (std::size_t c = 0; c < nc; ++c)
    if (sizes[c] == 0) {
      std::ostringstream os;
      os << "class (k=" << net.classes[c].degree << ", i="
         << net.classes[c].type_id << ") received no nodes for N=" << n;
      throw InvalidPopulation(os.str());
    }
  return sizes;
}

/// Degree-weighted empirical aggregates, the finite analogues of the link
/// probabilities: theta_N = sum k n_I / sum k N_ik, likewise eta_N.
inline std::pair<double, double> empirical_aggregates(
    const PopulationCounts& population, const NetworkModel& net) {
  double infected = 0.0, susceptible = 0.0, total = 0.0;
  for (std::size_t c = 0; c < net.n_classes(); ++c) {
    const double k = net.classes[c].degree;
    infected += k * static_cast<double>(population.counts[c][3]);
    susceptible += k * static_cast<double>(population.counts[c][0]);
    total += k * static_cast<double>(population.class_sizes[c]);
  }
  return {infected / total, susceptible / total};
}

struct FiniteSimResult {
  TimeGrid grid;
  std::vector<long long> class_sizes;
  long long total_nodes = 0;
  int replicas = 0;
  std::uint64_t seed = 0;
  /// counts[replica][point][class][state]
  std::vector<std::vector<std::vector<ClassCounts>>> counts;
  std::vector<double> theta_mean;  ///< replica-averaged empirical path
  std::vector<double> eta_mean;
};

namespace detail {

// 53-bit uniform in [0,1); bit-identical across standard library
// implementations, unlike std::uniform_real_distribution.
inline double next_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void check_step_size(const ScenarioConfig& config) {
  double max_rate = 0.0;
  for (const NodeClassParams& c : config.network.classes) {
    max_rate = std::max(max_rate, c.lambda + c.degree + 1.0);  // S exits
    max_rate = std::max(max_rate, 1.0 - c.delta);              // E/L exits
    max_rate = std::max(max_rate, c.nu);                       // I exit
  }
  if (config.grid.dt() * max_rate >= 0.1) {
    std::ostringstream os;
    os << "dt * max exit rate = " << config.grid.dt() * max_rate
       << " >= 0.1; refine the grid";
    throw StepTooLarge(os.str());
  }
}

inline std::vector<std::vector<ClassCounts>> run_replica(
    const ScenarioConfig& config, const ControlPolicy& policy,
    const std::vector<long long>& sizes, std::mt19937_64& rng) {
  const NetworkModel& net = config.network;
  const std::size_t nc = net.n_classes();
  const double dt = config.grid.dt();

  PopulationCounts population;
  population.class_sizes = sizes;
  population.counts.assign(nc, ClassCounts{0, 0, 0, 0});
  for (std::size_t c = 0; c < nc; ++c) population.counts[c][0] = sizes[c];

  std::vector<std::vector<ClassCounts>> path;
  path.reserve(config.grid.n_points());
  path.push_back(population.counts);

  std::vector<ClassCounts> next(nc);
  for (int j = 0; j < config.grid.n_steps; ++j) {
    const auto [theta_n, eta_n] = empirical_aggregates(population, net);
    (void)eta_n;
    next = population.counts;

    for (std::size_t c = 0; c < nc; ++c) {
      const NodeClassParams& params = net.classes[c];
      const double alpha = policy.alpha[j][c];
      const double R = infection_pressure(params, theta_n);
      const double L = clean_probability(params, theta_n);
      const double exit_rate = 1.0 - params.delta;

      // susceptible nodes: exit branches ordered I, E, L, then stay
      const double ps_i = alpha * R * dt;
      const double ps_e = ps_i + (1.0 - alpha) * R * dt;
      const double ps_l = ps_e + (1.0 - alpha) * L * dt;
      for (long long node = 0; node < population.counts[c][0]; ++node) {
        const double u = next_uniform(rng);
        if (u < ps_i) {
          --next[c][0]; ++next[c][3];
        } else if (u < ps_e) {
          --next[c][0]; ++next[c][1];
        } else if (u < ps_l) {
          --next[c][0]; ++next[c][2];
        }
      }

      // exposed nodes: accept to I, reject back to S
      const double pe_i = exit_rate * params.beta_E * dt;
      const double pe_s = pe_i + exit_rate * params.gamma_E * dt;
      for (long long node = 0; node < population.counts[c][1]; ++node) {
        const double u = next_uniform(rng);
        if (u < pe_i) {
          --next[c][1]; ++next[c][3];
        } else if (u < pe_s) {
          --next[c][1]; ++next[c][0];
        }
      }

      // latent nodes return to S whether they accept or reject
      const double pl_s = exit_rate * dt;
      for (long long node = 0; node < population.counts[c][2]; ++node) {
        if (next_uniform(rng) < pl_s) {
          --next[c][2]; ++next[c][0];
        }
      }

      // infected nodes discard stale misinformation
      const double pi_s = params.nu * dt;
      for (long long node = 0; node < population.counts[c][3]; ++node) {
        if (next_uniform(rng) < pi_s) {
          --next[c][3]; ++next[c][0];
        }
      }
    }

    population.counts = next;
    for (std::size_t c = 0; c < nc; ++c) {
      long long sum = 0;
      for (long long v : population.counts[c]) {
        assert(v >= 0);
        sum += v;
      }
      assert(sum == sizes[c]);
      (void)sum;
    }
    path.push_back(population.counts);
  }
  return path;
}

}  // namespace detail

/// Simulates `replicas` independent populations of N nodes, all playing the
/// supplied policy, with per-node Bernoulli transitions on the solver grid.
/// Deterministic given (seed, replica): each replica owns an isolated RNG
/// stream, and results do not depend on execution order.
inline FiniteSimResult simulate(const ScenarioConfig& config,
                                const ControlPolicy& policy, long long n,
                                int replicas, std::uint64_t seed) {
  detail::check_same_grid(policy.grid, config.grid, "simulate");
  if (policy.alpha.size() != static_cast<std::size_t>(config.grid.n_points()) ||
      (config.network.n_classes() > 0 &&
       policy.alpha[0].size() != config.network.n_classes()))
    throw GridMismatch("simulate: policy shape does not match the network");
  if (replicas < 1)
    throw InvalidPopulation("simulate: at least one replica is required");
  detail::check_step_size(config);

  FiniteSimResult result;
  result.grid = config.grid;
  result.class_sizes = allocate_population(config.network, n);
  result.total_nodes = n;
  result.replicas = replicas;
  result.seed = seed;
  result.counts.reserve(replicas);

  for (int r = 0; r < replicas; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(n),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    result.counts.push_back(
        detail::run_replica(config, policy, result.class_sizes, rng));
  }

  const int n_points = config.grid.n_points();
  result.theta_mean.assign(n_points, 0.0);
  result.eta_mean.assign(n_points, 0.0);
  PopulationCounts snapshot;
  snapshot.class_sizes = result.class_sizes;
  for (int r = 0; r < replicas; ++r)
    for (int j = 0; j < n_points; ++j) {
      snapshot.counts = result.counts[r][j];
      const auto [theta_n, eta_n] =
          empirical_aggregates(snapshot, config.network);
      result.theta_mean[j] += theta_n / replicas;
      result.eta_mean[j] += eta_n / replicas;
    }
  return result;
}

/// Empirical deviation path: replica average of the squared infinity-norm gap
/// between occupancy fractions and the mean-field trajectory, summed over
/// classes.
inline std::vector<double> mean_field_deviation(const FiniteSimResult& result,
                                                const MeanFieldTrajectory& mf) {
  if (mf.grid.n_steps != result.grid.n_steps ||
      std::abs(mf.grid.horizon - result.grid.horizon) > 1e-12)
    throw GridMismatch("mean_field_deviation: trajectory grid differs from the simulation grid");

  const int n_points = result.grid.n_points();
  const std::size_t nc = result.class_sizes.size();
  std::vector<double> deviation(n_points, 0.0);
  for (int r = 0; r < result.replicas; ++r)
    for (int j = 0; j < n_points; ++j) {
      double sum = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        double worst = 0.0;
        for (int l = 0; l < kNumStates; ++l) {
          const double fraction = static_cast<double>(result.counts[r][j][c][l]) /
                                  static_cast<double>(result.class_sizes[c]);
          worst = std::max(worst, std::abs(fraction - mf.states[j][c][l]));
        }
        sum += worst * worst;
      }
      deviation[j] += sum / result.replicas;
    }
  return deviation;
}

struct ConvergenceRow {
  long long n = 0;
  double sup_deviation = 0.0;
  double sup_theta_error = 0.0;  ///< sup_t |theta_N - theta|
};

/// Runs the simulation for each population size and tabulates the deviation
/// metric against the mean-field trajectory. Deterministic given the seed.
inline std::vector<ConvergenceRow> convergence_study(
    const ScenarioConfig& config, const ControlPolicy& policy,
    const MeanFieldTrajectory& mf, const AggregatePath& aggregates,
    const std::vector<long long>& n_list, int replicas, std::uint64_t seed) {
  std::vector<ConvergenceRow> rows;
  for (long long n : n_list) {
    FiniteSimResult sim = simulate(config, policy, n, replicas, seed);
    const std::vector<double> deviation = mean_field_deviation(sim, mf);
    ConvergenceRow row;
    row.n = n;
    for (int j = 0; j < config.grid.n_points(); ++j) {
      row.sup_deviation = std::max(row.sup_deviation, deviation[j]);
      row.sup_theta_error = std::max(
          row.sup_theta_error, std::abs(sim.theta_mean[j] - aggregates.theta[j]));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace seli

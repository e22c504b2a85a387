// Command-line front end: equilibrium solves, baseline evaluation, stochastic
// simulation, parameter sweeps, calibration, and the reproduction harness.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seli/seli.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 2;
constexpr int kExitConfigError = 3;
constexpr int kExitCriteriaFailed = 4;

// any failure to produce a validated config is a config error (exit code 3)
seli::LoadedConfig load_or_die(const std::string& path) {
  try {
    return seli::load_config(path);
  } catch (const seli::ParseError&) {
    throw;
  } catch (const seli::InvalidConfig&) {
    throw;
  } catch (const seli::Error& e) {
    throw seli::InvalidConfig({e.what()});
  }
}

void emit_solution(const seli::EquilibriumSolution& solution,
                   const seli::BaselineResult& baseline,
                   const seli::ScenarioConfig& config,
                   const std::vector<std::string>& defaults,
                   const std::filesystem::path& out_dir) {
  seli::RunManifest manifest;
  manifest.config = config;
  manifest.defaults_applied = defaults;
  manifest.files =
      seli::emit_trajectories(solution, baseline, config, out_dir);
  seli::write_manifest(manifest, out_dir);
}

int run_solve(const std::string& config_path, const std::string& out_override,
              int intervals) {
  seli::LoadedConfig loaded = load_or_die(config_path);
  seli::ScenarioConfig config = loaded.config;
  const std::filesystem::path out_root =
      out_override.empty() ? config.output_dir : out_override;

  seli::ClassStates initial =
      seli::all_susceptible(config.network.n_classes());
  bool all_converged = true;
  for (int interval = 0; interval < intervals; ++interval) {
    seli::EquilibriumSolution solution = seli::solve_mfe(config, &initial);
    seli::BaselineResult baseline =
        seli::baseline_evaluation(config, &initial);
    const std::filesystem::path out =
        intervals == 1 ? out_root
                       : out_root / ("interval_" + std::to_string(interval));
    emit_solution(solution, baseline, config, loaded.defaults_applied, out);
    std::cout << "interval " << interval << ": "
              << (solution.converged ? "converged" : "NOT converged") << " in "
              << solution.iterations_used
              << " iterations, residual = " << solution.final_residual
              << ", theta(T) = "
              << solution.aggregates.theta[config.grid.n_steps] << "\n";
    all_converged = all_converged && solution.converged;
    initial = solution.trajectory.states.back();
  }
  return all_converged ? kExitOk : kExitNotConverged;
}

int run_baseline(const std::string& config_path,
                 const std::string& out_override) {
  seli::LoadedConfig loaded = load_or_die(config_path);
  seli::ScenarioConfig config = loaded.config;
  const std::filesystem::path out =
      out_override.empty() ? config.output_dir : out_override;

  seli::BaselineResult baseline = seli::baseline_evaluation(config);
  const seli::ControlPolicy ones = seli::ControlPolicy::constant(
      config.grid, config.network.n_classes(), 1.0);

  seli::RunManifest manifest;
  manifest.config = config;
  manifest.defaults_applied = loaded.defaults_applied;
  manifest.files.push_back(seli::write_text_file(
      out, "baseline_mean_field.csv",
      seli::io_detail::mean_field_csv(baseline.trajectory, ones,
                                      config.network)));
  manifest.files.push_back(seli::write_text_file(
      out, "baseline_aggregates.csv",
      seli::io_detail::aggregates_csv(config.grid, baseline.aggregates,
                                      baseline.aggregates)));
  {
    std::string qoi_csv = "t,degree,type,qoi\n";
    for (int j = 0; j < config.grid.n_points(); ++j)
      for (std::size_t c = 0; c < config.network.n_classes(); ++c)
        qoi_csv += seli::io_detail::fmt9(config.grid.time_at(j)) + ',' +
                   std::to_string(config.network.classes[c].degree) + ',' +
                   std::to_string(config.network.classes[c].type_id) + ',' +
                   seli::io_detail::fmt9(baseline.qoi[j][c]) + '\n';
    manifest.files.push_back(
        seli::write_text_file(out, "baseline_qoi.csv", qoi_csv));

    std::string cost_csv = "degree,type,cumulative_cost\n";
    for (std::size_t c = 0; c < config.network.n_classes(); ++c)
      cost_csv += std::to_string(config.network.classes[c].degree) + ',' +
                  std::to_string(config.network.classes[c].type_id) + ',' +
                  seli::io_detail::fmt9(baseline.cumulative_cost[c]) + '\n';
    manifest.files.push_back(
        seli::write_text_file(out, "baseline_cost.csv", cost_csv));
  }
  seli::write_manifest(manifest, out);
  std::cout << "baseline theta(T) = "
            << baseline.aggregates.theta[config.grid.n_steps] << "\n";
  return kExitOk;
}

int run_simulate(const std::string& config_path, long long n, int replicas,
                 std::uint64_t seed, bool use_baseline,
                 const std::string& out_override) {
  seli::LoadedConfig loaded = load_or_die(config_path);
  seli::ScenarioConfig config = loaded.config;
  const std::filesystem::path out =
      out_override.empty() ? config.output_dir : out_override;

  seli::ControlPolicy policy;
  seli::MeanFieldTrajectory reference;
  seli::AggregatePath reference_aggregates;
  if (use_baseline) {
    policy = seli::ControlPolicy::constant(config.grid,
                                           config.network.n_classes(), 1.0);
    seli::ForwardResult fwd =
        seli::integrate_forward(policy, config.network, config.grid);
    reference = std::move(fwd.trajectory);
    reference_aggregates = std::move(fwd.aggregates);
  } else {
    seli::EquilibriumSolution solution = seli::solve_mfe(config);
    if (!solution.converged) {
      std::cerr << "equilibrium solve did not converge (residual "
                << solution.final_residual << ")\n";
      return kExitNotConverged;
    }
    policy = solution.policy;
    reference = std::move(solution.trajectory);
    reference_aggregates = std::move(solution.aggregates);
  }

  seli::FiniteSimResult sim =
      seli::simulate(config, policy, n, replicas, seed);
  const std::vector<double> deviation =
      seli::mean_field_deviation(sim, reference);

  std::string csv = "t,theta_sim,eta_sim,theta_mf,deviation\n";
  for (int j = 0; j < config.grid.n_points(); ++j)
    csv += seli::io_detail::fmt9(config.grid.time_at(j)) + ',' +
           seli::io_detail::fmt9(sim.theta_mean[j]) + ',' +
           seli::io_detail::fmt9(sim.eta_mean[j]) + ',' +
           seli::io_detail::fmt9(reference_aggregates.theta[j]) + ',' +
           seli::io_detail::fmt9(deviation[j]) + '\n';

  seli::RunManifest manifest;
  manifest.config = config;
  manifest.defaults_applied = loaded.defaults_applied;
  manifest.files.push_back(
      seli::write_text_file(out, "simulation.csv", csv));
  seli::write_manifest(manifest, out);

  double sup_dev = 0.0;
  for (double d : deviation) sup_dev = std::max(sup_dev, d);
  std::cout << "N = " << n << ", replicas = " << replicas
            << ", sup deviation = " << sup_dev << "\n";
  return kExitOk;
}

int run_sweep_cmd(const std::string& config_path, const std::string& param,
                  int degree, const std::vector<double>& values,
                  const std::string& out_override) {
  seli::LoadedConfig loaded = load_or_die(config_path);
  seli::ScenarioConfig config = loaded.config;
  const std::filesystem::path out =
      out_override.empty() ? config.output_dir : out_override;

  const seli::SweepParameter parameter = param == "beta_E"
                                             ? seli::SweepParameter::BetaE
                                             : seli::SweepParameter::Delta;
  std::vector<seli::SweepPoint> points =
      seli::run_sweep(config, parameter, degree, values);

  seli::RunManifest manifest;
  manifest.config = config;
  manifest.defaults_applied = loaded.defaults_applied;
  manifest.files.push_back(seli::write_text_file(
      out, std::string("sweep_") + param + ".csv",
      seli::sweep_csv(points, config.network)));
  seli::write_manifest(manifest, out);

  bool all_converged = true;
  for (const seli::SweepPoint& p : points) {
    std::cout << param << " = " << p.value << ": theta(T) = "
              << p.theta_at_horizon
              << (p.converged ? "" : " (NOT converged)") << "\n";
    all_converged = all_converged && p.converged;
  }
  return all_converged ? kExitOk : kExitNotConverged;
}

int run_calibrate(const std::string& config_path,
                  const std::vector<double>& targets) {
  seli::LoadedConfig loaded = load_or_die(config_path);
  try {
    seli::CalibrationResult result =
        seli::calibrate_nu(loaded.config, targets);
    std::cout << "nu = " << result.nu << "\n";
    for (std::size_t c = 0; c < result.per_class_error.size(); ++c)
      std::cout << "class " << c << " error = " << result.per_class_error[c]
                << "\n";
    return kExitOk;
  } catch (const seli::CalibrationFailed& failed) {
    std::cerr << failed.what() << "\n";
    std::cerr << "best nu = " << failed.best_nu << "\n";
    for (std::size_t c = 0; c < failed.per_class_error.size(); ++c)
      std::cerr << "class " << c << " error = " << failed.per_class_error[c]
                << "\n";
    return kExitCriteriaFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field game solver for misinformation spread on "
               "degree-heterogeneous networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, param = "delta";
  int intervals = 1, replicas = 20, degree = 20;
  long long n = 10000;
  std::uint64_t seed = 20177;
  bool use_baseline = false;
  std::vector<double> values, targets;

  CLI::App* solve = app.add_subcommand("solve", "compute the mean-field equilibrium");
  solve->add_option("config", config_path, "scenario JSON file")->required();
  solve->add_option("--out", out_dir, "output directory override");
  solve->add_option("--intervals", intervals,
                    "number of chained horizons (initial state carried over)")
      ->check(CLI::PositiveNumber);

  CLI::App* baseline = app.add_subcommand("baseline", "evaluate the always-accept policy");
  baseline->add_option("config", config_path, "scenario JSON file")->required();
  baseline->add_option("--out", out_dir, "output directory override");

  CLI::App* simulate = app.add_subcommand("simulate", "finite-population stochastic simulation");
  simulate->add_option("config", config_path, "scenario JSON file")->required();
  simulate->add_option("--n", n, "population size")->required();
  simulate->add_option("--replicas", replicas, "independent replicas")->required();
  simulate->add_option("--seed", seed, "RNG seed")->required();
  simulate->add_flag("--baseline", use_baseline, "simulate the always-accept policy");
  simulate->add_option("--out", out_dir, "output directory override");

  CLI::App* sweep = app.add_subcommand("sweep", "equilibrium sweep over one parameter");
  sweep->add_option("config", config_path, "scenario JSON file")->required();
  sweep->add_option("--param", param, "swept parameter")
      ->required()
      ->check(CLI::IsMember({"beta_E", "delta"}));
  sweep->add_option("--class", degree, "degree of the swept classes")->required();
  sweep->add_option("--values", values, "parameter values")->required()->delimiter(',');
  sweep->add_option("--out", out_dir, "output directory override");

  CLI::App* calibrate = app.add_subcommand("calibrate", "fit the shared curing rate to baseline targets");
  calibrate->add_option("config", config_path, "scenario JSON file")->required();
  calibrate->add_option("--targets", targets, "baseline infected fractions at the horizon")
      ->required()
      ->delimiter(',');

  CLI::App* reproduce = app.add_subcommand("reproduce", "run the full verification and emit every artifact");
  reproduce->add_option("--out", out_dir, "output directory (default: reproduction)");
  reproduce->add_option("--seed", seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(config_path, out_dir, intervals);
    if (baseline->parsed()) return run_baseline(config_path, out_dir);
    if (simulate->parsed())
      return run_simulate(config_path, n, replicas, seed, use_baseline, out_dir);
    if (sweep->parsed())
      return run_sweep_cmd(config_path, param, degree, values, out_dir);
    if (calibrate->parsed()) return run_calibrate(config_path, targets);
    if (reproduce->parsed()) {
      const std::filesystem::path out =
          out_dir.empty() ? std::filesystem::path("reproduction")
                          : std::filesystem::path(out_dir);
      seli::ReproduceResult result = seli::reproduce(out, seed, &std::cout);
      seli::print_verdict(result.artifacts.rows, std::cout);
      for (const std::string& note : result.artifacts.notes)
        std::cout << "[note] " << note << "\n";
      std::cout << "artifacts written to " << out.string() << "\n";
      return result.exit_code;
    }
  } catch (const seli::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  } catch (const seli::InvalidConfig& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  } catch (const seli::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

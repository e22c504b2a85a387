#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "seli/calibration.hpp"
#include "seli/harness.hpp"
#include "seli/io.hpp"
#include "seli/model.hpp"
#include "seli/solver.hpp"

using namespace seli;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "seli_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_scratch(const std::string& name,
                                    const std::string& content) {
  const auto path = scratch_dir("configs") / name;
  std::ofstream os(path, std::ios::binary);
  os << content;
  return path;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    rows.push_back(fields);
  }
  return rows;
}

ScenarioConfig tiny_scenario() {
  ScenarioConfig config = default_scenario();
  config.grid = TimeGrid{0.9, 300};
  return validate(config);
}

}  // namespace

TEST_CASE("bundled scenario file round-trips to the built-in scenario") {
  const LoadedConfig loaded =
      load_config(std::filesystem::path(SELI_SOURCE_DIR) / "configs" /
                  "default.json");
  CHECK(loaded.config == default_scenario());
  // the file leaves the complementary probabilities implicit
  CHECK(loaded.defaults_applied.size() == 8);
}

TEST_CASE("config loading rejects bad input") {
  SECTION("out-of-range probability") {
    const auto path = write_scratch("bad_beta.json", R"({
      "horizon": 0.9, "weights": [1.0],
      "classes": [{"degree": 2, "lambda": 0.1, "delta": 0.0,
                   "beta_E": 1.2, "beta_L": 0.5,
                   "infection_cost": 1.0, "target_qoi": 2.0}]
    })");
    CHECK_THROWS_AS(load_config(path), InvalidConfig);
  }

  SECTION("unknown key names the line") {
    const auto path = write_scratch("unknown.json",
                                    "{\n  \"horizon\": 0.9,\n  \"weights\": [1.0],\n"
                                    "  \"classes\": [],\n  \"mystery\": 1\n}");
    try {
      load_config(path);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 5);
      CHECK(std::string(e.what()).find("mystery") != std::string::npos);
    }
  }

  SECTION("syntax errors carry a line number") {
    const auto path = write_scratch("syntax.json", "{\n  \"horizon\": 0.9,\n  !\n}");
    try {
      load_config(path);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 3);
    }
  }

  SECTION("missing required key") {
    const auto path = write_scratch("missing.json", R"({
      "horizon": 0.9, "weights": [1.0],
      "classes": [{"degree": 2, "lambda": 0.1, "delta": 0.0,
                   "beta_E": 0.5, "beta_L": 0.5, "target_qoi": 2.0}]
    })");
    CHECK_THROWS_AS(load_config(path), ParseError);
  }

  SECTION("wrong value type") {
    const auto path = write_scratch("type.json", R"({
      "horizon": "soon", "weights": [1.0],
      "classes": [{"degree": 2, "lambda": 0.1, "delta": 0.0,
                   "beta_E": 0.5, "beta_L": 0.5,
                   "infection_cost": 1.0, "target_qoi": 2.0}]
    })");
    CHECK_THROWS_AS(load_config(path), ParseError);
  }

  SECTION("nonexistent file") {
    CHECK_THROWS_AS(load_config("/nonexistent/nowhere.json"), Error);
  }
}

TEST_CASE("omitted optional keys fall back to defaults and are recorded") {
  const auto path = write_scratch("defaults.json", R"({
    "horizon": 0.9, "weights": [1.0],
    "classes": [{"degree": 2, "lambda": 0.1, "delta": 0.0,
                 "beta_E": 0.5, "beta_L": 0.5,
                 "infection_cost": 1.0, "target_qoi": 2.0}]
  })");
  const LoadedConfig loaded = load_config(path);
  CHECK(loaded.config.network.classes[0].nu == 0.5);
  bool noted = false;
  for (const std::string& item : loaded.defaults_applied)
    if (item.find(".nu") != std::string::npos) noted = true;
  CHECK(noted);
}

TEST_CASE("emitted artifacts are byte deterministic") {
  const ScenarioConfig config = tiny_scenario();
  const EquilibriumSolution mfe = solve_mfe(config);
  const BaselineResult baseline = baseline_evaluation(config);

  const auto out_a = scratch_dir("emit_a");
  const auto out_b = scratch_dir("emit_b");
  const auto files_a = emit_trajectories(mfe, baseline, config, out_a);
  const auto files_b = emit_trajectories(mfe, baseline, config, out_b);

  REQUIRE(files_a.size() == files_b.size());
  for (std::size_t i = 0; i < files_a.size(); ++i) {
    CHECK(files_a[i].path == files_b[i].path);
    CHECK(files_a[i].digest == files_b[i].digest);
  }

  SECTION("manifest digests match the bytes on disk") {
    for (const EmittedFile& f : files_a)
      CHECK(io_detail::fnv1a64(slurp(out_a / f.path)) == f.digest);
  }
}

TEST_CASE("emitted CSVs parse back to the stored values") {
  const ScenarioConfig config = tiny_scenario();
  const EquilibriumSolution mfe = solve_mfe(config);
  const BaselineResult baseline = baseline_evaluation(config);
  const auto out = scratch_dir("roundtrip");
  emit_trajectories(mfe, baseline, config, out);

  SECTION("mean_field.csv schema and sampled values") {
    const auto rows = parse_csv(slurp(out / "mean_field.csv"));
    REQUIRE(rows.size() ==
            1 + static_cast<std::size_t>(config.grid.n_points()) *
                    config.network.n_classes());
    CHECK(rows[0] == std::vector<std::string>{"t", "degree", "type", "m_S",
                                              "m_E", "m_L", "m_I", "alpha"});
    // spot-check a mid-trajectory row against the solution within print precision
    const int j = 150;
    const std::size_t c = 2;
    const auto& row = rows[1 + j * config.network.n_classes() + c];
    CHECK(std::stod(row[0]) == Catch::Approx(config.grid.time_at(j)));
    CHECK(std::stoi(row[1]) == config.network.classes[c].degree);
    for (int l = 0; l < kNumStates; ++l)
      CHECK(std::stod(row[3 + l]) ==
            Catch::Approx(mfe.trajectory.states[j][c][l]).epsilon(1e-8));
    CHECK(std::stod(row[7]) ==
          Catch::Approx(mfe.policy.alpha[j][c]).epsilon(1e-8));
  }

  SECTION("aggregates carry both variants") {
    const auto rows = parse_csv(slurp(out / "aggregates.csv"));
    CHECK(rows[0] == std::vector<std::string>{"t", "variant", "theta", "eta"});
    CHECK(rows[1][1] == "mfe");
    CHECK(rows[2][1] == "baseline");
  }

  SECTION("initial baseline QoI of the degree-15 class") {
    const auto rows = parse_csv(slurp(out / "qoi.csv"));
    CHECK(rows[0] == std::vector<std::string>{"t", "degree", "type", "qoi_mfe",
                                              "qoi_baseline"});
    const auto& row = rows[1 + 2];  // t = 0, third class
    REQUIRE(row[1] == "15");
    CHECK(std::stod(row[4]) == Catch::Approx(15.6).margin(1e-6));
    CHECK(std::abs(std::stod(row[4]) - 16.0) <= 0.5);
  }

  SECTION("summary has per-class rows plus a network row") {
    const auto rows = parse_csv(slurp(out / "summary.csv"));
    REQUIRE(rows.size() == 2 + config.network.n_classes());
    CHECK(rows.back()[0] == "network");
  }
}

TEST_CASE("attacker-free run emits an all-zero theta column") {
  ScenarioConfig config = tiny_scenario();
  for (NodeClassParams& c : config.network.classes) c.lambda = 0.0;
  config = validate(config);
  const EquilibriumSolution mfe = solve_mfe(config);
  const BaselineResult baseline = baseline_evaluation(config);
  const auto out = scratch_dir("clean");
  emit_trajectories(mfe, baseline, config, out);
  const auto rows = parse_csv(slurp(out / "aggregates.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][2] == "0");
}

TEST_CASE("calibration") {
  const ScenarioConfig config = tiny_scenario();

  SECTION("recovers the rate that generated the targets") {
    ScenarioConfig generator = config;
    for (NodeClassParams& c : generator.network.classes) c.nu = 0.5;
    const ControlPolicy ones = ControlPolicy::constant(
        generator.grid, generator.network.n_classes(), 1.0);
    const ForwardResult fwd =
        integrate_forward(ones, generator.network, generator.grid);
    std::vector<double> targets;
    for (std::size_t c = 0; c < generator.network.n_classes(); ++c)
      targets.push_back(fwd.trajectory.states[generator.grid.n_steps][c][3]);

    const CalibrationResult result = calibrate_nu(config, targets);
    CHECK(result.nu == Catch::Approx(0.5).margin(1e-3));
    for (double err : result.per_class_error)
      CHECK(std::abs(err) <= 1e-4);
  }

  SECTION("unreachable targets fail with the best point attached") {
    try {
      calibrate_nu(config, {0.99, 0.995, 0.995, 0.995});
      FAIL("expected CalibrationFailed");
    } catch (const CalibrationFailed& failed) {
      CHECK(failed.best_nu < 0.05);  // slow curing is the best it can do
      CHECK(failed.per_class_error.size() == 4);
    }
  }

  SECTION("targets must be interior probabilities") {
    CHECK_THROWS_AS(calibrate_nu(config, {0.0, 0.5, 0.5, 0.5}), InvalidConfig);
    CHECK_THROWS_AS(calibrate_nu(config, {0.5, 0.5}), InvalidConfig);
  }
}

TEST_CASE("a single-value sweep equals a plain solve") {
  const ScenarioConfig config = tiny_scenario();
  const auto points = run_sweep(config, SweepParameter::Delta, 20, {0.3});
  REQUIRE(points.size() == 1);

  const EquilibriumSolution solution = solve_mfe(config);  // delta_20 is 0.3
  const int last = config.grid.n_steps;
  CHECK(points[0].theta_at_horizon == solution.aggregates.theta[last]);
  for (std::size_t c = 0; c < config.network.n_classes(); ++c)
    CHECK(points[0].alpha_at_horizon[c] == solution.policy.alpha[last][c]);
}

TEST_CASE("sweep csv lists one row per value and class") {
  const ScenarioConfig config = tiny_scenario();
  const auto points = run_sweep(config, SweepParameter::BetaE, 20, {0.1, 0.5});
  const auto rows = parse_csv(sweep_csv(points, config.network));
  CHECK(rows[0] == std::vector<std::string>{"value", "degree", "type",
                                            "theta_at_T", "qoi_at_T",
                                            "alpha_at_T"});
  CHECK(rows.size() == 1 + 2 * config.network.n_classes());
}

TEST_CASE("convergence csv schema") {
  std::vector<ConvergenceRow> rows = {{100, 0.5, 0.1}, {1000, 0.05, 0.01}};
  const auto parsed = parse_csv(convergence_csv(rows));
  CHECK(parsed[0] ==
        std::vector<std::string>{"n", "sup_deviation", "sup_theta_err"});
  CHECK(parsed.size() == 3);
  CHECK(parsed[1][0] == "100");
}

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "seli/harness.hpp"
#include "seli/model.hpp"

using namespace seli;

TEST_CASE("default scenario validates with the expected mean degree") {
  const ScenarioConfig config = default_scenario();
  CHECK(config.network.mean_degree == Catch::Approx(8.4).margin(1e-12));
  CHECK(config.network.n_classes() == 4);
  CHECK(config.grid.n_steps == 900);
  CHECK(config.grid.dt() == Catch::Approx(1e-3));
}

TEST_CASE("default scenario carries the published class parameters") {
  const ScenarioConfig config = default_scenario();
  const NodeClassParams& k20 = config.network.classes[3];
  CHECK(k20.degree == 20);
  CHECK(k20.beta_E == 0.1);
  CHECK(k20.beta_L == 0.8);
  CHECK(k20.delta == 0.3);
  CHECK(k20.infection_cost == 30.0);
  CHECK(k20.target_qoi == 20.0);
  // gamma_L is forced by the complementarity invariant
  CHECK(k20.gamma_L == Catch::Approx(0.2));

  const NodeClassParams& k1 = config.network.classes[0];
  CHECK(k1.delta == 0.0);  // the delay penalty kappa*delta vanishes for it
  CHECK(k1.kappa * k1.delta == 0.0);
}

TEST_CASE("single-class network validates") {
  ScenarioConfig config;
  NodeClassParams c;
  c.degree = 1;
  c.beta_E = c.gamma_E = 0.5;
  c.beta_L = c.gamma_L = 0.5;
  config.network.classes = {c};
  config.network.weights = {1.0};
  const ScenarioConfig validated = validate(config);
  CHECK(validated.network.mean_degree == Catch::Approx(1.0));
}

TEST_CASE("unnormalized weights are rejected with the offending sum") {
  ScenarioConfig config = default_scenario();
  config.network.classes.resize(2);
  config.network.weights = {0.5, 0.6};
  try {
    validate(config);
    FAIL("expected InvalidConfig");
  } catch (const InvalidConfig& e) {
    REQUIRE(e.violations.size() == 1);
    CHECK(e.violations[0].find("weights sum 1.1") != std::string::npos);
  }
}

TEST_CASE("validate lists every violated invariant") {
  ScenarioConfig config = default_scenario();
  config.network.classes[0].delta = 1.0;        // delta must stay below 1
  config.network.classes[1].gamma_E = 0.5;      // breaks beta_E + gamma_E = 1
  config.network.classes[2].nu = -1.0;
  config.network.weights = {0.5, 0.5, 0.5, 0.5};
  config.tolerance = 0.0;
  try {
    validate(config);
    FAIL("expected InvalidConfig");
  } catch (const InvalidConfig& e) {
    CHECK(e.violations.size() >= 5);
  }
}

TEST_CASE("duplicate (degree, type) pairs are rejected") {
  ScenarioConfig config = default_scenario();
  config.network.classes[1] = config.network.classes[0];
  CHECK_THROWS_AS(validate(config), InvalidConfig);
}

TEST_CASE("probability fields outside [0,1] are rejected") {
  ScenarioConfig config = default_scenario();
  config.network.classes[0].beta_E = 1.2;
  config.network.classes[0].gamma_E = -0.2;
  CHECK_THROWS_AS(validate(config), InvalidConfig);
}

TEST_CASE("validate is idempotent") {
  const ScenarioConfig once = validate(default_scenario());
  const ScenarioConfig twice = validate(once);
  CHECK(once == twice);
}

TEST_CASE("randomized scenarios satisfy the constructed invariants") {
  std::mt19937_64 rng(991);
  for (int i = 0; i < 100; ++i) {
    const ScenarioConfig config = testgen::random_scenario(rng);
    double sum = 0.0;
    for (double w : config.network.weights) sum += w;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(config.network.mean_degree > 0.0);
    for (const NodeClassParams& c : config.network.classes) {
      CHECK(std::abs(c.beta_E + c.gamma_E - 1.0) <= 1e-12);
      CHECK(std::abs(c.beta_L + c.gamma_L - 1.0) <= 1e-12);
      CHECK(c.delta < 1.0);
    }
  }
}

TEST_CASE("effective target shifts only when both flags are set") {
  NodeClassParams c;
  c.degree = 10;
  c.target_qoi = 10.0;
  c.scaling_enabled = true;
  c.shift_target = false;
  CHECK(c.effective_target() == 10.0);
  CHECK(c.qoi_shift() == 12.0);
  c.shift_target = true;
  CHECK(c.effective_target() == 22.0);
  c.scaling_enabled = false;
  CHECK(c.effective_target() == 10.0);
  CHECK(c.qoi_shift() == 0.0);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "seli/finite_population.hpp"
#include "seli/harness.hpp"
#include "seli/model.hpp"
#include "seli/solver.hpp"

using namespace seli;

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig config = default_scenario();
  config.grid = TimeGrid{0.9, 300};
  return validate(config);
}

}  // namespace

TEST_CASE("population allocation follows the largest remainder") {
  const NetworkModel& net = default_scenario().network;

  CHECK(allocate_population(net, 10) == std::vector<long long>{4, 3, 2, 1});
  CHECK(allocate_population(net, 10000) ==
        std::vector<long long>{4000, 3000, 2000, 1000});

  SECTION("single class gets everything") {
    ScenarioConfig single;
    NodeClassParams c;
    c.degree = 3;
    single.network.classes = {c};
    single.network.weights = {1.0};
    single.grid = TimeGrid{0.5, 100};
    single = validate(single);
    CHECK(allocate_population(single.network, 7) == std::vector<long long>{7});
  }

  SECTION("allocation error is bounded by 1/N") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 20; ++i) {
      const ScenarioConfig config = testgen::random_scenario(rng);
      const long long n =
          50 * static_cast<long long>(config.network.n_classes()) +
          static_cast<long long>(rng() % 1000);
      const auto sizes = allocate_population(config.network, n);
      long long total = 0;
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        total += sizes[c];
        CHECK(std::abs(static_cast<double>(sizes[c]) / n -
                       config.network.weights[c]) <= 1.0 / n + 1e-12);
      }
      CHECK(total == n);
    }
  }

  SECTION("an empty class is rejected") {
    ScenarioConfig skewed;
    NodeClassParams a, b;
    a.degree = 1;
    b.degree = 2;
    skewed.network.classes = {a, b};
    skewed.network.weights = {1.0 - 1e-6, 1e-6};
    skewed.grid = TimeGrid{0.5, 100};
    skewed = validate(skewed);
    CHECK_THROWS_AS(allocate_population(skewed.network, 10), InvalidPopulation);
  }
}

TEST_CASE("empirical aggregates") {
  const NetworkModel& net = default_scenario().network;
  PopulationCounts population;
  population.class_sizes = {4, 3, 2, 1};
  population.counts = {{4, 0, 0, 0}, {3, 0, 0, 0}, {2, 0, 0, 0}, {1, 0, 0, 0}};

  SECTION("all susceptible") {
    const auto [theta, eta] = empirical_aggregates(population, net);
    CHECK(theta == 0.0);
    CHECK(eta == 1.0);
  }
  SECTION("all infected") {
    for (auto& c : population.counts) std::swap(c[0], c[3]);
    const auto [theta, eta] = empirical_aggregates(population, net);
    CHECK(theta == 1.0);
    CHECK(eta == 0.0);
  }
  SECTION("only the degree-1 nodes infected") {
    population.counts[0] = {0, 0, 0, 4};
    const auto [theta, eta] = empirical_aggregates(population, net);
    CHECK(theta == Catch::Approx(4.0 / 84.0).epsilon(1e-12));
    (void)eta;
  }
}

TEST_CASE("simulation determinism and conservation") {
  const ScenarioConfig config = small_scenario();
  const ControlPolicy policy =
      ControlPolicy::constant(config.grid, config.network.n_classes(), 0.4);

  const FiniteSimResult a = simulate(config, policy, 500, 3, 99);
  const FiniteSimResult b = simulate(config, policy, 500, 3, 99);

  SECTION("same seed reproduces the trajectories exactly") {
    REQUIRE(a.counts.size() == b.counts.size());
    for (std::size_t r = 0; r < a.counts.size(); ++r)
      CHECK(a.counts[r] == b.counts[r]);
    CHECK(a.theta_mean == b.theta_mean);
  }

  SECTION("per-class totals are conserved at every step") {
    for (const auto& replica : a.counts)
      for (const auto& point : replica)
        for (std::size_t c = 0; c < point.size(); ++c) {
          long long total = 0;
          for (long long v : point[c]) {
            CHECK(v >= 0);
            total += v;
          }
          CHECK(total == a.class_sizes[c]);
        }
  }

  SECTION("different seeds explore different paths") {
    const FiniteSimResult c = simulate(config, policy, 500, 3, 100);
    CHECK(a.counts != c.counts);
  }
}

TEST_CASE("attacker-free simulation never infects anyone") {
  ScenarioConfig config = small_scenario();
  for (NodeClassParams& c : config.network.classes) c.lambda = 0.0;
  config = validate(config);
  const ControlPolicy policy =
      ControlPolicy::constant(config.grid, config.network.n_classes(), 1.0);

  const FiniteSimResult sim = simulate(config, policy, 400, 5, 7);
  for (const auto& replica : sim.counts)
    for (const auto& point : replica)
      for (const auto& counts : point) {
        CHECK(counts[1] == 0);
        CHECK(counts[3] == 0);
      }

  SECTION("deviation from the mean field is exactly zero") {
    const ForwardResult mf =
        integrate_forward(policy, config.network, config.grid);
    const std::vector<double> deviation =
        mean_field_deviation(sim, mf.trajectory);
    for (double d : deviation) CHECK(d == 0.0);
  }
}

TEST_CASE("without curing the infected count never drops") {
  ScenarioConfig config = small_scenario();
  for (NodeClassParams& c : config.network.classes) c.nu = 0.0;
  config = validate(config);
  const ControlPolicy ones =
      ControlPolicy::constant(config.grid, config.network.n_classes(), 1.0);

  const FiniteSimResult sim = simulate(config, ones, 300, 4, 11);
  for (const auto& replica : sim.counts)
    for (std::size_t j = 0; j + 1 < replica.size(); ++j)
      for (std::size_t c = 0; c < replica[j].size(); ++c)
        CHECK(replica[j][c][3] <= replica[j + 1][c][3]);
}

TEST_CASE("rounded mean-field counts sit within the rounding bound") {
  const ScenarioConfig config = small_scenario();
  const ControlPolicy policy =
      ControlPolicy::constant(config.grid, config.network.n_classes(), 0.6);
  const ForwardResult mf =
      integrate_forward(policy, config.network, config.grid);

  const long long n = 1000;
  FiniteSimResult fake;
  fake.grid = config.grid;
  fake.class_sizes = allocate_population(config.network, n);
  fake.total_nodes = n;
  fake.replicas = 1;
  fake.counts.resize(1);
  for (int j = 0; j < config.grid.n_points(); ++j) {
    std::vector<ClassCounts> point(config.network.n_classes());
    for (std::size_t c = 0; c < point.size(); ++c) {
      long long assigned = 0;
      for (int l = 0; l < kNumStates - 1; ++l) {
        point[c][l] = std::llround(mf.trajectory.states[j][c][l] *
                                   fake.class_sizes[c]);
        assigned += point[c][l];
      }
      point[c][3] = fake.class_sizes[c] - assigned;  // keep totals exact
    }
    fake.counts[0].push_back(point);
  }

  const std::vector<double> deviation =
      mean_field_deviation(fake, mf.trajectory);
  long long min_size = *std::min_element(fake.class_sizes.begin(),
                                         fake.class_sizes.end());
  // rounding three states independently can push the remainder state to
  // about twice the half-unit bound
  const double bound = static_cast<double>(config.network.n_classes()) *
                       std::pow(2.0 / min_size, 2);
  for (double d : deviation) CHECK(d <= bound);
}

TEST_CASE("deviation shrinks as the population grows") {
  const ScenarioConfig config = small_scenario();
  const ControlPolicy policy =
      ControlPolicy::constant(config.grid, config.network.n_classes(), 0.5);
  const ForwardResult mf =
      integrate_forward(policy, config.network, config.grid);

  const auto rows = convergence_study(config, policy, mf.trajectory,
                                      mf.aggregates, {100, 1000}, 10, 13);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 100);
  CHECK(rows[0].sup_deviation > rows[1].sup_deviation);

  SECTION("single-entry study is a single row") {
    const auto single = convergence_study(config, policy, mf.trajectory,
                                          mf.aggregates, {100}, 5, 13);
    CHECK(single.size() == 1);
  }

  SECTION("attacker-free always-accept study reports zero deviation") {
    // with no attacker and full acceptance every flow vanishes, so the finite
    // population and the mean field both sit at all-susceptible forever
    ScenarioConfig clean = small_scenario();
    for (NodeClassParams& c : clean.network.classes) c.lambda = 0.0;
    clean = validate(clean);
    const ControlPolicy ones =
        ControlPolicy::constant(clean.grid, clean.network.n_classes(), 1.0);
    const ForwardResult cmf = integrate_forward(ones, clean.network, clean.grid);
    const auto zero_rows = convergence_study(clean, ones, cmf.trajectory,
                                             cmf.aggregates, {100, 1000}, 5, 13);
    for (const ConvergenceRow& row : zero_rows) {
      CHECK(row.sup_deviation == 0.0);
      CHECK(row.sup_theta_error == 0.0);
    }
  }
}

TEST_CASE("simulation guards") {
  const ScenarioConfig config = small_scenario();

  SECTION("policy must live on the simulation grid") {
    const ControlPolicy wrong = ControlPolicy::constant(
        TimeGrid{0.9, 299}, config.network.n_classes(), 0.5);
    CHECK_THROWS_AS(simulate(config, wrong, 100, 1, 1), GridMismatch);
  }
  SECTION("too coarse a grid is refused") {
    ScenarioConfig coarse = default_scenario();
    coarse.grid.n_steps = 100;  // dt ~ 9e-3 against exit rates ~ 21
    const ControlPolicy policy = ControlPolicy::constant(
        coarse.grid, coarse.network.n_classes(), 0.5);
    CHECK_THROWS_AS(simulate(coarse, policy, 100, 1, 1), StepTooLarge);
  }
  SECTION("deviation requires matching grids") {
    const ControlPolicy policy = ControlPolicy::constant(
        config.grid, config.network.n_classes(), 0.5);
    const FiniteSimResult sim = simulate(config, policy, 100, 1, 1);
    MeanFieldTrajectory wrong;
    wrong.grid = TimeGrid{0.9, 299};
    CHECK_THROWS_AS(mean_field_deviation(sim, wrong), GridMismatch);
  }
}

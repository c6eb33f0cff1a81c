#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "analytics.hpp"
#include "dual.hpp"
#include "model.hpp"
#include "pam.hpp"

using namespace coordsim;

TEST_CASE("zero model keeps the frequency constant") {
  ModelSpec spec(GraphSpec::complete(2));
  Rng rng(1);
  DualPath path = simulate_dual(spec, {{0.3, 0.8}}, 2.0, {}, rng, {0.5, 1.0, 2.0});
  for (const FrequencyState& s : path.samples) {
    CHECK(s.x[0] == 0.3);
    CHECK(s.x[1] == 0.8);
  }
  CHECK(path.jump_count == 0);
  CHECK(path.clamp_total == 0.0);
}

TEST_CASE("independent mutation drives the deterministic relaxation to one") {
  // dx = (1 - x) dt: x(t) = 1 - (1 - x0) e^{-t}
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_death(0, AtomicMeasure::dirac(0.0, 1.0));
  DualConfig cfg;
  cfg.dt = 1e-4;
  Rng rng(2);
  double x0 = 0.2;
  DualPath path = simulate_dual(spec, {{x0}}, 1.0, cfg, rng);
  double expected = 1.0 - (1.0 - x0) * std::exp(-1.0);
  CHECK(std::abs(path.final_state.x[0] - expected) < 1e-3);
}

TEST_CASE("moment estimate at time zero is exact") {
  ModelSpec spec = presets::yule(1.0);
  EstimateWithCI e = moment_estimate(spec, {{0.6}}, {3}, 0.0, 100, {}, 5);
  CHECK(e.mean == doctest::Approx(0.216).epsilon(1e-12));
  CHECK(e.se == 0.0);

  // the zero exponent gives the constant observable 1
  ModelSpec two(GraphSpec::complete(2));
  two.set_death(0, AtomicMeasure::dirac(0.0, 1.0));
  EstimateWithCI one = moment_estimate(two, {{0.3, 0.9}}, {0, 0}, 1.0, 50, {}, 6);
  CHECK(one.mean == doctest::Approx(1.0));
  CHECK(one.se == 0.0);
}

TEST_CASE("deterministic dual moments match the binomial thinning law") {
  // with mutation only, E_x[X_t^n] = (1 - (1 - x) e^{-t})^n, which equals the
  // forward binomial factorization (x e^{-t} + 1 - e^{-t})^n
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_death(0, AtomicMeasure::dirac(0.0, 1.0));
  DualConfig cfg;
  cfg.dt = 1e-4;
  double x = 0.4, t = 0.8;
  int n = 4;
  EstimateWithCI e = moment_estimate(spec, {{x}}, {n}, t, 100, cfg, 7);
  double closed = std::pow(x * std::exp(-t) + 1.0 - std::exp(-t), n);
  CHECK(std::abs(e.mean - closed) < 1e-3);
}

TEST_CASE("coordinated mutation multiplies the deficit") {
  // D = p delta_p: jumps x -> x + p(1-x) at rate 1, so
  // 1 - X_t = (1 - x0) (1-p)^{N_t} with a unit-rate Poisson N
  double p = 0.4, x0 = 0.1, t = 2.0;
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_death(0, AtomicMeasure::dirac(p, p));
  long long n_replicas = 40000;
  RunningStats deficit;
  for (long long k = 0; k < n_replicas; ++k) {
    Rng rng = replica_stream(11, k);
    DualPath path = simulate_dual(spec, {{x0}}, t, {}, rng);
    deficit.add(1.0 - path.final_state.x[0]);
  }
  double expected = (1.0 - x0) * std::exp(-p * t);
  CHECK(std::abs(deficit.mean() - expected) < 3.0 * deficit.se());
}

TEST_CASE("pure-jump duals do not depend on the drift step") {
  ModelSpec spec(GraphSpec::complete(2));
  spec.set_death(0, AtomicMeasure::dirac(0.5, 1.0));
  spec.set_migration(0, 1, AtomicMeasure::dirac(1.0, 0.5));
  spec.set_coalescence(1, AtomicMeasure::dirac(0.25, 0.5));
  DualConfig coarse, fine;
  coarse.dt = 1e-2;
  coarse.record_jumps = true;
  fine.dt = 1e-3;
  fine.record_jumps = true;
  Rng a(21), b(21);
  DualPath pa = simulate_dual(spec, {{0.5, 0.25}}, 3.0, coarse, a);
  DualPath pb = simulate_dual(spec, {{0.5, 0.25}}, 3.0, fine, b);
  // jump maps preserve the unit box exactly; clamping is a diffusion-only event
  CHECK(pa.clamp_total == 0.0);
  for (double x : pa.final_state.x) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  CHECK(pa.jump_count == pb.jump_count);
  REQUIRE(pa.jumps.size() == pb.jumps.size());
  for (size_t k = 0; k < pa.jumps.size(); ++k) {
    CHECK(pa.jumps[k].first == pb.jumps[k].first);
    CHECK(pa.jumps[k].second == pb.jumps[k].second);
  }
  CHECK(pa.final_state.x == pb.final_state.x);
}

TEST_CASE("jump times are step-independent even with drift") {
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_reproduction(0, 0, AtomicMeasure::dirac(0.0, 0.5));  // drift only
  spec.set_death(0, AtomicMeasure::dirac(0.5, 1.0));            // jumps
  DualConfig coarse, fine;
  coarse.dt = 5e-3;
  coarse.record_jumps = true;
  fine.dt = 1e-3;
  fine.record_jumps = true;
  Rng a(23), b(23);
  DualPath pa = simulate_dual(spec, {{0.5}}, 2.0, coarse, a);
  DualPath pb = simulate_dual(spec, {{0.5}}, 2.0, fine, b);
  REQUIRE(pa.jumps.size() == pb.jumps.size());
  for (size_t k = 0; k < pa.jumps.size(); ++k)
    CHECK(pa.jumps[k].first == pb.jumps[k].first);
}

TEST_CASE("frequencies stay inside the unit box under diffusion") {
  ModelSpec wf(GraphSpec::complete(1));
  wf.set_coalescence(0, AtomicMeasure::dirac(0.0, 1.0));
  for (int k = 0; k < 50; ++k) {
    Rng rng = replica_stream(31, k);
    DualPath path = simulate_dual(wf, {{0.5}}, 1.0, {}, rng, {0.25, 0.5, 1.0});
    for (const FrequencyState& s : path.samples) {
      CHECK(s.x[0] >= 0.0);
      CHECK(s.x[0] <= 1.0);
    }
  }
}

TEST_CASE("diffusion scaling follows the generator normalization") {
  // pure genetic drift of strength c: E[X_t] = x0 and
  // E[X_t^2] = x0 - x0 (1 - x0) e^{-c t}; c = 2 separates the generator
  // normalization sqrt(c x (1-x)) from the alternative c sqrt(x (1-x))
  double c = 2.0, x0 = 0.5, t = 0.5;
  ModelSpec wf(GraphSpec::complete(1));
  wf.set_coalescence(0, AtomicMeasure::dirac(0.0, c));
  DualConfig cfg;
  cfg.dt = 2e-4;
  EstimateWithCI first = moment_estimate(wf, {{x0}}, {1}, t, 10000, cfg, 41);
  EstimateWithCI second = moment_estimate(wf, {{x0}}, {2}, t, 10000, cfg, 42);
  CHECK(std::abs(first.mean - x0) < 4.0 * first.se + 1e-3);
  // the alternative normalization would relax at rate c^2 and land near 0.466
  double closed = x0 - x0 * (1.0 - x0) * std::exp(-c * t);
  CHECK(std::abs(second.mean - closed) < 4.0 * second.se + 2e-3);
}

TEST_CASE("hitting the all-ones state") {
  ModelSpec nested = presets::nested_coalescent(AtomicMeasure::dirac(0.0, 1.0), 2);
  Rng rng(43);
  auto at_one = tau_hit(nested, FrequencyState::constant(2, 1.0), 1.0, {}, rng);
  REQUIRE(at_one.has_value());
  CHECK(*at_one == 0.0);

  ModelSpec zero(GraphSpec::complete(2));
  auto never = tau_hit(zero, {{0.9, 0.9}}, 2.0, {}, rng);
  CHECK(!never.has_value());

  // genetic drift absorbs at the boundary, so some replicas fix at one
  int hits = 0;
  for (int k = 0; k < 50; ++k) {
    Rng r = replica_stream(47, k);
    if (tau_hit(nested, FrequencyState::constant(2, 0.9), 20.0, {}, r)) ++hits;
  }
  CHECK(hits > 0);
}

TEST_CASE("hit tolerance selection") {
  ModelSpec kingman = presets::nested_coalescent(AtomicMeasure::dirac(0.0, 1.0), 2);
  CHECK(default_hit_tolerance(kingman) == 1.0);
  ModelSpec partial(GraphSpec::complete(1));
  partial.set_coalescence(0, AtomicMeasure::dirac(0.5, 1.0));
  CHECK(default_hit_tolerance(partial) == 1.0 - 1e-9);
}

TEST_CASE("drift-only dual solves the heat equation on a line") {
  GraphSpec box = GraphSpec::grid(6, 1);
  PotentialField zero{std::vector<double>(6, 0.0), std::vector<double>(6, 0.0)};
  std::vector<double> x0{1.0, 1.0, 0.0, 1.0, 0.5, 1.0};
  std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
  std::vector<std::vector<double>> path = pam_dual_ode(zero, box, x0, grid);

  // oracle: the same flow is linear, x(t) = exp(tL) x0
  ModelSpec spec = presets::pam_branching(box, zero.xi_plus, zero.xi_minus);
  Eigen::MatrixXd laplacian = type_generator_matrix(spec.type());
  double last_deviation = 2.0;
  for (size_t k = 0; k < grid.size(); ++k) {
    Eigen::VectorXd v0(6);
    for (int i = 0; i < 6; ++i) v0(i) = x0[i];
    Eigen::VectorXd expm = expm_apply(laplacian, v0, grid[k]);
    double deviation = 0.0;
    double mean = expm.mean();
    for (int i = 0; i < 6; ++i) {
      CHECK(std::abs(path[k][i] - expm(i)) < 1e-7);
      deviation = std::max(deviation, std::abs(path[k][i] - mean));
    }
    CHECK(deviation < last_deviation);
    last_deviation = deviation;
  }
}

TEST_CASE("all-ones is a fixed point of the dual flow") {
  GraphSpec box = GraphSpec::grid(4, 1);
  PotentialField field = sample_potential(
      {PotentialDistribution::Family::Uniform, 0.0, 1.0},
      {PotentialDistribution::Family::Zero, 0.0, 0.0}, 4, 3);
  std::vector<std::vector<double>> path =
      pam_dual_ode(field, box, std::vector<double>(4, 1.0), {0.5, 1.0});
  for (const auto& xs : path)
    for (double x : xs) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the drift-only solver rejects stochastic models") {
  ModelSpec jumpy(GraphSpec::complete(1));
  jumpy.set_death(0, AtomicMeasure::dirac(0.5, 1.0));
  CHECK_THROWS_AS(dual_drift_ode(jumpy, {0.5}, {1.0}), std::invalid_argument);

  ModelSpec diffusive(GraphSpec::complete(1));
  diffusive.set_coalescence(0, AtomicMeasure::dirac(0.0, 1.0));
  CHECK_THROWS_AS(dual_drift_ode(diffusive, {0.5}, {1.0}), std::invalid_argument);
}

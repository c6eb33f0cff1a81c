#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "analytics.hpp"
#include "model.hpp"
#include "pam.hpp"

using namespace coordsim;

TEST_CASE("mean system reproduces the exponential growth laws") {
  double err = 0.0;
  ModelSpec yule = presets::yule(1.5);
  std::vector<double> f = expectation_ode(yule, {4}, 2.0, &err);
  CHECK(f[0] == doctest::Approx(4.0 * std::exp(3.0)).epsilon(1e-10));
  CHECK(err < 1e-8);

  ModelSpec birth_death(GraphSpec::complete(1));
  birth_death.set_reproduction(0, 0, AtomicMeasure::dirac(0.5, 1.25));
  birth_death.set_death(0, AtomicMeasure::dirac(1.0, 0.75));
  f = expectation_ode(birth_death, {3}, 1.0);
  CHECK(f[0] == doctest::Approx(3.0 * std::exp(0.5)).epsilon(1e-10));

  ModelSpec zero(GraphSpec::complete(2));
  f = expectation_ode(zero, {2, 7}, 5.0);
  CHECK(f[0] == doctest::Approx(2.0));
  CHECK(f[1] == doctest::Approx(7.0));
}

TEST_CASE("mean system refuses coalescence") {
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_coalescence(0, AtomicMeasure::dirac(0.0, 1.0));
  CHECK_THROWS_WITH_AS(expectation_ode(spec, {3}, 1.0),
                       doctest::Contains("kingman_bound"), std::invalid_argument);
}

TEST_CASE("generator matrix depends on the type alone, bitwise") {
  ModelSpec a(GraphSpec::complete(3));
  a.set_migration(0, 1, AtomicMeasure::dirac(0.0, 0.5));
  a.set_reproduction(1, 2, AtomicMeasure::dirac(0.0, 0.25));
  a.set_death(2, AtomicMeasure::dirac(0.0, 0.125));
  ModelSpec b(GraphSpec::complete(3));
  b.set_migration(0, 1, AtomicMeasure({{0.5, 0.25}, {1.0, 0.25}}));
  b.set_reproduction(1, 2, AtomicMeasure::dirac(0.7, 0.25));
  b.set_death(2, AtomicMeasure::dirac(0.3, 0.125));

  Eigen::MatrixXd qa = type_generator_matrix(a.type());
  Eigen::MatrixXd qb = type_generator_matrix(b.type());
  CHECK(qa == qb);
  // and hence equal solutions
  std::vector<double> fa = expectation_ode(a, {1, 2, 3}, 0.7);
  std::vector<double> fb = expectation_ode(b, {1, 2, 3}, 0.7);
  CHECK(fa == fb);
}

TEST_CASE("generator matrix entries follow the balance equation") {
  // df(v)/dt = sum_u (f(u) m_{uv} - f(v) m_{vu}) - f(v) d_v + sum_u f(u) r_{uv}
  ModelSpec spec(GraphSpec::complete(2));
  spec.set_migration(0, 1, AtomicMeasure::dirac(0.0, 2.0));
  spec.set_death(0, AtomicMeasure::dirac(0.0, 0.5));
  spec.set_reproduction(0, 1, AtomicMeasure::dirac(0.0, 0.25));
  Eigen::MatrixXd q = type_generator_matrix(spec.type());
  CHECK(q(0, 0) == -2.5);  // -m_01 - d_0
  CHECK(q(1, 0) == 2.25);  // m_01 + r_01
  CHECK(q(0, 1) == 0.0);
  CHECK(q(1, 1) == 0.0);
}

TEST_CASE("upper bound with zero coalescence is the mean itself") {
  ModelSpec spec(GraphSpec::complete(2));
  spec.set_migration(0, 1, AtomicMeasure::dirac(0.0, 1.0));
  spec.set_reproduction(0, 0, AtomicMeasure::dirac(0.0, 0.5));
  std::vector<double> mean = expectation_ode(spec, {3, 1}, 1.2);
  std::vector<double> bound = kingman_bound(spec, {3, 1}, 1.2);
  CHECK(bound[0] == doctest::Approx(mean[0]).epsilon(1e-9));
  CHECK(bound[1] == doctest::Approx(mean[1]).epsilon(1e-9));
}

TEST_CASE("pair coalescence alone solves the logistic equation") {
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_coalescence(0, AtomicMeasure::dirac(0.0, 1.0));
  double n = 5.0;
  for (double t : {0.5, 1.0, 2.0}) {
    double err = 0.0;
    std::vector<double> f = kingman_bound(spec, {5}, t, &err);
    double logistic = n / (n + (1.0 - n) * std::exp(-t / 2.0));
    CHECK(std::abs(f[0] - logistic) < 1e-8);
    CHECK(err < 1e-8);
  }
  // f = 1 is a fixed point
  std::vector<double> fixed = kingman_bound(spec, {1}, 3.0);
  CHECK(fixed[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("birth plus pair coalescence solves the shifted logistic") {
  // f' = f - (f^2 - f)/2 = (3/2) f (1 - f/3)
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_coalescence(0, AtomicMeasure::dirac(0.0, 1.0));
  spec.set_reproduction(0, 0, AtomicMeasure::dirac(0.0, 1.0));
  double f0 = 5.0, cap = 3.0, rate = 1.5;
  for (double t : {0.5, 1.0, 2.0}) {
    std::vector<double> f = kingman_bound(spec, {5}, t);
    double closed = cap * f0 / (f0 + (cap - f0) * std::exp(-rate * t));
    CHECK(std::abs(f[0] - closed) < 1e-8);
  }
}

TEST_CASE("the quadratic term keeps the bound below the coalescence-free mean") {
  // with f >= 1 along the flow, -(f^2 - f) c/2 <= 0, so the bound sits under
  // the solution of the same linear system without coalescence
  ModelSpec with_coal(GraphSpec::complete(2));
  with_coal.set_coalescence(0, AtomicMeasure::dirac(0.0, 1.0));
  with_coal.set_reproduction(0, 0, AtomicMeasure::dirac(0.0, 0.8));
  with_coal.set_migration(0, 1, AtomicMeasure::dirac(0.0, 0.5));
  with_coal.set_migration(1, 0, AtomicMeasure::dirac(0.0, 0.5));
  ModelSpec without(GraphSpec::complete(2));
  without.set_reproduction(0, 0, AtomicMeasure::dirac(0.0, 0.8));
  without.set_migration(0, 1, AtomicMeasure::dirac(0.0, 0.5));
  without.set_migration(1, 0, AtomicMeasure::dirac(0.0, 0.5));
  for (double t : {0.25, 1.0, 2.0}) {
    std::vector<double> bound = kingman_bound(with_coal, {4, 2}, t);
    std::vector<double> linear = expectation_ode(without, {4, 2}, t);
    for (int v = 0; v < 2; ++v) CHECK(bound[v] <= linear[v] + 1e-9);
  }
}

TEST_CASE("upper bound rejects coalescence with positive atoms") {
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_coalescence(0, AtomicMeasure::dirac(0.5, 1.0));
  CHECK_THROWS_AS(kingman_bound(spec, {3}, 1.0), std::invalid_argument);
}

TEST_CASE("heat semigroup at time zero is the point mass") {
  PotentialField field{std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)};
  std::vector<double> f = pam_ode(field, GraphSpec::grid(5, 1), 2, 0.0);
  for (int v = 0; v < 5; ++v) CHECK(f[v] == doctest::Approx(v == 2 ? 1.0 : 0.0));
}

TEST_CASE("constant potential is a diagonal shift of the heat flow") {
  GraphSpec torus = GraphSpec::torus(4, 2);
  double gamma = 0.8, t = 0.6;
  PotentialField flat{std::vector<double>(torus.size(), gamma),
                      std::vector<double>(torus.size(), 0.0)};
  PotentialField zero{std::vector<double>(torus.size(), 0.0),
                      std::vector<double>(torus.size(), 0.0)};
  std::vector<double> with_potential = pam_ode(flat, torus, 0, t);
  std::vector<double> heat = pam_ode(zero, torus, 0, t);
  double mass = 0.0;
  for (int v = 0; v < torus.size(); ++v) {
    CHECK(with_potential[v] ==
          doctest::Approx(std::exp(gamma * t) * heat[v]).epsilon(1e-10));
    mass += with_potential[v];
  }
  CHECK(mass == doctest::Approx(std::exp(gamma * t)).epsilon(1e-10));
}

TEST_CASE("mass balance along the flow matches the potential term") {
  GraphSpec torus = GraphSpec::torus(3, 2);
  PotentialField field = sample_potential(
      {PotentialDistribution::Family::Uniform, 0.0, 1.0},
      {PotentialDistribution::Family::Uniform, 0.0, 0.5}, torus.size(), 11);
  double t = 0.7, h = 1e-4;
  std::vector<double> lo = pam_ode(field, torus, 0, t - h);
  std::vector<double> mid = pam_ode(field, torus, 0, t);
  std::vector<double> hi = pam_ode(field, torus, 0, t + h);
  double d_mass = 0.0, expected = 0.0;
  for (int v = 0; v < torus.size(); ++v) {
    d_mass += (hi[v] - lo[v]) / (2.0 * h);
    expected += field.xi(v) * mid[v];
  }
  CHECK(d_mass == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("heat semigroup agrees with the mean system of the lattice model") {
  GraphSpec box = GraphSpec::grid(5, 1);
  PotentialField field = sample_potential(
      {PotentialDistribution::Family::Uniform, 0.0, 1.0},
      {PotentialDistribution::Family::Uniform, 0.0, 1.0}, box.size(), 29);
  ModelSpec spec = presets::pam_branching(box, field.xi_plus, field.xi_minus);
  std::vector<double> via_type = expectation_ode(spec, {1, 0, 0, 0, 0}, 1.0);
  std::vector<double> via_heat = pam_ode(field, box, 0, 1.0);
  for (int v = 0; v < box.size(); ++v)
    CHECK(std::abs(via_type[v] - via_heat[v]) < 1e-8);
}

TEST_CASE("tree branching walk closed form") {
  CHECK(tree_brw_expectation(2, 1.0, 1.0, 1.0, 0) == doctest::Approx(1.0));
  CHECK(tree_brw_expectation(2, 1.0, 1.0, 1.0, 1) == doctest::Approx(0.5));
  CHECK(tree_brw_expectation(3, 0.7, 0.2, 0.0, 2) == 0.0);
  CHECK(tree_brw_expectation(2, 0.5, 0.25, 2.0, 0) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-12));
}

TEST_CASE("tree closed form satisfies the per-generation system") {
  // five-point central difference of the closed form against the right-hand
  // side (r - mu) g_k + (mu/d) g_{k-1}
  int d = 2;
  double r = 1.0, mu = 1.0;
  for (double t : {0.3, 1.0, 2.5}) {
    for (int k = 0; k <= 3; ++k) {
      double h = 1e-3;
      auto g = [&](double s) { return tree_brw_expectation(d, r, mu, s, k); };
      double deriv =
          (-g(t + 2 * h) + 8 * g(t + h) - 8 * g(t - h) + g(t - 2 * h)) / (12 * h);
      double rhs = (r - mu) * g(t) +
                   (k > 0 ? (mu / d) * tree_brw_expectation(d, r, mu, t, k - 1) : 0.0);
      CHECK(std::abs(deriv - rhs) < 1e-10);
    }
  }
}

TEST_CASE("tree closed form matches the integrated system") {
  double err = 0.0;
  std::vector<double> g = tree_brw_ode(2, 4, 1.0, 0.5, 1.5, &err);
  for (int k = 0; k <= 4; ++k)
    CHECK(g[k] ==
          doctest::Approx(tree_brw_expectation(2, 1.0, 0.5, 1.5, k)).epsilon(1e-9));
  CHECK(err < 1e-9);
}

TEST_CASE("moment condition verdicts per tail family") {
  CHECK(moment_condition_check(TailFamily::Bounded, 0.0, 3).satisfied);
  CHECK(moment_condition_check(TailFamily::ExponentialTail, 0.0, 3).satisfied);
  CHECK_FALSE(moment_condition_check(TailFamily::Pareto, 0.5, 1).satisfied);
  CHECK(moment_condition_check(TailFamily::Pareto, 2.5, 2).satisfied);
  CHECK_FALSE(moment_condition_check(TailFamily::Pareto, 2.0, 2).satisfied);
}

TEST_CASE("rk4 convergence and error reporting") {
  auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy[0] = y[0];
  };
  double err = 0.0;
  std::vector<double> y = rk4_solve(rhs, {1.0}, 1.0, 100, &err);
  CHECK(std::abs(y[0] - std::exp(1.0)) < 1e-9);
  CHECK(err > 0.0);
  CHECK(err < 1e-8);
}

TEST_CASE("matrix exponential of a nilpotent generator is exact") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, 0.0, 0.0;
  Eigen::VectorXd f0(2);
  f0 << 2.0, 3.0;
  double err = 0.0;
  Eigen::VectorXd f = expm_apply(a, f0, 0.5, &err);
  CHECK(f(0) == doctest::Approx(2.0 + 0.5 * 3.0).epsilon(1e-14));
  CHECK(f(1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(err < 1e-12);
}

#include "analytics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace coordsim {

Eigen::MatrixXd type_generator_matrix(const TypeSignature& type) {
  int n = type.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    double out_migration = 0.0;
    for (int u = 0; u < n; ++u) {
      out_migration += type.migration[v][u];
      if (u != v) A(v, u) = type.migration[u][v] + type.reproduction[u][v];
    }
    A(v, v) = type.reproduction[v][v] - type.death[v] - out_migration;
  }
  return A;
}

Eigen::VectorXd expm_apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& f0, double t,
                           double* error_estimate) {
  Eigen::MatrixXd Et = (t * A).exp();
  Eigen::VectorXd f = Et * f0;
  if (error_estimate) {
    Eigen::MatrixXd Eh = (0.5 * t * A).exp();
    Eigen::VectorXd g = Eh * (Eh * f0);
    *error_estimate = (f - g).cwiseAbs().maxCoeff();
  }
  return f;
}

namespace {

Eigen::VectorXd to_vector(const std::vector<long long>& z) {
  Eigen::VectorXd v(z.size());
  for (size_t i = 0; i < z.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(z[i]);
  return v;
}

std::vector<double> from_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Linear systems above this size go through RK4 instead of a dense
// exponential.
constexpr int kDenseExpmLimit = 2000;

std::vector<double> linear_solve(const Eigen::MatrixXd& A, const std::vector<long long>& z0,
                                 double t, double* error_estimate) {
  if (A.rows() <= kDenseExpmLimit)
    return from_vector(expm_apply(A, to_vector(z0), t, error_estimate));
  double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  double dt = 1e-4 * std::max(1.0, 1.0 / std::max(norm, 1e-12));
  int steps = std::max(1, static_cast<int>(std::ceil(t / dt)));
  std::vector<double> y0(z0.begin(), z0.end());
  auto rhs = [&A](double, const std::vector<double>& y, std::vector<double>& dy) {
    Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::VectorXd r = A * ym;
    for (size_t i = 0; i < y.size(); ++i) dy[i] = r(static_cast<Eigen::Index>(i));
  };
  return rk4_solve(rhs, y0, t, steps, error_estimate);
}

}  // namespace

std::vector<double> expectation_ode(const ModelSpec& spec,
                                    const std::vector<long long>& z0, double t,
                                    double* error_estimate) {
  if (spec.has_coalescence())
    throw std::invalid_argument(
        "expectation_ode requires zero coalescence mass; use kingman_bound for "
        "models with Kingman coalescence");
  if (static_cast<int>(z0.size()) != spec.vertex_count())
    throw std::invalid_argument("initial state size mismatch");
  return linear_solve(type_generator_matrix(spec.type()), z0, t, error_estimate);
}

std::vector<double> kingman_bound(const ModelSpec& spec, const std::vector<long long>& z0,
                                  double t, double* error_estimate) {
  int n = spec.vertex_count();
  if (static_cast<int>(z0.size()) != n)
    throw std::invalid_argument("initial state size mismatch");
  std::vector<double> c(n, 0.0);
  for (const auto& [v, m] : spec.coalescence_map()) {
    MeasureSplit parts = split(m);
    if (!parts.positive_atoms.empty())
      throw std::invalid_argument(
          "kingman_bound is proven for coalescence measures concentrated at zero; "
          "got a positive atom at vertex " + std::to_string(v));
    c[v] = parts.mass_at_zero;
  }
  Eigen::MatrixXd A = type_generator_matrix(spec.type());
  // coalescence does not enter the linear part
  std::vector<double> y0(z0.begin(), z0.end());
  auto rhs = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
    Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::VectorXd lin = A * ym;
    for (int v = 0; v < n; ++v)
      dy[v] = lin(v) - 0.5 * c[v] * (y[v] * y[v] - y[v]);
  };
  int steps = std::max(64, static_cast<int>(std::ceil(t / 1e-3)));
  return rk4_solve(rhs, y0, t, steps, error_estimate);
}

std::vector<double> pam_ode(const PotentialField& field, const GraphSpec& box, int v0,
                            double t, double* error_estimate) {
  int n = box.size();
  if (field.size() != n) throw std::invalid_argument("potential length mismatch");
  if (v0 < 0 || v0 >= n) throw std::invalid_argument("v0 out of range");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    for (int u : box.neighbors(v)) A(v, u) += 1.0;
    A(v, v) = -box.degree(v) + field.xi(v);
  }
  Eigen::VectorXd f0 = Eigen::VectorXd::Zero(n);
  f0(v0) = 1.0;
  return from_vector(expm_apply(A, f0, t, error_estimate));
}

double tree_brw_expectation(int d, double r, double mu, double t, int generation) {
  if (d < 1) throw std::invalid_argument("tree fan-out must be >= 1");
  if (generation < 0) throw std::invalid_argument("generation must be >= 0");
  if (generation == 0) return std::exp(t * (r - mu));
  if (t == 0.0 || mu == 0.0) return 0.0;
  double log_term = generation * std::log(t * mu / d) - std::lgamma(generation + 1.0);
  return std::exp(t * (r - mu) + log_term);
}

std::vector<double> tree_brw_ode(int d, int max_generation, double r, double mu, double t,
                                 double* error_estimate) {
  std::vector<double> g0(max_generation + 1, 0.0);
  g0[0] = 1.0;
  auto rhs = [&](double, const std::vector<double>& g, std::vector<double>& dg) {
    for (int k = 0; k <= max_generation; ++k)
      dg[k] = (r - mu) * g[k] + (k > 0 ? (mu / d) * g[k - 1] : 0.0);
  };
  int steps = std::max(64, static_cast<int>(std::ceil(t / 1e-3)));
  return rk4_solve(rhs, g0, t, steps, error_estimate);
}

MomentConditionReport moment_condition_check(TailFamily family, double pareto_alpha, int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  switch (family) {
    case TailFamily::Bounded:
      return {true, "bounded potentials have finite moments of every order"};
    case TailFamily::ExponentialTail:
      return {true, "exponential tails beat every polynomial, so the d-th moment is finite"};
    case TailFamily::Pareto: {
      bool ok = pareto_alpha > static_cast<double>(d);
      std::string diag = "pareto tail x^-(alpha+1): (xi/log xi)^d is integrable iff alpha > d; "
                         "alpha = " + std::to_string(pareto_alpha) + ", d = " + std::to_string(d);
      return {ok, diag};
    }
  }
  throw std::invalid_argument("unsupported potential family");
}

namespace {

std::vector<double> rk4_fixed(
    const std::function<void(double, const std::vector<double>&, std::vector<double>&)>& rhs,
    std::vector<double> y, double t, int n_steps) {
  size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  double h = t / n_steps;
  double s = 0.0;
  for (int step = 0; step < n_steps; ++step) {
    rhs(s, y, k1);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(s + 0.5 * h, tmp, k2);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(s + 0.5 * h, tmp, k3);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(s + h, tmp, k4);
    for (size_t i = 0; i < n; ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    s += h;
  }
  return y;
}

}  // namespace

std::vector<double> rk4_solve(
    const std::function<void(double, const std::vector<double>&, std::vector<double>&)>& rhs,
    const std::vector<double>& y0, double t, int n_steps, double* error_estimate) {
  if (n_steps < 1) throw std::invalid_argument("rk4_solve: n_steps < 1");
  if (t == 0.0) {
    if (error_estimate) *error_estimate = 0.0;
    return y0;
  }
  std::vector<double> fine = rk4_fixed(rhs, y0, t, 2 * n_steps);
  if (error_estimate) {
    std::vector<double> coarse = rk4_fixed(rhs, y0, t, n_steps);
    double err = 0.0;
    for (size_t i = 0; i < fine.size(); ++i)
      err = std::max(err, std::abs(fine[i] - coarse[i]));
    *error_estimate = err;
  }
  return fine;
}

}  // namespace coordsim

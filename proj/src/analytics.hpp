#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "model.hpp"

namespace coordsim {

// Site potential split into nonnegative parts: xi = xi_plus - xi_minus.
struct PotentialField {
  std::vector<double> xi_plus;
  std::vector<double> xi_minus;

  int size() const { return static_cast<int>(xi_plus.size()); }
  double xi(int v) const { return xi_plus.at(v) - xi_minus.at(v); }
};

// Generator of the mean system: df(v)/dt = sum_u A(v,u) f(u) with
// A(v,u) = m_{uv} + r_{uv} for u != v and A(v,v) = r_{vv} - d_v - sum_u m_{vu}.
// Depends on the model only through its type.
Eigen::MatrixXd type_generator_matrix(const TypeSignature& type);

// exp(tA) applied to f0, with a consistency estimate: the max-norm gap to
// exp(tA/2) applied twice.
Eigen::VectorXd expm_apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& f0, double t,
                           double* error_estimate = nullptr);

// Mean of every coalescence-free model of the given spec's type at time t.
// Throws if any coalescence mass is present (see kingman_bound for that case).
std::vector<double> expectation_ode(const ModelSpec& spec,
                                    const std::vector<long long>& z0, double t,
                                    double* error_estimate = nullptr);

// Upper bound on the mean when every coalescence measure is a multiple of
// delta_0: the linear system with the extra -(f^2-f) c_v/2 term, solved by
// RK4 with a step-halving error estimate.
std::vector<double> kingman_bound(const ModelSpec& spec, const std::vector<long long>& z0,
                                  double t, double* error_estimate = nullptr);

// Lattice heat semigroup with potential: exp(t(L + diag(xi))) applied to the
// unit vector at v0, L the graph Laplacian of `box`.
std::vector<double> pam_ode(const PotentialField& field, const GraphSpec& box, int v0,
                            double t, double* error_estimate = nullptr);

// Per-vertex mean of the tree branching random walk at generation k:
// exp(t(r-mu)) (t mu / d)^k / k!.
double tree_brw_expectation(int d, double r, double mu, double t, int generation);

// RK4 cross-check of the closed form: the per-generation mean system
// dg_k/dt = (r-mu) g_k + (mu/d) g_{k-1}, g_k(0) = 1{k=0}.
std::vector<double> tree_brw_ode(int d, int max_generation, double r, double mu, double t,
                                 double* error_estimate = nullptr);

enum class TailFamily { Bounded, ExponentialTail, Pareto };

struct MomentConditionReport {
  bool satisfied = false;
  std::string diagnostic;
};

// Checks E[(max(xi,2)/log max(xi,2))^d] < infinity per tail family:
// bounded and exponential tails always pass, pareto(alpha) needs alpha > d.
MomentConditionReport moment_condition_check(TailFamily family, double pareto_alpha, int d);

// Classic fixed-step RK4 with a step-halving error estimate; used by every
// nonlinear system in this library.
std::vector<double> rk4_solve(
    const std::function<void(double, const std::vector<double>&, std::vector<double>&)>& rhs,
    const std::vector<double>& y0, double t, int n_steps, double* error_estimate = nullptr);

}  // namespace coordsim

#pragma once

#include <cstdint>
#include <vector>

#include "analytics.hpp"
#include "forward.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace coordsim {

struct PotentialDistribution {
  enum class Family { Zero, Uniform, Exponential, Pareto };
  Family family = Family::Zero;
  // Uniform: [a, b]; Exponential: rate a; Pareto: index a, scale b (>= b)
  double a = 0.0;
  double b = 1.0;
};

double sample_potential_value(const PotentialDistribution& dist, Rng& rng);

// i.i.d. xi_plus, xi_minus per vertex, reproducible from the seed.
PotentialField sample_potential(const PotentialDistribution& plus,
                                const PotentialDistribution& minus, int n_vertices,
                                std::uint64_t seed);

// Continuous-time simple symmetric walk: rate 1 per incident edge, uniform
// neighbour choice. Segment k occupies `vertex` from time[k] to time[k+1]
// (the last segment runs to the horizon).
struct WalkSegment {
  double start = 0.0;
  int vertex = 0;
};
std::vector<WalkSegment> sample_walk(const GraphSpec& graph, int v0, double t, Rng& rng);

// Estimates indexed by the walk's terminal vertex, from one shared ensemble.
struct PathEstimate {
  std::vector<EstimateWithCI> per_vertex;
  long long flagged = 0;  // replicas whose weight hit the overflow cap
};

// Path-integral weight exp(int_0^t xi(Y_s) ds) on the terminal vertex.
PathEstimate fk_curve(const PotentialField& field, const GraphSpec& graph, int v0,
                      double t, long long n_replicas, std::uint64_t seed,
                      int threads = 1);

// Fully coordinated representation: one walk, one doubling count with a
// Poisson number of doublings run at clock int xi_plus(Y_s) ds, one unit
// exponential killing threshold against int xi_minus(Y_s) ds.
PathEstimate lonely_walker_curve(const PotentialField& field, const GraphSpec& graph,
                                 int v0, double t, long long n_replicas,
                                 std::uint64_t seed, int threads = 1);

// Monte Carlo bound on the variance of every process of the model's type:
// exp(I+) (exp(2 I+) - 1) 1{alive} on the terminal vertex, I+ the positive
// part of the path integral.
PathEstimate variance_bound_curve(const PotentialField& field, const GraphSpec& graph,
                                  int v0, double t, long long n_replicas,
                                  std::uint64_t seed, int threads = 1);

EstimateWithCI fk_estimator(const PotentialField& field, const GraphSpec& graph, int v0,
                            int v, double t, long long n_replicas, std::uint64_t seed,
                            int threads = 1);
EstimateWithCI lonely_walker_estimator(const PotentialField& field, const GraphSpec& graph,
                                       int v0, int v, double t, long long n_replicas,
                                       std::uint64_t seed, int threads = 1);
EstimateWithCI variance_bound_estimator(const PotentialField& field,
                                        const GraphSpec& graph, int v0, int v, double t,
                                        long long n_replicas, std::uint64_t seed,
                                        int threads = 1);

// Occupancy probe of the one-directional branching random walk (birth rate r
// on site, migration rate m to the next site): Monte Carlo estimates of
// P(Z_t^{(probe)} = 0) from one particle at the origin, against the
// deterministic dual curve started from all-ones minus the probe vertex.
struct OccupancyCurves {
  std::vector<double> t_grid;
  std::vector<EstimateWithCI> monte_carlo;
  std::vector<double> dual_ode;
  double ode_error = 0.0;
};

OccupancyCurves occupancy_curve(double r, double m, int probe_distance,
                                const std::vector<double>& t_grid, long long n_replicas,
                                std::uint64_t seed, const MonteCarloOptions& opts = {});

}  // namespace coordsim

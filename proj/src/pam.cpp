#include "pam.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "dual.hpp"
#include "model.hpp"

namespace coordsim {

namespace {
// weights above this are capped and the replica flagged
constexpr double kLogWeightCap = 700.0;
}

double sample_potential_value(const PotentialDistribution& dist, Rng& rng) {
  switch (dist.family) {
    case PotentialDistribution::Family::Zero:
      return 0.0;
    case PotentialDistribution::Family::Uniform: {
      if (dist.b < dist.a) throw std::invalid_argument("uniform potential needs a <= b");
      return dist.a + (dist.b - dist.a) * uniform01(rng);
    }
    case PotentialDistribution::Family::Exponential: {
      if (dist.a <= 0.0) throw std::invalid_argument("exponential potential needs rate > 0");
      return exponential(rng, dist.a);
    }
    case PotentialDistribution::Family::Pareto: {
      if (dist.a <= 0.0 || dist.b <= 0.0)
        throw std::invalid_argument("pareto potential needs index > 0 and scale > 0");
      double u = uniform01(rng);
      if (u <= 0.0) u = std::numeric_limits<double>::min();
      return dist.b * std::pow(u, -1.0 / dist.a);
    }
  }
  throw std::invalid_argument("unknown potential family");
}

PotentialField sample_potential(const PotentialDistribution& plus,
                                const PotentialDistribution& minus, int n_vertices,
                                std::uint64_t seed) {
  if (n_vertices < 1) throw std::invalid_argument("sample_potential: empty vertex set");
  PotentialField field;
  field.xi_plus.resize(n_vertices);
  field.xi_minus.resize(n_vertices);
  Rng rng = replica_stream(seed, 0);
  for (int v = 0; v < n_vertices; ++v) field.xi_plus[v] = sample_potential_value(plus, rng);
  for (int v = 0; v < n_vertices; ++v) field.xi_minus[v] = sample_potential_value(minus, rng);
  for (int v = 0; v < n_vertices; ++v)
    if (field.xi_plus[v] < 0.0 || field.xi_minus[v] < 0.0)
      throw std::invalid_argument("potential parts must be nonnegative");
  return field;
}

std::vector<WalkSegment> sample_walk(const GraphSpec& graph, int v0, double t, Rng& rng) {
  if (v0 < 0 || v0 >= graph.size()) throw std::invalid_argument("walk start out of range");
  std::vector<WalkSegment> path{{0.0, v0}};
  double now = 0.0;
  int here = v0;
  while (true) {
    int deg = graph.degree(here);
    if (deg == 0) break;
    now += exponential(rng, static_cast<double>(deg));
    if (now >= t) break;
    int nb = static_cast<int>(uniform01(rng) * deg);
    if (nb >= deg) nb = deg - 1;
    here = graph.neighbors(here)[nb];
    path.push_back({now, here});
  }
  return path;
}

namespace {

struct PathIntegrals {
  double plus = 0.0;
  double minus = 0.0;
  int terminal = 0;
};

PathIntegrals integrate_along(const PotentialField& field,
                              const std::vector<WalkSegment>& path, double t) {
  PathIntegrals out;
  for (size_t k = 0; k < path.size(); ++k) {
    double end = k + 1 < path.size() ? path[k + 1].start : t;
    double span = end - path[k].start;
    out.plus += span * field.xi_plus[path[k].vertex];
    out.minus += span * field.xi_minus[path[k].vertex];
  }
  out.terminal = path.back().vertex;
  return out;
}

struct CurveAccumulator {
  std::vector<RunningStats> per_vertex;
  long long flagged = 0;

  void init(size_t n) {
    if (per_vertex.empty()) per_vertex.resize(n);
  }
  void merge(const CurveAccumulator& other) {
    if (other.per_vertex.empty()) {
      flagged += other.flagged;
      return;
    }
    if (per_vertex.empty()) {
      *this = other;
      return;
    }
    for (size_t v = 0; v < per_vertex.size(); ++v) per_vertex[v].merge(other.per_vertex[v]);
    flagged += other.flagged;
  }
};

using ReplicaWeight = std::function<double(const PathIntegrals&, Rng&, bool&)>;

PathEstimate run_walk_ensemble(const PotentialField& field, const GraphSpec& graph,
                               int v0, double t, long long n_replicas, std::uint64_t seed,
                               int threads, const ReplicaWeight& weight_of) {
  if (field.size() != graph.size())
    throw std::invalid_argument("potential length must match the graph");
  auto body = [&](long long replica, CurveAccumulator& acc) {
    acc.init(static_cast<size_t>(graph.size()));
    Rng rng = replica_stream(seed, static_cast<std::uint64_t>(replica));
    PathIntegrals integrals = integrate_along(field, sample_walk(graph, v0, t, rng), t);
    bool flagged = false;
    double weight = weight_of(integrals, rng, flagged);
    if (flagged) ++acc.flagged;
    for (int v = 0; v < graph.size(); ++v)
      acc.per_vertex[v].add(v == integrals.terminal ? weight : 0.0);
  };
  CurveAccumulator acc = run_replicas_chunked<CurveAccumulator>(n_replicas, threads, body);
  PathEstimate out;
  out.flagged = acc.flagged;
  out.per_vertex.reserve(acc.per_vertex.size());
  for (const RunningStats& s : acc.per_vertex) out.per_vertex.push_back(s.estimate());
  return out;
}

}  // namespace

PathEstimate fk_curve(const PotentialField& field, const GraphSpec& graph, int v0,
                      double t, long long n_replicas, std::uint64_t seed, int threads) {
  return run_walk_ensemble(field, graph, v0, t, n_replicas, seed, threads,
                           [](const PathIntegrals& in, Rng&, bool& flagged) {
                             double log_w = in.plus - in.minus;
                             if (log_w > kLogWeightCap) {
                               flagged = true;
                               log_w = kLogWeightCap;
                             }
                             return std::exp(log_w);
                           });
}

PathEstimate lonely_walker_curve(const PotentialField& field, const GraphSpec& graph,
                                 int v0, double t, long long n_replicas,
                                 std::uint64_t seed, int threads) {
  return run_walk_ensemble(
      field, graph, v0, t, n_replicas, seed, threads,
      [](const PathIntegrals& in, Rng& rng, bool& flagged) {
        long long doublings = poisson(rng, in.plus);
        bool alive = in.minus < exponential(rng, 1.0);
        if (!alive) return 0.0;
        double log_w = static_cast<double>(doublings) * std::log(2.0);
        if (log_w > kLogWeightCap) {
          flagged = true;
          log_w = kLogWeightCap;
        }
        return std::exp(log_w);
      });
}

PathEstimate variance_bound_curve(const PotentialField& field, const GraphSpec& graph,
                                  int v0, double t, long long n_replicas,
                                  std::uint64_t seed, int threads) {
  return run_walk_ensemble(
      field, graph, v0, t, n_replicas, seed, threads,
      [](const PathIntegrals& in, Rng& rng, bool& flagged) {
        bool alive = in.minus < exponential(rng, 1.0);
        if (!alive) return 0.0;
        if (3.0 * in.plus > kLogWeightCap) {
          flagged = true;
          return std::exp(kLogWeightCap);
        }
        double e1 = std::exp(in.plus);
        double e2 = std::exp(2.0 * in.plus);
        return e1 * (e2 - 1.0);
      });
}

EstimateWithCI fk_estimator(const PotentialField& field, const GraphSpec& graph, int v0,
                            int v, double t, long long n_replicas, std::uint64_t seed,
                            int threads) {
  return fk_curve(field, graph, v0, t, n_replicas, seed, threads).per_vertex.at(v);
}

EstimateWithCI lonely_walker_estimator(const PotentialField& field, const GraphSpec& graph,
                                       int v0, int v, double t, long long n_replicas,
                                       std::uint64_t seed, int threads) {
  return lonely_walker_curve(field, graph, v0, t, n_replicas, seed, threads).per_vertex.at(v);
}

EstimateWithCI variance_bound_estimator(const PotentialField& field,
                                        const GraphSpec& graph, int v0, int v, double t,
                                        long long n_replicas, std::uint64_t seed,
                                        int threads) {
  return variance_bound_curve(field, graph, v0, t, n_replicas, seed, threads)
      .per_vertex.at(v);
}

OccupancyCurves occupancy_curve(double r, double m, int probe_distance,
                                const std::vector<double>& t_grid, long long n_replicas,
                                std::uint64_t seed, const MonteCarloOptions& opts) {
  if (probe_distance < 1) throw std::invalid_argument("probe distance must be >= 1");
  if (r < 0.0 || m < 0.0) throw std::invalid_argument("rates must be >= 0");
  if (t_grid.empty()) throw std::invalid_argument("empty time grid");

  // Sites 0..probe plus one inert overflow site: migration is one-directional,
  // so particles past the probe never matter again and the finite window is
  // exact for the probe's occupancy.
  int n = probe_distance + 2;
  ModelSpec spec(GraphSpec::line(n));
  for (int v = 0; v <= probe_distance; ++v) {
    if (r > 0.0) spec.set_reproduction(v, v, AtomicMeasure::dirac(0.0, r));
    if (m > 0.0) spec.set_migration(v, v + 1, AtomicMeasure::dirac(0.0, m));
  }
  spec.validate();

  OccupancyCurves out;
  out.t_grid = t_grid;

  MonteCarloResult mc =
      monte_carlo(spec, ParticleState::unit(n, 0), t_grid, n_replicas,
                  {Observable::extinct_at(probe_distance)}, seed, opts);
  out.monte_carlo.reserve(t_grid.size());
  for (size_t k = 0; k < t_grid.size(); ++k) out.monte_carlo.push_back(mc.estimates[k][0]);

  std::vector<double> x0(n, 1.0);
  x0[probe_distance] = 0.0;
  std::vector<std::vector<double>> dual = dual_drift_ode(spec, x0, t_grid, &out.ode_error);
  out.dual_ode.reserve(t_grid.size());
  for (const auto& xs : dual) out.dual_ode.push_back(xs[0]);
  return out;
}

}  // namespace coordsim

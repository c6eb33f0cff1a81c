#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace coordsim {

namespace {

// log C(n,i) y^i (1-y)^(n-i), robust for y near the endpoints
double log_binom_pmf(long long n, long long i, double y) {
  if (y <= 0.0) return i == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (y >= 1.0) return i == n ? 0.0 : -std::numeric_limits<double>::infinity();
  double lc = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
  return lc + i * std::log(y) + (n - i) * std::log1p(-y);
}

struct TruncatedChain {
  std::vector<std::vector<long long>> states;
  std::map<std::vector<long long>, int> index;
  // per state: (target index, rate); the overflow state is states.size()
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> out_rate;
};

constexpr int kOverflowPlaceholder = -1;

TruncatedChain enumerate_chain(const ModelSpec& spec, const std::vector<long long>& z0,
                               long long total_cap) {
  TruncatedChain chain;
  long long z0_total = 0;
  for (long long c : z0) z0_total += c;
  if (z0_total > total_cap)
    throw std::invalid_argument("oracle cap smaller than the initial population");

  chain.index[z0] = 0;
  chain.states.push_back(z0);
  std::vector<int> frontier{0};

  auto intern = [&](const std::vector<long long>& z) -> int {
    long long total = 0;
    for (long long c : z) total += c;
    if (total > total_cap) return kOverflowPlaceholder;
    auto [it, fresh] = chain.index.emplace(z, static_cast<int>(chain.states.size()));
    if (fresh) {
      chain.states.push_back(z);
      frontier.push_back(it->second);
    }
    return it->second;
  };

  for (size_t qi = 0; qi < frontier.size(); ++qi) {
    int si = frontier[qi];
    std::vector<long long> z = chain.states[si];
    std::vector<std::pair<int, double>> row;

    auto push = [&](std::vector<long long> target, double rate) {
      if (rate <= 0.0 || !std::isfinite(rate)) return;
      row.emplace_back(intern(target), rate);
    };

    for (const auto& [v, m] : spec.coalescence_map()) {
      if (z[v] < 2) continue;
      MeasureSplit parts = split(m);
      if (parts.mass_at_zero > 0.0) {
        std::vector<long long> target = z;
        target[v] -= 1;
        push(std::move(target), 0.5 * z[v] * (z[v] - 1.0) * parts.mass_at_zero);
      }
      for (const Atom& a : parts.positive_atoms)
        for (long long i = 2; i <= z[v]; ++i) {
          double rate = std::exp(std::log(a.mass) + log_binom_pmf(z[v], i, a.y) -
                                 2.0 * std::log(a.y));
          std::vector<long long> target = z;
          target[v] -= (i - 1);
          push(std::move(target), rate);
        }
    }
    for (const auto& [v, m] : spec.death_map()) {
      if (z[v] < 1) continue;
      MeasureSplit parts = split(m);
      if (parts.mass_at_zero > 0.0) {
        std::vector<long long> target = z;
        target[v] -= 1;
        push(std::move(target), static_cast<double>(z[v]) * parts.mass_at_zero);
      }
      for (const Atom& a : parts.positive_atoms)
        for (long long i = 1; i <= z[v]; ++i) {
          double rate =
              std::exp(std::log(a.mass) + log_binom_pmf(z[v], i, a.y) - std::log(a.y));
          std::vector<long long> target = z;
          target[v] -= i;
          push(std::move(target), rate);
        }
    }
    for (const auto& [vu, m] : spec.reproduction_map()) {
      auto [v, u] = vu;
      if (z[v] < 1) continue;
      MeasureSplit parts = split(m);
      if (parts.mass_at_zero > 0.0) {
        std::vector<long long> target = z;
        target[u] += 1;
        push(std::move(target), static_cast<double>(z[v]) * parts.mass_at_zero);
      }
      for (const Atom& a : parts.positive_atoms)
        for (long long i = 1; i <= z[v]; ++i) {
          double rate =
              std::exp(std::log(a.mass) + log_binom_pmf(z[v], i, a.y) - std::log(a.y));
          std::vector<long long> target = z;
          target[u] += i;
          push(std::move(target), rate);
        }
    }
    for (const auto& [vu, m] : spec.migration_map()) {
      auto [v, u] = vu;
      if (z[v] < 1) continue;
      MeasureSplit parts = split(m);
      if (parts.mass_at_zero > 0.0) {
        std::vector<long long> target = z;
        target[v] -= 1;
        target[u] += 1;
        push(std::move(target), static_cast<double>(z[v]) * parts.mass_at_zero);
      }
      for (const Atom& a : parts.positive_atoms)
        for (long long i = 1; i <= z[v]; ++i) {
          double rate =
              std::exp(std::log(a.mass) + log_binom_pmf(z[v], i, a.y) - std::log(a.y));
          std::vector<long long> target = z;
          target[v] -= i;
          target[u] += i;
          push(std::move(target), rate);
        }
    }
    chain.rows.push_back(std::move(row));
  }

  int overflow = static_cast<int>(chain.states.size());
  chain.out_rate.assign(chain.rows.size(), 0.0);
  for (size_t s = 0; s < chain.rows.size(); ++s)
    for (auto& [ti, rate] : chain.rows[s]) {
      if (ti == kOverflowPlaceholder) ti = overflow;
      chain.out_rate[s] += rate;
    }
  return chain;
}

}  // namespace

OracleResult oracle_expm(const ModelSpec& spec, const std::vector<long long>& z0,
                         const std::vector<double>& x, double t,
                         const OracleOptions& opts) {
  if (static_cast<int>(z0.size()) != spec.vertex_count() ||
      static_cast<int>(x.size()) != spec.vertex_count())
    throw std::invalid_argument("oracle_expm: state/frequency size mismatch");
  for (double xv : x)
    if (!(xv >= 0.0 && xv <= 1.0))
      throw std::invalid_argument("oracle_expm: x must lie in [0,1]^V");

  TruncatedChain chain = enumerate_chain(spec, z0, opts.total_cap);
  size_t n = chain.states.size();

  double q = 0.0;
  for (double r : chain.out_rate) q = std::max(q, r);

  std::vector<double> p(n + 1, 0.0);  // last slot: the absorbing overflow state
  p[0] = 1.0;
  if (q > 0.0 && t > 0.0) {
    // substeps keep exp(-q dt) representable
    int n_sub = std::max(1, static_cast<int>(std::ceil(q * t / 200.0)));
    double qdt = q * (t / n_sub);
    std::vector<double> acc(n + 1), cur(n + 1), nxt(n + 1);
    for (int sub = 0; sub < n_sub; ++sub) {
      std::fill(acc.begin(), acc.end(), 0.0);
      cur = p;
      double weight = std::exp(-qdt);
      double cumulative = 0.0;
      for (long long k = 0;; ++k) {
        if (k > 0) {
          // cur <- cur P with P = I + Q/q
          std::fill(nxt.begin(), nxt.end(), 0.0);
          for (size_t s = 0; s < n; ++s) {
            double mass = cur[s];
            if (mass == 0.0) continue;
            nxt[s] += mass * (1.0 - chain.out_rate[s] / q);
            for (const auto& [ti, rate] : chain.rows[s]) nxt[ti] += mass * rate / q;
          }
          nxt[n] += cur[n];
          cur.swap(nxt);
          weight *= qdt / static_cast<double>(k);
        }
        for (size_t s = 0; s <= n; ++s) acc[s] += weight * cur[s];
        cumulative += weight;
        if (cumulative >= 1.0 - opts.tail_tolerance && k >= static_cast<long long>(qdt))
          break;
      }
      p = acc;
    }
  }

  OracleResult out;
  out.n_states = static_cast<long long>(n);
  double value = 0.0;
  for (size_t s = 0; s < n; ++s) {
    if (p[s] == 0.0) continue;
    double h = 1.0;
    for (size_t v = 0; v < x.size(); ++v) {
      long long zv = chain.states[s][v];
      if (zv == 0) continue;  // 0^0 = 1
      h *= std::pow(x[v], static_cast<double>(zv));
    }
    value += p[s] * h;
  }
  out.value = value;
  out.leak = p[n];
  return out;
}

DualityReport duality_check(const ModelSpec& spec, const std::vector<double>& x,
                            const std::vector<long long>& z, double t,
                            long long n_replicas, std::uint64_t seed, double threshold,
                            const DualConfig& dual_cfg, int threads) {
  if (static_cast<int>(x.size()) != spec.vertex_count() ||
      static_cast<int>(z.size()) != spec.vertex_count())
    throw std::invalid_argument("duality_check: x/z size mismatch");

  DualityReport report;
  report.threshold = threshold;

  ParticleState z0{z};
  if (t == 0.0) {
    double h = evaluate_observable(Observable::moment(x), z0);
    report.forward = {h, 0.0, n_replicas};
    report.dual = {h, 0.0, n_replicas};
  } else {
    MonteCarloOptions mc;
    mc.threads = threads;
    MonteCarloResult fwd =
        monte_carlo_at(spec, z0, t, n_replicas, {Observable::moment(x)}, seed, mc);
    report.forward = fwd.estimates[0][0];
    report.dual = moment_estimate(spec, FrequencyState{x}, z, t, n_replicas, dual_cfg,
                                  seed + 0x9e3779b97f4a7c15ULL, threads);
  }
  report.z = z_score(report.forward, report.dual);
  report.pass = report.z < threshold;
  return report;
}

std::vector<CdiPoint> cdi_probe(const ModelSpec& spec, const std::vector<long long>& n_list,
                                long long m, double t, long long n_replicas,
                                std::uint64_t seed, const MonteCarloOptions& opts) {
  if (!std::is_sorted(n_list.begin(), n_list.end()))
    throw std::invalid_argument("cdi_probe: n_list must be increasing");
  std::vector<CdiPoint> out;
  for (size_t k = 0; k < n_list.size(); ++k) {
    ParticleState z0{std::vector<long long>(spec.vertex_count(), n_list[k])};
    MonteCarloResult mc = monte_carlo_at(spec, z0, t, n_replicas,
                                         {Observable::total_below(m)},
                                         seed + 1000003ULL * k, opts);
    out.push_back({n_list[k], mc.estimates[0][0]});
  }
  return out;
}

std::vector<EstimateWithCI> tau_hit_curve(const ModelSpec& spec,
                                          const std::vector<double>& x_grid, double t,
                                          long long n_replicas, const DualConfig& cfg,
                                          std::uint64_t seed, int threads) {
  std::vector<EstimateWithCI> out;
  for (size_t k = 0; k < x_grid.size(); ++k) {
    FrequencyState x0 = FrequencyState::constant(spec.vertex_count(), x_grid[k]);
    auto body = [&](long long replica, RunningStats& acc) {
      Rng rng = replica_stream(seed + 1000003ULL * k, static_cast<std::uint64_t>(replica));
      acc.add(tau_hit(spec, x0, t, cfg, rng) ? 1.0 : 0.0);
    };
    out.push_back(run_replicas_chunked<RunningStats>(n_replicas, threads, body).estimate());
  }
  return out;
}

EstimateWithCI fixation_probe(double alpha, double p, double t_end, double eps,
                              long long n_replicas, std::uint64_t seed, double n0,
                              int threads) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("fixation_probe: p must be in (0,1)");
  if (alpha < 0.0) throw std::invalid_argument("fixation_probe: alpha must be >= 0");
  if (!(n0 >= 0.0 && n0 <= 1.0))
    throw std::invalid_argument("fixation_probe: n0 must be in [0,1]");

  auto logistic_flow = [alpha](double w, double span) {
    if (alpha == 0.0 || w == 0.0) return w;
    double e = std::exp(alpha * span);
    return w * e / (1.0 + w * (e - 1.0));
  };
  auto body = [&](long long replica, RunningStats& acc) {
    Rng rng = replica_stream(seed, static_cast<std::uint64_t>(replica));
    double w = 1.0 - n0;  // deficit of the dual; jumps multiply it by 1-p
    double t = 0.0;
    while (true) {
      double next = t + exponential(rng, 1.0);
      w = logistic_flow(w, std::min(next, t_end) - t);
      if (next >= t_end) break;
      w *= (1.0 - p);
      t = next;
    }
    acc.add(w < eps ? 1.0 : 0.0);
  };
  return run_replicas_chunked<RunningStats>(n_replicas, threads, body).estimate();
}

ModelSpec spec_of_type(const TypeSignature& type, double impact) {
  int n = type.size();
  ModelSpec spec(GraphSpec::complete(std::max(1, n)));
  for (int v = 0; v < n; ++v) {
    if (type.coalescence[v] > 0.0)
      spec.set_coalescence(v, AtomicMeasure::dirac(impact, type.coalescence[v]));
    if (type.death[v] > 0.0)
      spec.set_death(v, AtomicMeasure::dirac(impact, type.death[v]));
    for (int u = 0; u < n; ++u) {
      if (type.reproduction[v][u] > 0.0)
        spec.set_reproduction(v, u, AtomicMeasure::dirac(impact, type.reproduction[v][u]));
      if (type.migration[v][u] > 0.0)
        spec.set_migration(v, u, AtomicMeasure::dirac(impact, type.migration[v][u]));
    }
  }
  spec.validate();
  return spec;
}

VarianceOrderReport variance_order_check(const TypeSignature& type,
                                         const std::vector<long long>& z0, double t,
                                         long long n_replicas, std::uint64_t seed,
                                         const MonteCarloOptions& opts) {
  for (double c : type.coalescence)
    if (c != 0.0)
      throw std::invalid_argument("variance_order_check requires a zero-coalescence type");
  int n = type.size();
  std::vector<Observable> observables;
  observables.reserve(n);
  for (int v = 0; v < n; ++v) observables.push_back(Observable::vertex_count(v));

  VarianceOrderReport report;
  for (double impact : {0.0, 0.5, 1.0}) {
    ModelSpec spec = spec_of_type(type, impact);
    MonteCarloResult mc =
        monte_carlo_at(spec, ParticleState{z0}, t, n_replicas, observables, seed, opts);
    VarianceOrderEntry entry;
    entry.impact = impact;
    entry.mean = mc.estimates[0];
    entry.variance = mc.variance;
    report.entries.push_back(std::move(entry));
  }
  report.ordered = true;
  for (int v = 0; v < n; ++v)
    for (size_t k = 1; k < report.entries.size(); ++k)
      if (report.entries[k].variance[v].mean < report.entries[k - 1].variance[v].mean)
        report.ordered = false;
  return report;
}

CouplingReport coupling_check_contact(const GraphSpec& graph, double death_rate,
                                      double repro_rate, const ParticleState& z0,
                                      double t_end, long long n_replicas,
                                      std::uint64_t seed, std::uint64_t event_cap) {
  if (death_rate < 0.0 || repro_rate < 0.0)
    throw std::invalid_argument("coupling_check_contact: rates must be >= 0");
  int n = graph.size();
  if (static_cast<int>(z0.counts.size()) != n)
    throw std::invalid_argument("initial state size mismatch");

  CouplingReport report;
  report.replicas = n_replicas;

  for (long long replica = 0; replica < n_replicas; ++replica) {
    Rng rng = replica_stream(seed, static_cast<std::uint64_t>(replica));
    std::vector<long long> walkers = z0.counts;      // branching random walk N
    std::vector<long long> coordinated = z0.counts;  // fully coordinated process Z
    std::vector<char> infected(n);                   // contact process 1{Z_v > 0}
    for (int v = 0; v < n; ++v) infected[v] = coordinated[v] > 0 ? 1 : 0;

    double t = 0.0;
    std::uint64_t events = 0;
    while (events < event_cap) {
      double total = 0.0;
      for (int v = 0; v < n; ++v)
        if (walkers[v] > 0)
          total += static_cast<double>(walkers[v]) *
                   (death_rate + repro_rate * graph.degree(v));
      if (total <= 0.0) break;
      t += exponential(rng, total);
      if (t > t_end) break;
      ++events;

      double u = uniform01(rng) * total;
      int v = n - 1;
      for (int w = 0; w < n; ++w) {
        if (walkers[w] == 0) continue;
        double vr = static_cast<double>(walkers[w]) *
                    (death_rate + repro_rate * graph.degree(w));
        if (u < vr) {
          v = w;
          break;
        }
        u -= vr;
      }

      // one uniformly chosen particle at v is struck; it is the infection
      // carrier with probability 1/N_v, which makes the carrier's event
      // rates exactly those of the coordinated process
      bool carrier =
          infected[v] && uniform01(rng) * static_cast<double>(walkers[v]) < 1.0;
      double kind_u = uniform01(rng) * (death_rate + repro_rate * graph.degree(v));
      if (kind_u < death_rate) {
        walkers[v] -= 1;
        if (carrier) {
          coordinated[v] = 0;
          infected[v] = 0;
        }
      } else {
        int nb = static_cast<int>(uniform01(rng) * graph.degree(v));
        if (nb >= graph.degree(v)) nb = graph.degree(v) - 1;
        int target = graph.neighbors(v)[nb];
        walkers[target] += 1;
        if (carrier) {
          coordinated[target] += coordinated[v];
          infected[target] = 1;
        }
      }

      for (int w = 0; w < n; ++w) {
        bool occupied = coordinated[w] > 0;
        if (occupied != (infected[w] != 0)) report.projection_ok = false;
        if (occupied && walkers[w] < 1) report.dominated = false;
      }
    }
    report.total_events += static_cast<long long>(events);

    long long total_w = 0, total_c = 0;
    for (int v = 0; v < n; ++v) {
      total_w += walkers[v];
      total_c += coordinated[v];
    }
    if (total_w == 0 && total_c == 0) ++report.extinct_replicas;
  }
  return report;
}

}  // namespace coordsim

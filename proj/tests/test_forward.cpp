#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "forward.hpp"
#include "model.hpp"

using namespace coordsim;

namespace {

// random small model with all four event families
ModelSpec random_spec(Rng& rng, bool with_reproduction = true) {
  int n = 2 + static_cast<int>(uniform01(rng) * 2);
  ModelSpec spec(GraphSpec::complete(n));
  auto random_measure = [&](double scale) {
    std::vector<Atom> atoms;
    if (uniform01(rng) < 0.7) atoms.push_back({0.0, uniform01(rng) * scale});
    if (uniform01(rng) < 0.7)
      atoms.push_back({0.25 + 0.75 * uniform01(rng), uniform01(rng) * scale});
    return AtomicMeasure(atoms);
  };
  for (int v = 0; v < n; ++v) {
    spec.set_coalescence(v, random_measure(1.0));
    spec.set_death(v, random_measure(0.5));
    if (with_reproduction) spec.set_reproduction(v, v, random_measure(0.5));
    for (int u = 0; u < n; ++u)
      if (u != v && uniform01(rng) < 0.5) spec.set_migration(v, u, random_measure(0.5));
  }
  spec.validate();
  return spec;
}

double rate_bound(const ModelSpec& spec, const ParticleState& z) {
  TypeSignature type = spec.type();
  double bound = 0.0;
  for (int v = 0; v < spec.vertex_count(); ++v) {
    double per = type.death[v];
    for (int u = 0; u < spec.vertex_count(); ++u)
      per += type.migration[v][u] + type.reproduction[v][u];
    per += (z.counts[v] - 1) * type.coalescence[v];
    bound += static_cast<double>(z.counts[v]) * per;
  }
  return bound;
}

}  // namespace

TEST_CASE("zero model is quiescent") {
  ModelSpec spec(GraphSpec::complete(2));
  Rng rng(1);
  Trajectory traj = simulate(spec, ParticleState{{3, 1}}, 5.0, rng);
  CHECK(traj.events.empty());
  CHECK(traj.final_state == traj.initial);
}

TEST_CASE("all-zero state is quiescent even with positive-atom measures") {
  ModelSpec spec = presets::binary_contact_path(GraphSpec::line(3), 1.0, 1.0);
  Rng rng(2);
  Trajectory traj = simulate(spec, ParticleState::zeros(3), 10.0, rng);
  CHECK(traj.events.empty());
  CHECK(traj.final_state.total() == 0);
}

TEST_CASE("single-particle birth and its waiting time") {
  ModelSpec yule = presets::yule(2.0);
  const int n_trials = 20000;
  Rng rng(3);
  double time_sum = 0.0;
  for (int k = 0; k < n_trials; ++k) {
    ForwardSimulator sim(yule, ParticleState{{1}});
    auto tn = sim.next_event_time(rng);
    REQUIRE(tn.has_value());
    EventRecord ev = sim.apply_pending(rng);
    CHECK(ev.kind == EventKind::Reproduction);
    CHECK(sim.state().counts[0] == 2);
    time_sum += ev.time;
  }
  double mean = time_sum / n_trials;  // Exp(2): mean 1/2, sd 1/2
  CHECK(std::abs(mean - 0.5) < 3.0 * 0.5 / std::sqrt(static_cast<double>(n_trials)));
}

TEST_CASE("full coordination merges all blocks in one event") {
  ModelSpec star = presets::coordinated_bc(AtomicMeasure::dirac(1.0, 3.0),
                                           AtomicMeasure::zero());
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    Trajectory traj = simulate(star, ParticleState{{6}}, 50.0, rng);
    REQUIRE(traj.events.size() == 1);
    CHECK(traj.events[0].kind == EventKind::Coalescence);
    CHECK(traj.events[0].participants == 6);
    CHECK(traj.final_state.counts[0] == 1);
  }
}

TEST_CASE("coordinated death kills everyone at an exponential time") {
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_death(0, AtomicMeasure::dirac(1.0, 0.5));
  Rng rng(5);
  const int n_trials = 20000;
  double time_sum = 0.0;
  for (int k = 0; k < n_trials; ++k) {
    Trajectory traj = simulate(spec, ParticleState{{7}}, 1e9, rng);
    REQUIRE(traj.events.size() == 1);
    CHECK(traj.final_state.counts[0] == 0);
    time_sum += traj.events[0].time;
  }
  double mean = time_sum / n_trials;  // Exp(1/2): mean 2, sd 2
  CHECK(std::abs(mean - 2.0) < 3.0 * 2.0 / std::sqrt(static_cast<double>(n_trials)));
}

TEST_CASE("yule growth matches the exponential mean") {
  ModelSpec yule = presets::yule(1.0);
  MonteCarloResult mc = monte_carlo_at(yule, ParticleState{{1}}, 1.0, 20000,
                                       {Observable::total()}, 99);
  double expected = std::exp(1.0);
  CHECK(std::abs(mc.estimates[0][0].mean - expected) < 3.0 * mc.estimates[0][0].se);
  CHECK(mc.estimates[0][0].se <
        2.0 * std::sqrt(std::exp(1.0) * (std::exp(1.0) - 1.0) / 20000.0));
}

TEST_CASE("independent and coordinated representatives share the mean") {
  MonteCarloResult ind = monte_carlo_at(presets::yule(1.0, 0.0), ParticleState{{1}}, 1.0,
                                        40000, {Observable::total()}, 7);
  MonteCarloResult coo = monte_carlo_at(presets::yule(1.0, 1.0), ParticleState{{1}}, 1.0,
                                        40000, {Observable::total()}, 8);
  double gap = std::abs(ind.estimates[0][0].mean - coo.estimates[0][0].mean);
  double se = std::hypot(ind.estimates[0][0].se, coo.estimates[0][0].se);
  CHECK(gap < 3.0 * se);
}

TEST_CASE("pure death with independent particles is binomial thinning") {
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_death(0, AtomicMeasure::dirac(0.0, 1.0));
  double t = std::log(2.0);
  MonteCarloResult mc = monte_carlo_at(spec, ParticleState{{10}}, t, 40000,
                                       {Observable::total()}, 17);
  // Binomial(10, 1/2): mean 5, variance 2.5
  CHECK(std::abs(mc.estimates[0][0].mean - 5.0) < 3.0 * mc.estimates[0][0].se);
  CHECK(std::abs(mc.variance[0].mean - 2.5) < 4.0 * mc.variance[0].se);
}

TEST_CASE("monte carlo on the zero model returns the start with zero error") {
  ModelSpec spec(GraphSpec::complete(2));
  MonteCarloResult mc = monte_carlo_at(spec, ParticleState{{4, 1}}, 2.0, 100,
                                       {Observable::vertex_count(0),
                                        Observable::vertex_count(1)}, 5);
  CHECK(mc.estimates[0][0].mean == 4.0);
  CHECK(mc.estimates[0][0].se == 0.0);
  CHECK(mc.estimates[0][1].mean == 1.0);
}

TEST_CASE("trajectories replay to their final state") {
  Rng meta(11);
  for (int trial = 0; trial < 30; ++trial) {
    ModelSpec spec = random_spec(meta);
    Rng rng(1000 + trial);
    ParticleState z0{std::vector<long long>(spec.vertex_count(), 3)};
    Trajectory traj = simulate(spec, z0, 2.0, rng);
    ParticleState replayed = traj.initial;
    for (const EventRecord& ev : traj.events) {
      apply_event(replayed, ev);
      for (long long c : replayed.counts) CHECK(c >= 0);
    }
    CHECK(replayed == traj.final_state);
  }
}

TEST_CASE("identical seeds give identical trajectories") {
  Rng meta(13);
  ModelSpec spec = random_spec(meta);
  ParticleState z0{std::vector<long long>(spec.vertex_count(), 2)};
  Rng a(12345), b(12345);
  Trajectory ta = simulate(spec, z0, 3.0, a);
  Trajectory tb = simulate(spec, z0, 3.0, b);
  REQUIRE(ta.events.size() == tb.events.size());
  for (size_t k = 0; k < ta.events.size(); ++k) {
    CHECK(ta.events[k].time == tb.events[k].time);
    CHECK(ta.events[k].kind == tb.events[k].kind);
    CHECK(ta.events[k].source == tb.events[k].source);
    CHECK(ta.events[k].participants == tb.events[k].participants);
  }
  CHECK(ta.final_state == tb.final_state);
}

TEST_CASE("realized total rate never exceeds the linear-quadratic bound") {
  Rng meta(17);
  for (int trial = 0; trial < 20; ++trial) {
    ModelSpec spec = random_spec(meta);
    Rng rng(2000 + trial);
    ForwardSimulator sim(spec,
                         ParticleState{std::vector<long long>(spec.vertex_count(), 4)});
    for (int step = 0; step < 200; ++step) {
      CHECK(sim.total_effective_rate() <= rate_bound(spec, sim.state()) * (1.0 + 1e-9));
      // the clock intensity dominates the state-change rate
      CHECK(sim.total_active_rate() >= sim.total_effective_rate() * (1.0 - 1e-12));
      auto tn = sim.next_event_time(rng);
      if (!tn) break;
      sim.apply_pending(rng);
    }
  }
}

TEST_CASE("without reproduction the population is nonincreasing") {
  Rng meta(19);
  for (int trial = 0; trial < 20; ++trial) {
    ModelSpec spec = random_spec(meta, /*with_reproduction=*/false);
    Rng rng(3000 + trial);
    ParticleState z0{std::vector<long long>(spec.vertex_count(), 5)};
    Trajectory traj = simulate(spec, z0, 3.0, rng);
    ParticleState state = traj.initial;
    long long last = state.total();
    for (const EventRecord& ev : traj.events) {
      apply_event(state, ev);
      CHECK(state.total() <= last);
      last = state.total();
    }
  }
}

// Joint construction of the model Z and the one-dimensional pure-reproduction
// dominator: reproduction clocks are shared (the dominator adds an
// independent binomial for its surplus particles; zero-atom channels are
// superposed by thinning), every other event leaves the dominator alone.
// Both marginals are exact and |Z| <= dominator must hold at every event.
TEST_CASE("pure-reproduction dominator bounds the population pathwise") {
  Rng meta(23);
  for (int trial = 0; trial < 15; ++trial) {
    ModelSpec spec = random_spec(meta);
    int n = spec.vertex_count();
    Rng rng(4000 + trial);

    std::vector<long long> z(n, 2);
    long long upper = 2 * n;
    double t = 0.0;
    const double t_end = 2.0;

    struct Clock {
      EventKind kind;
      int source, target;
      double impact;  // 0 for per-individual channels
      double mass;
    };
    std::vector<Clock> clocks;
    for (const auto& [v, m] : spec.coalescence_map())
      for (const Atom& a : m.atoms())
        clocks.push_back({EventKind::Coalescence, v, -1, a.y, a.mass});
    for (const auto& [v, m] : spec.death_map())
      for (const Atom& a : m.atoms())
        clocks.push_back({EventKind::Death, v, -1, a.y, a.mass});
    for (const auto& [vu, m] : spec.reproduction_map())
      for (const Atom& a : m.atoms())
        clocks.push_back({EventKind::Reproduction, vu.first, vu.second, a.y, a.mass});
    for (const auto& [vu, m] : spec.migration_map())
      for (const Atom& a : m.atoms())
        clocks.push_back({EventKind::Migration, vu.first, vu.second, a.y, a.mass});

    while (true) {
      double total = 0.0;
      std::vector<double> rates(clocks.size(), 0.0);
      for (size_t c = 0; c < clocks.size(); ++c) {
        const Clock& ck = clocks[c];
        long long zv = z[ck.source];
        double rate = 0.0;
        if (ck.kind == EventKind::Reproduction) {
          rate = ck.impact == 0.0 ? static_cast<double>(upper) * ck.mass
                                  : (upper > 0 ? ck.mass / ck.impact : 0.0);
        } else if (ck.kind == EventKind::Coalescence) {
          rate = ck.impact == 0.0
                     ? 0.5 * static_cast<double>(zv) * static_cast<double>(zv - 1) * ck.mass
                     : (zv >= 2 ? ck.mass / (ck.impact * ck.impact) : 0.0);
        } else {
          rate = ck.impact == 0.0 ? static_cast<double>(zv) * ck.mass
                                  : (zv >= 1 ? ck.mass / ck.impact : 0.0);
        }
        rates[c] = rate;
        total += rate;
      }
      if (total <= 0.0) break;
      t += exponential(rng, total);
      if (t > t_end) break;
      double u = uniform01(rng) * total;
      size_t chosen = clocks.size() - 1;
      for (size_t c = 0; c < clocks.size(); ++c) {
        if (u < rates[c]) {
          chosen = c;
          break;
        }
        u -= rates[c];
      }
      const Clock& ck = clocks[chosen];
      long long zv = z[ck.source];
      switch (ck.kind) {
        case EventKind::Reproduction: {
          if (ck.impact == 0.0) {
            // dominator birth; it is also a model birth with probability z_v / upper
            bool model_birth =
                uniform01(rng) * static_cast<double>(upper) < static_cast<double>(zv);
            upper += 1;
            if (model_birth) z[ck.target] += 1;
          } else {
            long long i_model = binomial(rng, zv, ck.impact);
            long long i_extra = binomial(rng, upper - zv, ck.impact);
            z[ck.target] += i_model;
            upper += i_model + i_extra;
          }
          break;
        }
        case EventKind::Migration: {
          long long i = ck.impact == 0.0 ? 1 : binomial(rng, zv, ck.impact);
          z[ck.source] -= i;
          z[ck.target] += i;
          break;
        }
        case EventKind::Death: {
          long long i = ck.impact == 0.0 ? 1 : binomial(rng, zv, ck.impact);
          z[ck.source] -= i;
          break;
        }
        case EventKind::Coalescence: {
          long long i = ck.impact == 0.0 ? 2 : binomial(rng, zv, ck.impact);
          if (i >= 2) z[ck.source] -= (i - 1);
          break;
        }
      }
      long long z_total = 0;
      for (long long c : z) z_total += c;
      REQUIRE(z_total <= upper);
    }
  }
}

TEST_CASE("below-threshold draws are logged as no-ops") {
  // a coalescence atom at y = 1/2 frequently draws 0 or 1 participants;
  // those events stay in the log and leave the state alone
  ModelSpec spec = presets::coordinated_bc(AtomicMeasure::dirac(0.5, 1.0),
                                           AtomicMeasure::zero());
  long long noops = 0;
  for (int run = 0; run < 50; ++run) {
    Rng rng = replica_stream(59, run);
    Trajectory traj = simulate(spec, ParticleState{{4}}, 200.0, rng);
    ParticleState state = traj.initial;
    for (const EventRecord& ev : traj.events) {
      long long before = state.counts[0];
      apply_event(state, ev);
      if (ev.participants <= 1) {
        ++noops;
        CHECK(state.counts[0] == before);
      }
    }
    CHECK(state == traj.final_state);
  }
  CHECK(noops > 0);
}

TEST_CASE("snapshots freeze the state at the requested times") {
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_death(0, AtomicMeasure::dirac(1.0, 1.0));
  Rng rng(29);
  SimOptions opts;
  opts.snapshot_times = {0.0, 1e-9, 1e9};
  Trajectory traj = simulate(spec, ParticleState{{5}}, 1e10, rng, opts);
  REQUIRE(traj.snapshots.size() == 3);
  CHECK(traj.snapshots[0].counts[0] == 5);
  CHECK(traj.snapshots[2].counts[0] == 0);
}

TEST_CASE("caps are reported, never silent") {
  ModelSpec yule = presets::yule(1.0);
  Rng rng(31);
  SimOptions opts;
  opts.population_cap = 4;
  Trajectory traj = simulate(yule, ParticleState{{1}}, 100.0, rng, opts);
  CHECK(traj.cap_exceeded);
  CHECK(traj.cap_reason == "population cap exceeded");

  MonteCarloOptions mc_opts;
  mc_opts.population_cap = 4;
  MonteCarloResult mc = monte_carlo_at(yule, ParticleState{{1}}, 10.0, 500,
                                       {Observable::total()}, 37, mc_opts);
  CHECK(mc.capped_replicas > 0);
  mc_opts.exclude_capped = true;
  MonteCarloResult excl = monte_carlo_at(yule, ParticleState{{1}}, 10.0, 500,
                                         {Observable::total()}, 37, mc_opts);
  CHECK(excl.estimates[0][0].n + excl.capped_replicas == 500);
}

TEST_CASE("truncated tree run never reaches the boundary without migration") {
  InfiniteFamily family;
  family.kind = InfiniteFamily::Kind::Tree;
  family.d = 2;
  family.repro_self = AtomicMeasure::dirac(0.0, 1.0);  // mu = 0
  Rng rng(41);
  for (int k = 0; k < 20; ++k) {
    TruncatedRun run = simulate_truncated(family, 2, 1.0, rng);
    CHECK(!run.tau.has_value());
  }
}

TEST_CASE("truncated run at radius zero hits immediately") {
  InfiniteFamily family;
  family.kind = InfiniteFamily::Kind::Lattice;
  family.d = 1;
  family.repro_self = AtomicMeasure::dirac(0.0, 1.0);
  Rng rng(43);
  TruncatedRun run = simulate_truncated(family, 0, 1.0, rng);
  REQUIRE(run.tau.has_value());
  CHECK(*run.tau == 0.0);
}

TEST_CASE("contact dynamics on the line hit the first shell per the two-clock race") {
  // one particle at the origin: death ends the race at rate D, each of the
  // two neighbour births hits the boundary at rate R
  InfiniteFamily family;
  family.kind = InfiniteFamily::Kind::Lattice;
  family.d = 1;
  double D = 1.0, R = 0.75;
  family.death = AtomicMeasure::dirac(1.0, D);
  family.repro_neighbor = AtomicMeasure::dirac(1.0, R);

  double t_end = 1.5;
  double total_rate = D + 2.0 * R;
  double expected = (2.0 * R / total_rate) * (1.0 - std::exp(-total_rate * t_end));

  Rng rng(47);
  const int n_trials = 20000;
  int hits = 0;
  for (int k = 0; k < n_trials; ++k) {
    TruncatedRun run = simulate_truncated(family, 1, t_end, rng);
    if (run.tau.has_value()) ++hits;
  }
  double p_hat = static_cast<double>(hits) / n_trials;
  double se = std::sqrt(expected * (1.0 - expected) / n_trials);
  CHECK(std::abs(p_hat - expected) < 3.0 * se);
}

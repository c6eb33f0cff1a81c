#include "forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coordsim {

void apply_event(ParticleState& state, const EventRecord& ev) {
  long long i = ev.participants;
  switch (ev.kind) {
    case EventKind::Migration:
      if (i >= 1) {
        state.counts[ev.source] -= i;
        state.counts[ev.target] += i;
      }
      break;
    case EventKind::Death:
      if (i >= 1) state.counts[ev.source] -= i;
      break;
    case EventKind::Reproduction:
      if (i >= 1) state.counts[ev.target] += i;
      break;
    case EventKind::Coalescence:
      if (i >= 2) state.counts[ev.source] -= (i - 1);
      break;
  }
  if (state.counts[ev.source] < 0 || (ev.target >= 0 && state.counts[ev.target] < 0))
    throw std::logic_error("event drove a count negative");
}

ForwardSimulator::ForwardSimulator(const ModelSpec& spec, ParticleState z0)
    : spec_(&spec), state_(std::move(z0)) {
  int n = spec.vertex_count();
  if (static_cast<int>(state_.counts.size()) != n)
    throw std::invalid_argument("initial state size does not match the graph");
  for (long long c : state_.counts)
    if (c < 0) throw std::invalid_argument("negative initial count");

  channels_.resize(n);
  auto add = [&](EventKind kind, int source, int target, const AtomicMeasure& m) {
    MeasureSplit parts = split(m);
    if (parts.mass_at_zero > 0.0)
      channels_[source].push_back(Channel{kind, source, target, 0.0, parts.mass_at_zero});
    for (const Atom& a : parts.positive_atoms)
      channels_[source].push_back(Channel{kind, source, target, a.y, event_rate(a, kind)});
  };
  for (const auto& [v, m] : spec.coalescence_map()) add(EventKind::Coalescence, v, -1, m);
  for (const auto& [v, m] : spec.death_map()) add(EventKind::Death, v, -1, m);
  for (const auto& [vu, m] : spec.reproduction_map())
    add(EventKind::Reproduction, vu.first, vu.second, m);
  for (const auto& [vu, m] : spec.migration_map())
    add(EventKind::Migration, vu.first, vu.second, m);

  vertex_rate_cache_.assign(n, 0.0);
  for (int v = 0; v < n; ++v) refresh_vertex(v);
}

double ForwardSimulator::channel_rate(const Channel& c) const {
  long long z = state_.counts[c.source];
  if (c.kind == EventKind::Coalescence) {
    if (c.y == 0.0) return 0.5 * static_cast<double>(z) * static_cast<double>(z - 1) * c.rate_constant;
    return z >= 2 ? c.rate_constant : 0.0;
  }
  if (c.y == 0.0) return static_cast<double>(z) * c.rate_constant;
  return z >= 1 ? c.rate_constant : 0.0;
}

double ForwardSimulator::channel_effective_rate(const Channel& c) const {
  long long z = state_.counts[c.source];
  if (c.y == 0.0) return channel_rate(c);
  double miss = std::pow(1.0 - c.y, static_cast<double>(z));
  if (c.kind == EventKind::Coalescence) {
    if (z < 2) return 0.0;
    double single = static_cast<double>(z) * c.y *
                    std::pow(1.0 - c.y, static_cast<double>(z - 1));
    return c.rate_constant * (1.0 - miss - single);
  }
  if (z < 1) return 0.0;
  return c.rate_constant * (1.0 - miss);
}

double ForwardSimulator::vertex_rate(int v) const {
  double rate = 0.0;
  for (const Channel& c : channels_[v]) rate += channel_rate(c);
  return rate;
}

double ForwardSimulator::total_effective_rate() const {
  double total = 0.0;
  for (const auto& channels : channels_)
    for (const Channel& c : channels) total += channel_effective_rate(c);
  return total;
}

void ForwardSimulator::refresh_vertex(int v) { vertex_rate_cache_[v] = vertex_rate(v); }

double ForwardSimulator::total_active_rate() const {
  double total = 0.0;
  for (double r : vertex_rate_cache_) total += r;
  return total;
}

std::optional<double> ForwardSimulator::next_event_time(Rng& rng) {
  double total = total_active_rate();
  if (total <= 0.0) {
    pending_ = false;
    return std::nullopt;
  }
  pending_time_ = time_ + exponential(rng, total);
  pending_ = true;
  return pending_time_;
}

EventRecord ForwardSimulator::apply_pending(Rng& rng) {
  if (!pending_) throw std::logic_error("apply_pending without a pending event");
  pending_ = false;
  time_ = pending_time_;

  double total = total_active_rate();
  double u = uniform01(rng) * total;
  const Channel* chosen = nullptr;
  for (int v = 0; v < static_cast<int>(channels_.size()) && !chosen; ++v) {
    double vr = vertex_rate_cache_[v];
    if (u >= vr) {
      u -= vr;
      continue;
    }
    for (const Channel& c : channels_[v]) {
      double cr = channel_rate(c);
      if (u < cr) {
        chosen = &c;
        break;
      }
      u -= cr;
    }
    if (!chosen) {
      // roundoff fell between the cached and fresh vertex rate: take the
      // last active channel of this vertex
      for (auto it = channels_[v].rbegin(); it != channels_[v].rend(); ++it)
        if (channel_rate(*it) > 0.0) {
          chosen = &*it;
          break;
        }
    }
  }
  if (!chosen) {
    // roundoff at the vertex scan: take the last vertex with active rate
    for (int v = static_cast<int>(channels_.size()) - 1; v >= 0 && !chosen; --v) {
      if (vertex_rate_cache_[v] <= 0.0) continue;
      for (auto it = channels_[v].rbegin(); it != channels_[v].rend(); ++it)
        if (channel_rate(*it) > 0.0) {
          chosen = &*it;
          break;
        }
    }
  }
  if (!chosen) throw std::logic_error("no active channel despite positive total rate");

  EventRecord ev;
  ev.time = time_;
  ev.kind = chosen->kind;
  ev.source = chosen->source;
  ev.target = chosen->target;
  ev.impact = chosen->y;
  if (chosen->y == 0.0) {
    ev.participants = (chosen->kind == EventKind::Coalescence) ? 2 : 1;
  } else {
    ev.participants = participation_count(state_.counts[chosen->source], chosen->y, rng);
  }
  apply_event(state_, ev);
  refresh_vertex(ev.source);
  if (ev.target >= 0 && ev.target != ev.source) refresh_vertex(ev.target);
  return ev;
}

namespace {

bool any_occupied(const ParticleState& state, const std::vector<int>& vertices) {
  for (int v : vertices)
    if (state.counts[v] > 0) return true;
  return false;
}

}  // namespace

Trajectory simulate(const ModelSpec& spec, const ParticleState& z0, double t_end,
                    Rng& rng, const SimOptions& opts) {
  if (t_end < 0.0) throw std::invalid_argument("t_end must be >= 0");
  if (!std::is_sorted(opts.snapshot_times.begin(), opts.snapshot_times.end()) ||
      (!opts.snapshot_times.empty() && opts.snapshot_times.front() < 0.0))
    throw std::invalid_argument("snapshot times must be sorted and nonnegative");
  Trajectory traj;
  traj.initial = z0;
  traj.snapshot_times = opts.snapshot_times;

  ForwardSimulator sim(spec, z0);
  size_t snap_i = 0;
  auto emit_snapshots_below = [&](double bound, bool inclusive) {
    while (snap_i < opts.snapshot_times.size() &&
           (opts.snapshot_times[snap_i] < bound ||
            (inclusive && opts.snapshot_times[snap_i] == bound))) {
      traj.snapshots.push_back(sim.state());
      ++snap_i;
    }
  };

  bool watching = !opts.watch_vertices.empty();
  if (watching && any_occupied(sim.state(), opts.watch_vertices))
    traj.watch_hit_time = 0.0;

  std::uint64_t n_events = 0;
  bool stop = watching && opts.stop_on_watch_hit && traj.watch_hit_time.has_value();
  while (!stop) {
    auto tn = sim.next_event_time(rng);
    if (!tn || *tn > t_end) break;
    emit_snapshots_below(*tn, false);
    EventRecord ev = sim.apply_pending(rng);
    if (opts.record_events) traj.events.push_back(ev);
    ++n_events;
    if (watching && !traj.watch_hit_time && any_occupied(sim.state(), opts.watch_vertices)) {
      traj.watch_hit_time = ev.time;
      if (opts.stop_on_watch_hit) stop = true;
    }
    if (n_events >= opts.event_cap) {
      traj.cap_exceeded = true;
      traj.cap_reason = "event cap exceeded";
      break;
    }
    if (sim.state().total() > opts.population_cap) {
      traj.cap_exceeded = true;
      traj.cap_reason = "population cap exceeded";
      break;
    }
  }
  // freeze the remaining snapshots at the current state; for cap-exceeded
  // runs this is explicit (the flag is set), not silent truncation
  emit_snapshots_below(t_end, true);
  traj.end_time = traj.cap_exceeded ? sim.time() : t_end;
  traj.final_state = sim.state();
  return traj;
}

TruncatedRun simulate_truncated(const InfiniteFamily& family, int radius, double t_end,
                                Rng& rng, const SimOptions& opts,
                                const std::optional<ParticleState>& z0) {
  TruncatedModel window = truncate(family, radius);
  SimOptions local = opts;
  local.watch_vertices = window.boundary;
  ParticleState start = ParticleState::unit(window.spec.vertex_count(), window.root);
  if (z0) {
    start = *z0;
    if (static_cast<int>(start.counts.size()) != window.spec.vertex_count())
      throw std::invalid_argument("initial state size does not match the window");
    if (radius > 0)
      for (int v : window.boundary)
        if (start.counts[v] > 0)
          throw std::invalid_argument(
              "initial state must be supported strictly inside the window");
  }
  TruncatedRun run;
  run.trajectory = simulate(window.spec, start, t_end, rng, local);
  run.tau = run.trajectory.watch_hit_time;
  run.boundary = window.boundary;
  return run;
}

double evaluate_observable(const Observable& obs, const ParticleState& state) {
  switch (obs.kind) {
    case Observable::Kind::VertexCount:
      return static_cast<double>(state.counts.at(obs.vertex));
    case Observable::Kind::Total:
      return static_cast<double>(state.total());
    case Observable::Kind::ExtinctAt:
      return state.counts.at(obs.vertex) == 0 ? 1.0 : 0.0;
    case Observable::Kind::TotalBelow:
      return state.total() < obs.threshold ? 1.0 : 0.0;
    case Observable::Kind::MomentH: {
      double h = 1.0;
      for (size_t v = 0; v < state.counts.size(); ++v) {
        long long z = state.counts[v];
        if (z == 0) continue;  // 0^0 = 1
        h *= std::pow(obs.x.at(v), static_cast<double>(z));
      }
      return h;
    }
    case Observable::Kind::WeightedSum: {
      double s = 0.0;
      for (size_t v = 0; v < state.counts.size(); ++v)
        s += obs.x.at(v) * static_cast<double>(state.counts[v]);
      return s;
    }
  }
  return 0.0;
}

namespace {

struct McAccumulator {
  std::vector<std::vector<RunningStats>> stats;  // [time][obs]
  std::vector<BatchedVariance> variance;         // per obs, last time point
  long long capped = 0;

  void init(size_t n_times, size_t n_obs, int batches, long long n_replicas) {
    if (!stats.empty()) return;
    stats.assign(n_times, std::vector<RunningStats>(n_obs));
    variance.assign(n_obs, BatchedVariance(batches, n_replicas));
  }

  void merge(const McAccumulator& other) {
    if (other.stats.empty()) {
      capped += other.capped;
      return;
    }
    if (stats.empty()) {
      *this = other;
      return;
    }
    for (size_t t = 0; t < stats.size(); ++t)
      for (size_t o = 0; o < stats[t].size(); ++o) stats[t][o].merge(other.stats[t][o]);
    for (size_t o = 0; o < variance.size(); ++o) variance[o].merge(other.variance[o]);
    capped += other.capped;
  }
};

}  // namespace

MonteCarloResult monte_carlo(const ModelSpec& spec, const ParticleState& z0,
                             const std::vector<double>& sample_times,
                             long long n_replicas,
                             const std::vector<Observable>& observables,
                             std::uint64_t seed, const MonteCarloOptions& opts) {
  if (n_replicas < 2) throw std::invalid_argument("monte_carlo needs at least 2 replicas");
  if (sample_times.empty()) throw std::invalid_argument("monte_carlo needs sample times");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()) ||
      sample_times.front() < 0.0)
    throw std::invalid_argument("sample times must be sorted and nonnegative");

  SimOptions sim_opts;
  sim_opts.record_events = false;
  sim_opts.snapshot_times = sample_times;
  sim_opts.event_cap = opts.event_cap;
  sim_opts.population_cap = opts.population_cap;
  double t_end = sample_times.back();

  auto body = [&](long long replica, McAccumulator& acc) {
    acc.init(sample_times.size(), observables.size(), opts.variance_batches, n_replicas);
    Rng rng = replica_stream(seed, static_cast<std::uint64_t>(replica));
    Trajectory traj = simulate(spec, z0, t_end, rng, sim_opts);
    if (traj.cap_exceeded) {
      ++acc.capped;
      if (opts.exclude_capped) return;
    }
    for (size_t t = 0; t < sample_times.size(); ++t)
      for (size_t o = 0; o < observables.size(); ++o) {
        double value = evaluate_observable(observables[o], traj.snapshots[t]);
        acc.stats[t][o].add(value);
        if (t + 1 == sample_times.size()) acc.variance[o].add(replica, value);
      }
  };
  McAccumulator acc = run_replicas_chunked<McAccumulator>(n_replicas, opts.threads, body);

  MonteCarloResult out;
  out.replicas = n_replicas;
  out.capped_replicas = acc.capped;
  out.estimates.resize(sample_times.size());
  for (size_t t = 0; t < sample_times.size(); ++t)
    for (size_t o = 0; o < observables.size(); ++o)
      out.estimates[t].push_back(acc.stats[t][o].estimate());
  for (size_t o = 0; o < observables.size(); ++o)
    out.variance.push_back(acc.variance[o].variance_estimate());
  return out;
}

MonteCarloResult monte_carlo_at(const ModelSpec& spec, const ParticleState& z0, double t,
                                long long n_replicas,
                                const std::vector<Observable>& observables,
                                std::uint64_t seed, const MonteCarloOptions& opts) {
  return monte_carlo(spec, z0, {t}, n_replicas, observables, seed, opts);
}

}  // namespace coordsim

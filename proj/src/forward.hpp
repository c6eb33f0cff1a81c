#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace coordsim {

// Element of N0^V: the particle configuration.
struct ParticleState {
  std::vector<long long> counts;

  static ParticleState zeros(int n) { return {std::vector<long long>(n, 0)}; }
  static ParticleState unit(int n, int v) {
    ParticleState s = zeros(n);
    s.counts[v] = 1;
    return s;
  }
  long long total() const {
    long long t = 0;
    for (long long c : counts) t += c;
    return t;
  }
  bool operator==(const ParticleState&) const = default;
};

// One jump of the chain. `impact` is the atom location y that triggered the
// event (0 for per-individual events from atoms at zero); `participants` is
// the binomial draw i. Events whose draw fell below the kind's effective
// threshold (i = 0, or i <= 1 for coalescence) are kept as logged no-ops.
struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::Migration;
  int source = -1;
  int target = -1;  // -1 when the kind has no target vertex
  double impact = 0.0;
  long long participants = 0;
};

// Applies `ev` to `state` in place. Shared by the simulator and replay.
void apply_event(ParticleState& state, const EventRecord& ev);

struct Trajectory {
  ParticleState initial;
  std::vector<EventRecord> events;
  ParticleState final_state;
  double end_time = 0.0;

  std::vector<double> snapshot_times;
  std::vector<ParticleState> snapshots;

  bool cap_exceeded = false;
  std::string cap_reason;

  // first time a watched vertex was occupied, if watching was requested
  std::optional<double> watch_hit_time;
};

struct SimOptions {
  std::uint64_t event_cap = 10'000'000;
  long long population_cap = 10'000'000;
  bool record_events = true;
  std::vector<double> snapshot_times;  // must be sorted
  std::vector<int> watch_vertices;
  bool stop_on_watch_hit = false;
};

// Exact event-by-event simulator. Channels are competing exponential
// clocks: one per (vertex, atom-at-zero) pair with rate linear (or
// quadratic, for coalescence) in the local count, and one per positive atom
// with the constant Poissonized rate mass/y (mass/y^2 for coalescence).
// A positive-atom clock is suspended while its source count is too small
// for any state change (z_v = 0, or z_v <= 1 for coalescence), which is a
// thinning of the underlying Poisson process; while the clock runs,
// below-threshold binomial draws are delivered as no-op events.
class ForwardSimulator {
 public:
  ForwardSimulator(const ModelSpec& spec, ParticleState z0);

  // Time of the next event, drawn from the current total intensity, or
  // nullopt if the chain is quiescent (no clock can change the state).
  std::optional<double> next_event_time(Rng& rng);
  // Selects and applies the pending event. Must follow next_event_time.
  EventRecord apply_pending(Rng& rng);

  const ParticleState& state() const { return state_; }
  double time() const { return time_; }
  // Total intensity of all running clocks, no-op draws included.
  double total_active_rate() const;
  // Rate at which the chain leaves the current state: clock intensities
  // thinned by the probability that the participation draw clears the
  // kind's threshold. This is the quantity the linear-quadratic rate bound
  // applies to.
  double total_effective_rate() const;

 private:
  struct Channel {
    EventKind kind;
    int source;
    int target;      // -1 if not applicable
    double y;        // 0 => per-individual channel
    double rate_constant;  // y>0: mass/y or mass/y^2; y==0: the mass itself
  };

  double channel_rate(const Channel& c) const;
  double channel_effective_rate(const Channel& c) const;
  double vertex_rate(int v) const;
  void refresh_vertex(int v);

  const ModelSpec* spec_;
  ParticleState state_;
  double time_ = 0.0;
  bool pending_ = false;
  double pending_time_ = 0.0;
  std::vector<std::vector<Channel>> channels_;  // by source vertex
  std::vector<double> vertex_rate_cache_;
};

Trajectory simulate(const ModelSpec& spec, const ParticleState& z0, double t_end,
                    Rng& rng, const SimOptions& opts = {});

struct TruncatedRun {
  Trajectory trajectory;
  //ties the run to the window: first boundary-occupancy time
  std::optional<double> tau;
  std::vector<int> boundary;
};

// Simulates the radius-N window of an infinite family, reporting the first
// time the boundary shell is occupied. The default start is one particle at
// the root; an explicit start must be supported strictly inside the window.
TruncatedRun simulate_truncated(const InfiniteFamily& family, int radius, double t_end,
                                Rng& rng, const SimOptions& opts = {},
                                const std::optional<ParticleState>& z0 = std::nullopt);

// ---- Monte Carlo ----

struct Observable {
  enum class Kind {
    VertexCount,   // Z_t^{(v)}
    Total,         // |Z_t|
    ExtinctAt,     // 1{Z_t^{(v)} = 0}
    TotalBelow,    // 1{|Z_t| < threshold}
    MomentH,       // prod_v x_v^{Z_t^{(v)}}, 0^0 = 1
    WeightedSum,   // sum_v x_v * Z_t^{(v)}
  };
  Kind kind = Kind::Total;
  int vertex = -1;
  long long threshold = 0;
  std::vector<double> x;  // frequencies (MomentH) or weights (WeightedSum)

  static Observable vertex_count(int v) { return {Kind::VertexCount, v, 0, {}}; }
  static Observable total() { return {Kind::Total, -1, 0, {}}; }
  static Observable extinct_at(int v) { return {Kind::ExtinctAt, v, 0, {}}; }
  static Observable total_below(long long m) { return {Kind::TotalBelow, -1, m, {}}; }
  static Observable moment(std::vector<double> x) {
    return {Kind::MomentH, -1, 0, std::move(x)};
  }
  static Observable weighted_sum(std::vector<double> w) {
    return {Kind::WeightedSum, -1, 0, std::move(w)};
  }
};

double evaluate_observable(const Observable& obs, const ParticleState& state);

struct MonteCarloOptions {
  int threads = 1;
  std::uint64_t event_cap = 10'000'000;
  long long population_cap = 10'000'000;
  bool exclude_capped = false;  // capped replicas are counted either way
  int variance_batches = 30;
};

struct MonteCarloResult {
  // estimates[time_index][observable_index]
  std::vector<std::vector<EstimateWithCI>> estimates;
  // batch-based variance estimate of each observable at the last time point
  std::vector<EstimateWithCI> variance;
  long long replicas = 0;
  long long capped_replicas = 0;
};

MonteCarloResult monte_carlo(const ModelSpec& spec, const ParticleState& z0,
                             const std::vector<double>& sample_times,
                             long long n_replicas,
                             const std::vector<Observable>& observables,
                             std::uint64_t seed, const MonteCarloOptions& opts = {});

// single-time convenience wrapper
MonteCarloResult monte_carlo_at(const ModelSpec& spec, const ParticleState& z0, double t,
                                long long n_replicas,
                                const std::vector<Observable>& observables,
                                std::uint64_t seed, const MonteCarloOptions& opts = {});

}  // namespace coordsim

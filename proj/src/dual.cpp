#include "dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coordsim {

namespace {

struct JumpChannel {
  EventKind kind;
  int vertex;
  int other;  // u for migration/reproduction, -1 otherwise
  double y;
  double rate;
  double next_time = std::numeric_limits<double>::infinity();
};

struct DriftTerm {
  int other;
  double mass;
};

// Atom-at-zero drift/diffusion coefficients and positive-atom jump channels
// of the dual SDE system.
struct DualDynamics {
  int n = 0;
  std::vector<std::vector<DriftTerm>> migration;  // (x_u - x_v) * mass
  std::vector<std::vector<DriftTerm>> selection;  // x_v (x_u - 1) * mass
  std::vector<double> mutation;                   // (1 - x_v) * mass
  std::vector<double> diffusion;                  // noise sqrt(c x(1-x))
  bool has_diffusion = false;
  bool has_drift = false;
  std::vector<JumpChannel> channels;

  explicit DualDynamics(const ModelSpec& spec) {
    n = spec.vertex_count();
    migration.resize(n);
    selection.resize(n);
    mutation.assign(n, 0.0);
    diffusion.assign(n, 0.0);
    for (const auto& [v, m] : spec.coalescence_map()) {
      MeasureSplit parts = split(m);
      diffusion[v] = parts.mass_at_zero;
      if (parts.mass_at_zero > 0.0) has_diffusion = true;
      for (const Atom& a : parts.positive_atoms)
        channels.push_back(
            {EventKind::Coalescence, v, -1, a.y, event_rate(a, EventKind::Coalescence)});
    }
    for (const auto& [v, m] : spec.death_map()) {
      MeasureSplit parts = split(m);
      mutation[v] = parts.mass_at_zero;
      for (const Atom& a : parts.positive_atoms)
        channels.push_back({EventKind::Death, v, -1, a.y, event_rate(a, EventKind::Death)});
    }
    for (const auto& [vu, m] : spec.reproduction_map()) {
      MeasureSplit parts = split(m);
      if (parts.mass_at_zero > 0.0)
        selection[vu.first].push_back({vu.second, parts.mass_at_zero});
      for (const Atom& a : parts.positive_atoms)
        channels.push_back({EventKind::Reproduction, vu.first, vu.second, a.y,
                            event_rate(a, EventKind::Reproduction)});
    }
    for (const auto& [vu, m] : spec.migration_map()) {
      MeasureSplit parts = split(m);
      if (parts.mass_at_zero > 0.0)
        migration[vu.first].push_back({vu.second, parts.mass_at_zero});
      for (const Atom& a : parts.positive_atoms)
        channels.push_back({EventKind::Migration, vu.first, vu.second, a.y,
                            event_rate(a, EventKind::Migration)});
    }
    for (int v = 0; v < n; ++v)
      if (!migration[v].empty() || !selection[v].empty() || mutation[v] > 0.0)
        has_drift = true;
  }

  void drift(const std::vector<double>& x, std::vector<double>& out) const {
    for (int v = 0; v < n; ++v) {
      double d = 0.0;
      for (const DriftTerm& term : migration[v]) d += term.mass * (x[term.other] - x[v]);
      for (const DriftTerm& term : selection[v]) d += term.mass * x[v] * (x[term.other] - 1.0);
      d += mutation[v] * (1.0 - x[v]);
      out[v] = d;
    }
  }

  // Exact jump maps; each maps [0,1]^V into itself.
  void apply_jump(const JumpChannel& c, std::vector<double>& x, Rng& rng) const {
    double& xv = x[c.vertex];
    switch (c.kind) {
      case EventKind::Migration:
        xv += c.y * (x[c.other] - xv);
        break;
      case EventKind::Reproduction:
        xv += c.y * xv * (x[c.other] - 1.0);
        break;
      case EventKind::Death:
        xv += c.y * (1.0 - xv);
        break;
      case EventKind::Coalescence: {
        double theta = uniform01(rng);
        xv += c.y * ((theta < xv ? 1.0 : 0.0) - xv);
        break;
      }
    }
  }
};

}  // namespace

double default_hit_tolerance(const ModelSpec& spec) {
  for (int v = 0; v < spec.vertex_count(); ++v) {
    bool exact = spec.coalescence(v).mass_at(0.0) > 0.0 ||
                 spec.coalescence(v).mass_at(1.0) > 0.0 ||
                 spec.death(v).mass_at(1.0) > 0.0;
    if (!exact)
      for (int u = 0; u < spec.vertex_count() && !exact; ++u)
        exact = spec.migration(v, u).mass_at(1.0) > 0.0;
    if (!exact) return 1.0 - 1e-9;
  }
  return 1.0;
}

namespace {

struct DualRun {
  DualPath path;
  bool hit = false;
  double hit_time = 0.0;
};

DualRun run_dual(const ModelSpec& spec, const FrequencyState& x0, double t_end,
                 const DualConfig& cfg, Rng& rng, const std::vector<double>& sample_times,
                 bool detect_hit) {
  int n = spec.vertex_count();
  if (static_cast<int>(x0.x.size()) != n)
    throw std::invalid_argument("initial frequency size mismatch");
  for (double xv : x0.x)
    if (!(xv >= 0.0 && xv <= 1.0))
      throw std::invalid_argument("initial frequencies must lie in [0,1]");
  if (cfg.dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw std::invalid_argument("sample times must be sorted");
  if (!sample_times.empty() && sample_times.back() > t_end)
    throw std::invalid_argument("sample times beyond the horizon");

  DualDynamics dyn(spec);
  double hit_tol = cfg.hit_tolerance > 0.0 ? cfg.hit_tolerance : default_hit_tolerance(spec);

  DualRun run;
  run.path.sample_times = sample_times;
  std::vector<double> x = x0.x;
  double t = 0.0;
  size_t snap_i = 0;

  auto all_at_one = [&]() {
    for (double xv : x)
      if (xv < hit_tol) return false;
    return true;
  };
  auto check_hit = [&](double now) {
    if (detect_hit && !run.hit && all_at_one()) {
      run.hit = true;
      run.hit_time = now;
    }
  };
  check_hit(0.0);

  for (JumpChannel& c : dyn.channels) c.next_time = exponential(rng, c.rate);

  std::vector<double> drift(n);
  auto emit_due_samples = [&]() {
    while (snap_i < sample_times.size() && sample_times[snap_i] <= t) {
      run.path.samples.push_back({x});
      ++snap_i;
    }
  };
  auto integrate_to = [&](double target) {
    // advance drift + diffusion from t to target, emitting samples en route
    emit_due_samples();
    while (t < target) {
      if (detect_hit && run.hit) {
        t = target;  // the rest of the path no longer matters
        break;
      }
      double stop = target;
      if (snap_i < sample_times.size()) stop = std::min(stop, sample_times[snap_i]);
      double span = stop - t;
      if (span > 0.0 && (dyn.has_drift || dyn.has_diffusion)) {
        int steps = std::max(1, static_cast<int>(std::ceil(span / cfg.dt)));
        double h = span / steps;
        double sqrt_h = std::sqrt(h);
        for (int s = 0; s < steps; ++s) {
          dyn.drift(x, drift);
          for (int v = 0; v < n; ++v) {
            double next = x[v] + h * drift[v];
            if (dyn.diffusion[v] > 0.0)
              next += std::sqrt(std::max(0.0, dyn.diffusion[v] * x[v] * (1.0 - x[v]))) *
                      sqrt_h * normal(rng);
            if (next < 0.0) {
              run.path.clamp_total += -next;
              next = 0.0;
            } else if (next > 1.0) {
              run.path.clamp_total += next - 1.0;
              next = 1.0;
            }
            x[v] = next;
          }
          check_hit(t + (s + 1) * h);
        }
      }
      t = stop;
      emit_due_samples();
    }
  };

  while (t < t_end) {
    double t_jump = std::numeric_limits<double>::infinity();
    JumpChannel* next_channel = nullptr;
    for (JumpChannel& c : dyn.channels)
      if (c.next_time < t_jump) {
        t_jump = c.next_time;
        next_channel = &c;
      }
    if (!next_channel || t_jump >= t_end) {
      integrate_to(t_end);
      break;
    }
    integrate_to(t_jump);
    if (detect_hit && run.hit) break;
    dyn.apply_jump(*next_channel, x, rng);
    ++run.path.jump_count;
    if (cfg.record_jumps) run.path.jumps.emplace_back(t_jump, next_channel->vertex);
    check_hit(t_jump);
    next_channel->next_time = t_jump + exponential(rng, next_channel->rate);
    if (detect_hit && run.hit) break;
  }
  // t_end == 0, or sample points sitting exactly on the horizon
  while (snap_i < sample_times.size() && sample_times[snap_i] <= t_end) {
    run.path.samples.push_back({x});
    ++snap_i;
  }

  run.path.final_state = {x};
  run.path.end_time = t;
  return run;
}

}  // namespace

DualPath simulate_dual(const ModelSpec& spec, const FrequencyState& x0, double t_end,
                       const DualConfig& cfg, Rng& rng,
                       const std::vector<double>& sample_times) {
  return run_dual(spec, x0, t_end, cfg, rng, sample_times, false).path;
}

EstimateWithCI moment_estimate(const ModelSpec& spec, const FrequencyState& x0,
                               const std::vector<long long>& z, double t,
                               long long n_replicas, const DualConfig& cfg,
                               std::uint64_t seed, int threads) {
  if (static_cast<int>(z.size()) != spec.vertex_count())
    throw std::invalid_argument("dual moment exponent size mismatch");
  auto h_value = [&](const FrequencyState& state) {
    double h = 1.0;
    for (size_t v = 0; v < state.x.size(); ++v) {
      if (z[v] == 0) continue;  // 0^0 = 1
      h *= std::pow(state.x[v], static_cast<double>(z[v]));
    }
    return h;
  };
  if (t == 0.0) return {h_value(x0), 0.0, n_replicas};
  auto body = [&](long long replica, RunningStats& acc) {
    Rng rng = replica_stream(seed, static_cast<std::uint64_t>(replica));
    DualPath path = simulate_dual(spec, x0, t, cfg, rng);
    acc.add(h_value(path.final_state));
  };
  RunningStats acc = run_replicas_chunked<RunningStats>(n_replicas, threads, body);
  return acc.estimate();
}

std::optional<double> tau_hit(const ModelSpec& spec, const FrequencyState& x0,
                              double t_max, const DualConfig& cfg, Rng& rng) {
  DualRun run = run_dual(spec, x0, t_max, cfg, rng, {}, true);
  if (run.hit) return run.hit_time;
  return std::nullopt;
}

std::vector<std::vector<double>> dual_drift_ode(const ModelSpec& spec,
                                                const std::vector<double>& x0,
                                                const std::vector<double>& t_grid,
                                                double* error_estimate) {
  int n = spec.vertex_count();
  if (static_cast<int>(x0.size()) != n)
    throw std::invalid_argument("initial frequency size mismatch");
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.front() < 0.0)
    throw std::invalid_argument("time grid must be sorted and nonnegative");

  DualDynamics dyn(spec);
  if (!dyn.channels.empty())
    throw std::invalid_argument(
        "dual_drift_ode requires a drift-only dual: all measures must sit at zero");
  if (dyn.has_diffusion)
    throw std::invalid_argument(
        "dual_drift_ode cannot handle coalescence mass (it adds diffusion); "
        "use simulate_dual");

  auto rhs = [&dyn](double, const std::vector<double>& x, std::vector<double>& dx) {
    dyn.drift(x, dx);
  };

  constexpr double kExitTolerance = 1e-7;
  std::vector<std::vector<double>> out;
  std::vector<double> x = x0;
  double t = 0.0;
  double err_total = 0.0;
  for (double target : t_grid) {
    double span = target - t;
    if (span > 0.0) {
      int steps = std::max(8, static_cast<int>(std::ceil(span / 1e-3)));
      double err = 0.0;
      x = rk4_solve(rhs, x, span, steps, error_estimate ? &err : nullptr);
      err_total += err;
      for (double& xv : x) {
        if (xv < -kExitTolerance || xv > 1.0 + kExitTolerance)
          throw std::runtime_error("dual ODE solution left [0,1]; step rejected");
        xv = std::clamp(xv, 0.0, 1.0);
      }
      t = target;
    }
    out.push_back(x);
  }
  if (error_estimate) *error_estimate = err_total;
  return out;
}

std::vector<std::vector<double>> pam_dual_ode(const PotentialField& field,
                                              const GraphSpec& box,
                                              const std::vector<double>& x0,
                                              const std::vector<double>& t_grid,
                                              double* error_estimate) {
  ModelSpec spec = presets::pam_branching(box, field.xi_plus, field.xi_minus);
  return dual_drift_ode(spec, x0, t_grid, error_estimate);
}

}  // namespace coordsim

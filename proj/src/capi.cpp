#include "coordsim.h"

#include <cstring>
#include <exception>
#include <limits>
#include <string>

#include <json.hpp>

#include "analytics.hpp"
#include "dual.hpp"
#include "forward.hpp"
#include "harness.hpp"
#include "measure.hpp"
#include "model.hpp"
#include "model_json.hpp"
#include "pam.hpp"
#include "stats.hpp"

using namespace coordsim;

namespace {

thread_local std::string g_last_error;

int fail_with(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return CSIM_OK;
  } catch (const nlohmann::json::parse_error& e) {
    return fail_with(CSIM_ERR_PARSE, e.what());
  } catch (const std::invalid_argument& e) {
    std::string what = e.what();
    if (what.find("unknown preset") != std::string::npos ||
        what.find("unknown graph kind") != std::string::npos)
      return fail_with(CSIM_ERR_UNKNOWN_NAME, what);
    return fail_with(CSIM_ERR_INVALID_ARGUMENT, what);
  } catch (const std::exception& e) {
    return fail_with(CSIM_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail_with(CSIM_ERR_RUNTIME, "unknown error");
  }
}

int require(bool ok, const char* message) {
  if (ok) return CSIM_OK;
  return fail_with(CSIM_ERR_INVALID_ARGUMENT, message);
}

csim_estimate to_c(const EstimateWithCI& e) { return {e.mean, e.se, e.n}; }

std::vector<long long> copy_state(const long long* z0, int n) {
  if (!z0) throw std::invalid_argument("null state pointer");
  return std::vector<long long>(z0, z0 + n);
}

std::vector<double> copy_freq(const double* x, int n) {
  if (!x) throw std::invalid_argument("null frequency pointer");
  return std::vector<double>(x, x + n);
}

GraphSpec make_box(int K, int d, int torus) {
  return torus ? GraphSpec::torus(K, d) : GraphSpec::grid(K, d);
}

PotentialField make_field(const double* xi_plus, const double* xi_minus, int n) {
  if (!xi_plus || !xi_minus) throw std::invalid_argument("null potential pointer");
  PotentialField f;
  f.xi_plus.assign(xi_plus, xi_plus + n);
  f.xi_minus.assign(xi_minus, xi_minus + n);
  return f;
}

PotentialDistribution parse_family(const char* family, double a, double b) {
  if (!family) throw std::invalid_argument("null potential family");
  std::string name = family;
  PotentialDistribution dist;
  dist.a = a;
  dist.b = b;
  if (name == "zero") dist.family = PotentialDistribution::Family::Zero;
  else if (name == "uniform") dist.family = PotentialDistribution::Family::Uniform;
  else if (name == "exponential") dist.family = PotentialDistribution::Family::Exponential;
  else if (name == "pareto") dist.family = PotentialDistribution::Family::Pareto;
  else throw std::invalid_argument("unknown preset family '" + name + "'");
  return dist;
}

}  // namespace

struct csim_model {
  ModelSpec spec;
};

struct csim_trajectory {
  Trajectory trajectory;
  int vertex_count = 0;
};

extern "C" {

const char* csim_version(void) { return "0.1.0"; }

const char* csim_status_name(int status) {
  switch (status) {
    case CSIM_OK: return "ok";
    case CSIM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CSIM_ERR_PARSE: return "parse error";
    case CSIM_ERR_UNKNOWN_NAME: return "unknown name";
    case CSIM_ERR_RUNTIME: return "runtime error";
  }
  return "unknown status";
}

const char* csim_last_error(void) { return g_last_error.c_str(); }

int csim_model_from_json(const char* json_text, csim_model** out) {
  if (int rc = require(json_text && out, "null argument")) return rc;
  return guarded([&] {
    nlohmann::json j = nlohmann::json::parse(json_text);
    *out = new csim_model{model_from_json(j)};
  });
}

int csim_model_preset(const char* name, const char* params_json, csim_model** out) {
  if (int rc = require(name && out, "null argument")) return rc;
  return guarded([&] {
    nlohmann::json params =
        params_json && *params_json ? nlohmann::json::parse(params_json)
                                    : nlohmann::json::object();
    *out = new csim_model{preset_from_json(name, params)};
  });
}

void csim_model_free(csim_model* model) { delete model; }

int csim_model_vertex_count(const csim_model* model, int* out) {
  if (int rc = require(model && out, "null argument")) return rc;
  *out = model->spec.vertex_count();
  return CSIM_OK;
}

int csim_model_vertex_label(const csim_model* model, int v, char* buffer, size_t size) {
  if (int rc = require(model && buffer && size > 0, "null argument")) return rc;
  return guarded([&] {
    std::string label = model->spec.graph().label(v);
    std::strncpy(buffer, label.c_str(), size - 1);
    buffer[size - 1] = '\0';
  });
}

int csim_model_type_json(const csim_model* model, char** out_json) {
  if (int rc = require(model && out_json, "null argument")) return rc;
  return guarded([&] {
    std::string text = type_signature_to_json(model->spec.type()).dump();
    *out_json = new char[text.size() + 1];
    std::memcpy(*out_json, text.c_str(), text.size() + 1);
  });
}

void csim_string_free(char* text) { delete[] text; }

const char* csim_event_kind_name(int kind) {
  switch (static_cast<EventKind>(kind)) {
    case EventKind::Migration: return "migration";
    case EventKind::Death: return "death";
    case EventKind::Reproduction: return "reproduction";
    case EventKind::Coalescence: return "coalescence";
  }
  return "?";
}

int csim_simulate(const csim_model* model, const long long* z0, double t_end,
                  uint64_t seed, uint64_t event_cap, long long population_cap,
                  const double* snapshot_times, size_t n_snapshots,
                  csim_trajectory** out) {
  if (int rc = require(model && z0 && out, "null argument")) return rc;
  return guarded([&] {
    int n = model->spec.vertex_count();
    SimOptions opts;
    if (event_cap > 0) opts.event_cap = event_cap;
    if (population_cap > 0) opts.population_cap = population_cap;
    if (n_snapshots > 0) {
      if (!snapshot_times) throw std::invalid_argument("null snapshot times");
      opts.snapshot_times.assign(snapshot_times, snapshot_times + n_snapshots);
    }
    Rng rng = replica_stream(seed, 0);
    Trajectory traj =
        simulate(model->spec, ParticleState{copy_state(z0, n)}, t_end, rng, opts);
    *out = new csim_trajectory{std::move(traj), n};
  });
}

void csim_trajectory_free(csim_trajectory* trajectory) { delete trajectory; }

size_t csim_trajectory_event_count(const csim_trajectory* trajectory) {
  return trajectory ? trajectory->trajectory.events.size() : 0;
}

int csim_trajectory_event(const csim_trajectory* trajectory, size_t index,
                          csim_event* out) {
  if (int rc = require(trajectory && out, "null argument")) return rc;
  if (int rc = require(index < trajectory->trajectory.events.size(),
                       "event index out of range"))
    return rc;
  const EventRecord& e = trajectory->trajectory.events[index];
  *out = {e.time, static_cast<int>(e.kind), e.source, e.target, e.impact, e.participants};
  return CSIM_OK;
}

int csim_trajectory_final_state(const csim_trajectory* trajectory, long long* out) {
  if (int rc = require(trajectory && out, "null argument")) return rc;
  for (int v = 0; v < trajectory->vertex_count; ++v)
    out[v] = trajectory->trajectory.final_state.counts[v];
  return CSIM_OK;
}

int csim_trajectory_snapshot(const csim_trajectory* trajectory, size_t index,
                             long long* out) {
  if (int rc = require(trajectory && out, "null argument")) return rc;
  if (int rc = require(index < trajectory->trajectory.snapshots.size(),
                       "snapshot index out of range"))
    return rc;
  for (int v = 0; v < trajectory->vertex_count; ++v)
    out[v] = trajectory->trajectory.snapshots[index].counts[v];
  return CSIM_OK;
}

int csim_trajectory_cap_exceeded(const csim_trajectory* trajectory) {
  return trajectory && trajectory->trajectory.cap_exceeded ? 1 : 0;
}

int csim_mc_vertex_means(const csim_model* model, const long long* z0, double t,
                         long long replicas, uint64_t seed, int threads,
                         csim_estimate* out, long long* capped_replicas) {
  if (int rc = require(model && z0 && out, "null argument")) return rc;
  return guarded([&] {
    int n = model->spec.vertex_count();
    std::vector<Observable> obs;
    obs.reserve(n);
    for (int v = 0; v < n; ++v) obs.push_back(Observable::vertex_count(v));
    MonteCarloOptions opts;
    opts.threads = threads;
    MonteCarloResult mc = monte_carlo_at(model->spec, ParticleState{copy_state(z0, n)},
                                         t, replicas, obs, seed, opts);
    for (int v = 0; v < n; ++v) out[v] = to_c(mc.estimates[0][v]);
    if (capped_replicas) *capped_replicas = mc.capped_replicas;
  });
}

int csim_truncated_run(int family_kind, int d, const char* measures_json, int radius,
                       double t_end, uint64_t seed, double* tau_hit,
                       long long* final_total) {
  if (int rc = require(measures_json && tau_hit, "null argument")) return rc;
  return guarded([&] {
    nlohmann::json j = nlohmann::json::parse(measures_json);
    InfiniteFamily family;
    family.kind = family_kind == 1 ? InfiniteFamily::Kind::Tree
                                   : InfiniteFamily::Kind::Lattice;
    family.d = d;
    auto load = [&](const char* key, AtomicMeasure& into) {
      if (j.contains(key)) into = measure_from_json(j[key], key);
    };
    load("coalescence", family.coalescence);
    load("death", family.death);
    load("repro_self", family.repro_self);
    load("repro_neighbor", family.repro_neighbor);
    load("migration_neighbor", family.migration_neighbor);
    load("migration_down", family.migration_down);
    Rng rng = replica_stream(seed, 0);
    TruncatedRun run = simulate_truncated(family, radius, t_end, rng);
    *tau_hit = run.tau ? *run.tau : std::numeric_limits<double>::infinity();
    if (final_total) *final_total = run.trajectory.final_state.total();
  });
}

int csim_simulate_dual(const csim_model* model, const double* x0, double t_end,
                       double dt, uint64_t seed, const double* sample_times,
                       size_t n_samples, double* out_values, double* clamp_total,
                       long long* jump_count) {
  if (int rc = require(model && x0 && out_values, "null argument")) return rc;
  return guarded([&] {
    int n = model->spec.vertex_count();
    DualConfig cfg;
    if (dt > 0) cfg.dt = dt;
    std::vector<double> times;
    if (n_samples > 0) {
      if (!sample_times) throw std::invalid_argument("null sample times");
      times.assign(sample_times, sample_times + n_samples);
    }
    Rng rng = replica_stream(seed, 0);
    DualPath path = simulate_dual(model->spec, FrequencyState{copy_freq(x0, n)}, t_end,
                                  cfg, rng, times);
    for (size_t k = 0; k < path.samples.size(); ++k)
      for (int v = 0; v < n; ++v) out_values[k * n + v] = path.samples[k].x[v];
    if (clamp_total) *clamp_total = path.clamp_total;
    if (jump_count) *jump_count = path.jump_count;
  });
}

int csim_dual_moment(const csim_model* model, const double* x0, const long long* z,
                     double t, long long replicas, double dt, uint64_t seed, int threads,
                     csim_estimate* out) {
  if (int rc = require(model && x0 && z && out, "null argument")) return rc;
  return guarded([&] {
    int n = model->spec.vertex_count();
    DualConfig cfg;
    if (dt > 0) cfg.dt = dt;
    *out = to_c(moment_estimate(model->spec, FrequencyState{copy_freq(x0, n)},
                                copy_state(z, n), t, replicas, cfg, seed, threads));
  });
}

int csim_tau_hit_curve(const csim_model* model, const double* x_grid, size_t n_grid,
                       double t, long long replicas, double dt, uint64_t seed,
                       int threads, csim_estimate* out) {
  if (int rc = require(model && x_grid && out, "null argument")) return rc;
  return guarded([&] {
    DualConfig cfg;
    if (dt > 0) cfg.dt = dt;
    std::vector<double> grid(x_grid, x_grid + n_grid);
    std::vector<EstimateWithCI> curve =
        tau_hit_curve(model->spec, grid, t, replicas, cfg, seed, threads);
    for (size_t k = 0; k < curve.size(); ++k) out[k] = to_c(curve[k]);
  });
}

int csim_expectation_ode(const csim_model* model, const long long* z0, double t,
                         double* out, double* error_estimate) {
  if (int rc = require(model && z0 && out, "null argument")) return rc;
  return guarded([&] {
    int n = model->spec.vertex_count();
    std::vector<double> f =
        expectation_ode(model->spec, copy_state(z0, n), t, error_estimate);
    std::copy(f.begin(), f.end(), out);
  });
}

int csim_kingman_bound(const csim_model* model, const long long* z0, double t,
                       double* out, double* error_estimate) {
  if (int rc = require(model && z0 && out, "null argument")) return rc;
  return guarded([&] {
    int n = model->spec.vertex_count();
    std::vector<double> f = kingman_bound(model->spec, copy_state(z0, n), t, error_estimate);
    std::copy(f.begin(), f.end(), out);
  });
}

int csim_pam_ode(const double* xi_plus, const double* xi_minus, int K, int d, int torus,
                 int v0, double t, double* out, double* error_estimate) {
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    GraphSpec box = make_box(K, d, torus);
    PotentialField field = make_field(xi_plus, xi_minus, box.size());
    std::vector<double> f = pam_ode(field, box, v0, t, error_estimate);
    std::copy(f.begin(), f.end(), out);
  });
}

int csim_tree_brw_expectation(int d, double r, double mu, double t, int generation,
                              double* out) {
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = tree_brw_expectation(d, r, mu, t, generation); });
}

int csim_tree_brw_mc(int d, int depth, double r, double mu, double t,
                     long long replicas, uint64_t seed, int threads,
                     csim_estimate* out) {
  if (int rc = require(out != nullptr && depth >= 0, "null argument")) return rc;
  return guarded([&] {
    // one spare generation: the last ring has no outflow, which would bias
    // its own mean but not those of the generations above it
    ModelSpec spec = presets::tree_brw(d, depth + 1, r, mu);
    const GraphSpec& g = spec.graph();
    std::vector<Observable> obs;
    for (int k = 0; k <= depth; ++k) {
      std::vector<double> weights(g.size(), 0.0);
      double scale = 1.0 / static_cast<double>(g.tree_generation_size(k));
      int begin = g.tree_generation_begin(k);
      for (int i = 0; i < g.tree_generation_size(k); ++i) weights[begin + i] = scale;
      obs.push_back(Observable::weighted_sum(std::move(weights)));
    }
    MonteCarloOptions opts;
    opts.threads = threads;
    MonteCarloResult mc = monte_carlo_at(spec, ParticleState::unit(g.size(), 0), t,
                                         replicas, obs, seed, opts);
    for (int k = 0; k <= depth; ++k) out[k] = to_c(mc.estimates[0][k]);
  });
}

int csim_moment_condition(const char* family, double pareto_alpha, int d, int* satisfied,
                          char** diagnostic) {
  if (int rc = require(family && satisfied, "null argument")) return rc;
  return guarded([&] {
    std::string name = family;
    TailFamily f;
    if (name == "bounded") f = TailFamily::Bounded;
    else if (name == "exponential") f = TailFamily::ExponentialTail;
    else if (name == "pareto") f = TailFamily::Pareto;
    else throw std::invalid_argument("unknown preset family '" + name + "'");
    MomentConditionReport report = moment_condition_check(f, pareto_alpha, d);
    *satisfied = report.satisfied ? 1 : 0;
    if (diagnostic) {
      *diagnostic = new char[report.diagnostic.size() + 1];
      std::memcpy(*diagnostic, report.diagnostic.c_str(), report.diagnostic.size() + 1);
    }
  });
}

int csim_duality_check(const csim_model* model, const double* x, const long long* z,
                       double t, long long replicas, uint64_t seed, double threshold,
                       double dual_dt, int threads, csim_duality_report* out) {
  if (int rc = require(model && x && z && out, "null argument")) return rc;
  return guarded([&] {
    int n = model->spec.vertex_count();
    DualConfig cfg;
    if (dual_dt > 0) cfg.dt = dual_dt;
    DualityReport report =
        duality_check(model->spec, copy_freq(x, n), copy_state(z, n), t, replicas, seed,
                      threshold > 0 ? threshold : 4.0, cfg, threads);
    *out = {to_c(report.forward), to_c(report.dual), report.z, report.threshold,
            report.pass ? 1 : 0};
  });
}

int csim_oracle_moment(const csim_model* model, const long long* z0, const double* x,
                       double t, long long total_cap, double* value, double* leak,
                       long long* n_states) {
  if (int rc = require(model && z0 && x && value, "null argument")) return rc;
  return guarded([&] {
    int n = model->spec.vertex_count();
    OracleOptions opts;
    if (total_cap > 0) opts.total_cap = total_cap;
    OracleResult res =
        oracle_expm(model->spec, copy_state(z0, n), copy_freq(x, n), t, opts);
    *value = res.value;
    if (leak) *leak = res.leak;
    if (n_states) *n_states = res.n_states;
  });
}

int csim_cdi_probe(const csim_model* model, const long long* n_list, size_t n_points,
                   long long m, double t, long long replicas, uint64_t seed, int threads,
                   csim_estimate* out) {
  if (int rc = require(model && n_list && out, "null argument")) return rc;
  return guarded([&] {
    MonteCarloOptions opts;
    opts.threads = threads;
    std::vector<long long> ns(n_list, n_list + n_points);
    std::vector<CdiPoint> curve = cdi_probe(model->spec, ns, m, t, replicas, seed, opts);
    for (size_t k = 0; k < curve.size(); ++k) out[k] = to_c(curve[k].estimate);
  });
}

int csim_fixation_probe(double alpha, double p, double t_end, double eps,
                        long long replicas, uint64_t seed, double n0, int threads,
                        csim_estimate* out) {
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *out = to_c(fixation_probe(alpha, p, t_end, eps, replicas, seed, n0, threads));
  });
}

int csim_variance_order(const csim_model* model, const long long* z0, double t,
                        long long replicas, uint64_t seed, int threads,
                        csim_variance_point* out, int* ordered) {
  if (int rc = require(model && z0 && out, "null argument")) return rc;
  return guarded([&] {
    int n = model->spec.vertex_count();
    MonteCarloOptions opts;
    opts.threads = threads;
    VarianceOrderReport report = variance_order_check(model->spec.type(),
                                                      copy_state(z0, n), t, replicas,
                                                      seed, opts);
    for (size_t k = 0; k < report.entries.size(); ++k)
      for (int v = 0; v < n; ++v)
        out[k * n + v] = {report.entries[k].impact, to_c(report.entries[k].mean[v]),
                          to_c(report.entries[k].variance[v])};
    if (ordered) *ordered = report.ordered ? 1 : 0;
  });
}

int csim_contact_coupling(int K, int d, double death_rate, double repro_rate,
                          const long long* z0, double t_end, long long replicas,
                          uint64_t seed, csim_coupling_report* out) {
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    GraphSpec g = GraphSpec::torus(K, d);
    ParticleState init =
        z0 ? ParticleState{copy_state(z0, g.size())} : ParticleState::unit(g.size(), 0);
    CouplingReport report =
        coupling_check_contact(g, death_rate, repro_rate, init, t_end, replicas, seed);
    *out = {report.dominated ? 1 : 0, report.projection_ok ? 1 : 0,
            report.extinct_replicas, report.replicas, report.total_events};
  });
}

int csim_sample_potential(const char* plus_family, double plus_a, double plus_b,
                          const char* minus_family, double minus_a, double minus_b,
                          int n_vertices, uint64_t seed, double* xi_plus,
                          double* xi_minus) {
  if (int rc = require(xi_plus && xi_minus, "null argument")) return rc;
  return guarded([&] {
    PotentialField field =
        sample_potential(parse_family(plus_family, plus_a, plus_b),
                         parse_family(minus_family, minus_a, minus_b), n_vertices, seed);
    std::copy(field.xi_plus.begin(), field.xi_plus.end(), xi_plus);
    std::copy(field.xi_minus.begin(), field.xi_minus.end(), xi_minus);
  });
}

int csim_pam_path_curve(int estimator, const double* xi_plus, const double* xi_minus,
                        int K, int d, int torus, int v0, double t, long long replicas,
                        uint64_t seed, int threads, csim_estimate* out,
                        long long* flagged) {
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    GraphSpec box = make_box(K, d, torus);
    PotentialField field = make_field(xi_plus, xi_minus, box.size());
    PathEstimate estimate;
    switch (estimator) {
      case 0: estimate = fk_curve(field, box, v0, t, replicas, seed, threads); break;
      case 1:
        estimate = lonely_walker_curve(field, box, v0, t, replicas, seed, threads);
        break;
      case 2:
        estimate = variance_bound_curve(field, box, v0, t, replicas, seed, threads);
        break;
      default: throw std::invalid_argument("estimator must be 0, 1 or 2");
    }
    for (size_t v = 0; v < estimate.per_vertex.size(); ++v)
      out[v] = to_c(estimate.per_vertex[v]);
    if (flagged) *flagged = estimate.flagged;
  });
}

int csim_occupancy_curve(double r, double m, int probe_distance, const double* t_grid,
                         size_t n_grid, long long replicas, uint64_t seed, int threads,
                         csim_estimate* mc_out, double* ode_out, double* ode_error) {
  if (int rc = require(t_grid && mc_out && ode_out, "null argument")) return rc;
  return guarded([&] {
    MonteCarloOptions opts;
    opts.threads = threads;
    std::vector<double> grid(t_grid, t_grid + n_grid);
    OccupancyCurves curves =
        occupancy_curve(r, m, probe_distance, grid, replicas, seed, opts);
    for (size_t k = 0; k < n_grid; ++k) {
      mc_out[k] = to_c(curves.monte_carlo[k]);
      ode_out[k] = curves.dual_ode[k];
    }
    if (ode_error) *ode_error = curves.ode_error;
  });
}

}  // extern "C"

// Command-line front end of the coordsim shared library. Every subcommand
// reads a JSON config (plus flag overrides), runs one solver / simulator /
// check through the C API, and writes a CSV or JSON artifact whose data
// rows are a pure function of (config, seed).

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coordsim.h"

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void usage(const std::string& message) { throw UsageError(message); }

// ---- config plumbing ----

struct CommonOpts {
  std::string config_path;
  std::string out = "-";
  std::string format;  // resolved in load(): flag beats config beats "csv"
  std::optional<std::uint64_t> seed;
  std::optional<double> t;
  std::optional<long long> replicas;
  std::optional<int> threads;

  json config;

  void load() {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) usage("cannot open config file '" + config_path + "'");
      try {
        in >> config;
      } catch (const json::parse_error& e) {
        usage("config '" + config_path + "': " + e.what());
      }
      if (!config.is_object()) usage("config root must be a JSON object");
    } else {
      config = json::object();
    }
    if (config.contains("out") && out == "-") out = config["out"].get<std::string>();
    if (format.empty())
      format = config.contains("format") ? config["format"].get<std::string>() : "csv";
    if (format != "csv" && format != "json") usage("format must be csv or json");
  }

  std::uint64_t need_seed() const {
    if (seed) return *seed;
    if (config.contains("seed")) {
      if (!config["seed"].is_number_integer()) usage("config.seed must be an integer");
      return config["seed"].get<std::uint64_t>();
    }
    usage("seed required: pass --seed or set \"seed\" in the config");
  }

  double time_horizon(double fallback = -1.0) const {
    if (t) return *t;
    if (config.contains("t")) return config["t"].get<double>();
    if (fallback >= 0.0) return fallback;
    usage("time horizon required: pass --t or set \"t\" in the config");
  }

  long long replica_count(long long fallback) const {
    if (replicas) return *replicas;
    if (config.contains("replicas")) return config["replicas"].get<long long>();
    return fallback;
  }

  int thread_count() const {
    if (threads) return *threads;
    if (config.contains("threads")) return config["threads"].get<int>();
    return 1;
  }
};

double num_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) usage(std::string("config.") + key + " must be a number");
  return j[key].get<double>();
}

long long int_or(const json& j, const char* key, long long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    usage(std::string("config.") + key + " must be an integer");
  return j[key].get<long long>();
}

std::vector<double> doubles_at(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    usage(std::string("config.") + key + " must be an array of numbers");
  return j[key].get<std::vector<double>>();
}

// ---- C API wrappers ----

void check(int status, const std::string& what) {
  if (status == CSIM_OK) return;
  std::string message = what + ": " + csim_last_error();
  if (status == CSIM_ERR_RUNTIME) throw std::runtime_error(message);
  usage(message);
}

struct ModelHandle {
  csim_model* ptr = nullptr;
  ModelHandle() = default;
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
  ~ModelHandle() { csim_model_free(ptr); }
};

void build_model(const CommonOpts& opts, ModelHandle& model) {
  if (!opts.config.contains("model")) usage("config needs a \"model\" block");
  std::string text = opts.config["model"].dump();
  check(csim_model_from_json(text.c_str(), &model.ptr), "model");
}

int model_size(const ModelHandle& model) {
  int n = 0;
  check(csim_model_vertex_count(model.ptr, &n), "model");
  return n;
}

std::string vertex_label(const ModelHandle& model, int v) {
  char buffer[64];
  check(csim_model_vertex_label(model.ptr, v, buffer, sizeof buffer), "label");
  return buffer;
}

std::vector<long long> initial_state(const CommonOpts& opts, int n) {
  if (opts.config.contains("z0")) {
    auto z0 = opts.config["z0"].get<std::vector<long long>>();
    if (static_cast<int>(z0.size()) != n)
      usage("config.z0 length must equal the vertex count");
    return z0;
  }
  std::vector<long long> z0(n, 0);
  z0[0] = 1;
  return z0;
}

std::vector<double> frequencies_at(const CommonOpts& opts, int n, const char* key) {
  if (!opts.config.contains(key)) usage(std::string("config.") + key + " required");
  auto x = opts.config[key].get<std::vector<double>>();
  if (static_cast<int>(x.size()) != n)
    usage(std::string("config.") + key + " length must equal the vertex count");
  return x;
}

// ---- artifact writing ----

std::string fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

std::string fmt(long long v) { return std::to_string(v); }

struct Artifact {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  json extra;

  void row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
};

std::string timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%FT%TZ", std::gmtime(&now));
  return buffer;
}

void write_to(std::ostream& os, const CommonOpts& opts, const std::string& subcommand,
              const Artifact& artifact) {
  if (opts.format == "json") {
    json doc;
    doc["tool"] = "coordsim";
    doc["version"] = csim_version();
    doc["subcommand"] = subcommand;
    doc["config"] = opts.config;
    for (auto& [k, v] : artifact.extra.items()) doc[k] = v;
    doc["generated_at"] = timestamp();
    doc["columns"] = artifact.columns;
    doc["rows"] = artifact.rows;
    os << doc.dump(2) << "\n";
    return;
  }
  os << "# tool: coordsim " << csim_version() << "\n";
  os << "# subcommand: " << subcommand << "\n";
  os << "# config: " << opts.config.dump() << "\n";
  for (auto& [k, v] : artifact.extra.items())
    os << "# " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  os << "# generated_at: " << timestamp() << "\n";
  for (size_t c = 0; c < artifact.columns.size(); ++c)
    os << (c ? "," : "") << artifact.columns[c];
  os << "\n";
  for (const auto& row : artifact.rows) {
    for (size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << "\n";
  }
}

void write_artifact(const CommonOpts& opts, const std::string& subcommand,
                    const Artifact& artifact, const std::string& path_override = "") {
  std::string path = path_override.empty() ? opts.out : path_override;
  if (path == "-") {
    write_to(std::cout, opts, subcommand, artifact);
    return;
  }
  std::ofstream out(path);
  if (!out) usage("cannot write to '" + path + "'");
  write_to(out, opts, subcommand, artifact);
}

// ---- subcommands ----

int cmd_validate(const CommonOpts& opts) {
  ModelHandle model;
  build_model(opts, model);
  char* type_json = nullptr;
  check(csim_model_type_json(model.ptr, &type_json), "type");
  Artifact artifact;
  artifact.columns = {"vertex", "label"};
  int n = model_size(model);
  for (int v = 0; v < n; ++v)
    artifact.row({fmt(static_cast<long long>(v)), vertex_label(model, v)});
  artifact.extra["valid"] = true;
  artifact.extra["type"] = json::parse(type_json);
  csim_string_free(type_json);
  write_artifact(opts, "validate", artifact);
  return 0;
}

int cmd_simulate(const CommonOpts& opts) {
  ModelHandle model;
  build_model(opts, model);
  int n = model_size(model);
  std::vector<long long> z0 = initial_state(opts, n);
  double t_end = opts.time_horizon();
  std::vector<double> snaps;
  if (opts.config.contains("snapshot_times")) snaps = doubles_at(opts.config, "snapshot_times");
  auto event_cap = static_cast<std::uint64_t>(int_or(opts.config, "event_cap", 0));
  long long pop_cap = int_or(opts.config, "population_cap", 0);

  csim_trajectory* raw = nullptr;
  check(csim_simulate(model.ptr, z0.data(), t_end, opts.need_seed(), event_cap, pop_cap,
                      snaps.empty() ? nullptr : snaps.data(), snaps.size(), &raw),
        "simulate");
  std::unique_ptr<csim_trajectory, decltype(&csim_trajectory_free)> traj(
      raw, &csim_trajectory_free);

  Artifact events;
  events.columns = {"time", "kind", "source", "target", "y", "i"};
  size_t n_events = csim_trajectory_event_count(traj.get());
  for (size_t k = 0; k < n_events; ++k) {
    csim_event ev;
    check(csim_trajectory_event(traj.get(), k, &ev), "event");
    events.row({fmt(ev.time), csim_event_kind_name(ev.kind),
                fmt(static_cast<long long>(ev.source)),
                fmt(static_cast<long long>(ev.target)), fmt(ev.impact),
                fmt(ev.participants)});
  }
  std::vector<long long> final_state(n);
  check(csim_trajectory_final_state(traj.get(), final_state.data()), "final state");
  events.extra["final_state"] = final_state;
  events.extra["cap_exceeded"] = csim_trajectory_cap_exceeded(traj.get()) != 0;
  write_artifact(opts, "simulate", events);

  if (!snaps.empty()) {
    Artifact table;
    table.columns = {"time"};
    for (int v = 0; v < n; ++v) table.columns.push_back("z" + vertex_label(model, v));
    std::vector<long long> state(n);
    for (size_t k = 0; k < snaps.size(); ++k) {
      check(csim_trajectory_snapshot(traj.get(), k, state.data()), "snapshot");
      std::vector<std::string> row{fmt(snaps[k])};
      for (long long c : state) row.push_back(fmt(c));
      table.row(std::move(row));
    }
    write_artifact(opts, "simulate", table,
                   opts.out == "-" ? "-" : opts.out + ".snapshots.csv");
  }
  return 0;
}

int cmd_simulate_dual(const CommonOpts& opts) {
  ModelHandle model;
  build_model(opts, model);
  int n = model_size(model);
  std::vector<double> x0 = frequencies_at(opts, n, "x0");
  double t_end = opts.time_horizon();
  std::vector<double> samples;
  if (opts.config.contains("sample_times")) samples = doubles_at(opts.config, "sample_times");
  if (samples.empty())
    for (int k = 1; k <= 20; ++k) samples.push_back(t_end * k / 20.0);
  double dt = num_or(opts.config, "dt", 1e-3);

  std::vector<double> values(samples.size() * n);
  double clamp = 0.0;
  long long jumps = 0;
  check(csim_simulate_dual(model.ptr, x0.data(), t_end, dt, opts.need_seed(),
                           samples.data(), samples.size(), values.data(), &clamp, &jumps),
        "simulate-dual");

  Artifact table;
  table.columns = {"time"};
  for (int v = 0; v < n; ++v) table.columns.push_back("x" + vertex_label(model, v));
  for (size_t k = 0; k < samples.size(); ++k) {
    std::vector<std::string> row{fmt(samples[k])};
    for (int v = 0; v < n; ++v) row.push_back(fmt(values[k * n + v]));
    table.row(std::move(row));
  }
  table.extra["clamp_total"] = clamp;
  table.extra["jump_count"] = jumps;
  write_artifact(opts, "simulate-dual", table);
  return 0;
}

int solver_command(const CommonOpts& opts, const char* name, bool kingman) {
  ModelHandle model;
  build_model(opts, model);
  int n = model_size(model);
  std::vector<long long> z0 = initial_state(opts, n);
  double t = opts.time_horizon();
  std::vector<double> values(n);
  double err = 0.0;
  int status = kingman
                   ? csim_kingman_bound(model.ptr, z0.data(), t, values.data(), &err)
                   : csim_expectation_ode(model.ptr, z0.data(), t, values.data(), &err);
  check(status, name);
  Artifact table;
  table.columns = {"vertex", "label", "value"};
  for (int v = 0; v < n; ++v)
    table.row({fmt(static_cast<long long>(v)), vertex_label(model, v), fmt(values[v])});
  table.extra["error_estimate"] = err;
  table.extra["t"] = t;
  write_artifact(opts, name, table);
  return 0;
}

int cmd_duality(const CommonOpts& opts) {
  ModelHandle model;
  build_model(opts, model);
  int n = model_size(model);
  std::vector<double> x = frequencies_at(opts, n, "x");
  if (!opts.config.contains("z")) usage("config.z required");
  auto z = opts.config["z"].get<std::vector<long long>>();
  if (static_cast<int>(z.size()) != n) usage("config.z length must equal the vertex count");
  double t = opts.time_horizon();
  long long replicas = opts.replica_count(100000);
  double threshold = num_or(opts.config, "threshold", 4.0);
  double dt = num_or(opts.config, "dt", 1e-3);

  csim_duality_report report;
  check(csim_duality_check(model.ptr, x.data(), z.data(), t, replicas, opts.need_seed(),
                           threshold, dt, opts.thread_count(), &report),
        "duality-check");

  Artifact table;
  table.columns = {"check",   "forward_mean", "forward_se", "dual_mean",
                   "dual_se", "z_score",      "verdict"};
  table.row({"moment_duality", fmt(report.forward_side.mean), fmt(report.forward_side.se),
             fmt(report.dual_side.mean), fmt(report.dual_side.se), fmt(report.z_score),
             report.pass ? "pass" : "fail"});
  if (opts.config.contains("oracle_cap")) {
    double value = 0.0, leak = 0.0;
    long long states = 0;
    check(csim_oracle_moment(model.ptr, z.data(), x.data(), t,
                             int_or(opts.config, "oracle_cap", 200), &value, &leak,
                             &states),
          "oracle");
    table.extra["oracle_value"] = value;
    table.extra["oracle_leak"] = leak;
  }
  write_artifact(opts, "duality-check", table);
  if (!report.pass)
    throw CheckFailed("duality z-score " + fmt(report.z_score) + " above threshold " +
                      fmt(threshold));
  return 0;
}

int cmd_oracle(const CommonOpts& opts) {
  ModelHandle model;
  build_model(opts, model);
  int n = model_size(model);
  std::vector<long long> z0 = initial_state(opts, n);
  std::vector<double> x = frequencies_at(opts, n, "x");
  double t = opts.time_horizon();
  double value = 0.0, leak = 0.0;
  long long states = 0;
  check(csim_oracle_moment(model.ptr, z0.data(), x.data(), t,
                           int_or(opts.config, "oracle_cap", 200), &value, &leak, &states),
        "oracle");
  Artifact table;
  table.columns = {"value", "leak", "states"};
  table.row({fmt(value), fmt(leak), fmt(states)});
  write_artifact(opts, "oracle", table);
  return 0;
}

int cmd_cdi(const CommonOpts& opts) {
  ModelHandle model;
  build_model(opts, model);
  if (!opts.config.contains("n_list")) usage("config.n_list required");
  auto n_list = opts.config["n_list"].get<std::vector<long long>>();
  long long m = int_or(opts.config, "m", 1);
  double t = opts.time_horizon();
  long long replicas = opts.replica_count(10000);

  std::vector<csim_estimate> curve(n_list.size());
  check(csim_cdi_probe(model.ptr, n_list.data(), n_list.size(), m, t, replicas,
                       opts.need_seed(), opts.thread_count(), curve.data()),
        "cdi-probe");

  Artifact table;
  table.columns = {"series", "key", "value", "se"};
  for (size_t k = 0; k < n_list.size(); ++k)
    table.row({"forward", fmt(n_list[k]), fmt(curve[k].mean), fmt(curve[k].se)});
  if (opts.config.contains("x_grid")) {
    std::vector<double> grid = doubles_at(opts.config, "x_grid");
    std::vector<csim_estimate> dual(grid.size());
    check(csim_tau_hit_curve(model.ptr, grid.data(), grid.size(), t, replicas,
                             num_or(opts.config, "dt", 1e-3), opts.need_seed() + 1,
                             opts.thread_count(), dual.data()),
          "tau-hit");
    for (size_t k = 0; k < grid.size(); ++k)
      table.row({"dual", fmt(grid[k]), fmt(dual[k].mean), fmt(dual[k].se)});
  }
  table.extra["m"] = m;
  write_artifact(opts, "cdi-probe", table);
  return 0;
}

int cmd_fixation(const CommonOpts& opts) {
  double alpha = num_or(opts.config, "alpha", 0.3);
  double p = num_or(opts.config, "p", 0.5);
  double eps = num_or(opts.config, "eps", 1e-3);
  double n0 = num_or(opts.config, "n0", 0.5);
  double t = opts.time_horizon(50.0);
  long long replicas = opts.replica_count(10000);
  csim_estimate est;
  check(csim_fixation_probe(alpha, p, t, eps, replicas, opts.need_seed(), n0,
                            opts.thread_count(), &est),
        "fixation");
  Artifact table;
  table.columns = {"alpha", "p", "t", "eps", "estimate", "se", "n"};
  table.row({fmt(alpha), fmt(p), fmt(t), fmt(eps), fmt(est.mean), fmt(est.se),
             fmt(est.n)});
  table.extra["drift_below_jump_rate"] = alpha < -std::log1p(-p);
  write_artifact(opts, "fixation", table);
  return 0;
}

int cmd_variance_order(const CommonOpts& opts) {
  ModelHandle model;
  build_model(opts, model);
  int n = model_size(model);
  std::vector<long long> z0 = initial_state(opts, n);
  double t = opts.time_horizon();
  long long replicas = opts.replica_count(100000);
  std::vector<csim_variance_point> points(3 * static_cast<size_t>(n));
  int ordered = 0;
  check(csim_variance_order(model.ptr, z0.data(), t, replicas, opts.need_seed(),
                            opts.thread_count(), points.data(), &ordered),
        "variance-order");
  Artifact table;
  table.columns = {"impact", "vertex", "mean", "mean_se", "variance", "variance_se"};
  for (int k = 0; k < 3; ++k)
    for (int v = 0; v < n; ++v) {
      const csim_variance_point& pt = points[k * n + v];
      table.row({fmt(pt.impact), fmt(static_cast<long long>(v)), fmt(pt.mean.mean),
                 fmt(pt.mean.se), fmt(pt.variance.mean), fmt(pt.variance.se)});
    }
  table.extra["ordered"] = ordered != 0;
  write_artifact(opts, "variance-order", table);
  if (!ordered) throw CheckFailed("variance ordering violated");
  return 0;
}

struct PotentialConfig {
  int K = 5, d = 1, torus = 0, v0 = 0;
  std::vector<double> xi_plus, xi_minus;
};

PotentialConfig load_potential(const CommonOpts& opts) {
  PotentialConfig out;
  out.K = static_cast<int>(int_or(opts.config, "K", 5));
  out.d = static_cast<int>(int_or(opts.config, "d", 1));
  out.torus = opts.config.value("torus", false) ? 1 : 0;
  out.v0 = static_cast<int>(int_or(opts.config, "v0", 0));
  long long n = 1;
  for (int i = 0; i < out.d; ++i) n *= out.K;
  if (opts.config.contains("xi_plus")) {
    out.xi_plus = doubles_at(opts.config, "xi_plus");
    out.xi_minus = opts.config.contains("xi_minus")
                       ? doubles_at(opts.config, "xi_minus")
                       : std::vector<double>(n, 0.0);
  } else if (opts.config.contains("potential")) {
    const json& p = opts.config["potential"];
    auto family = [&](const char* key, std::string& name, double& a, double& b) {
      name = "zero";
      if (!p.contains(key)) return;
      name = p[key].value("family", "zero");
      a = p[key].value("a", 0.0);
      b = p[key].value("b", 1.0);
    };
    std::string plus_name, minus_name;
    double pa = 0.0, pb = 1.0, ma = 0.0, mb = 1.0;
    family("plus", plus_name, pa, pb);
    family("minus", minus_name, ma, mb);
    out.xi_plus.resize(n);
    out.xi_minus.resize(n);
    std::uint64_t seed = p.value("seed", 0ULL);
    check(csim_sample_potential(plus_name.c_str(), pa, pb, minus_name.c_str(), ma, mb,
                                static_cast<int>(n), seed, out.xi_plus.data(),
                                out.xi_minus.data()),
          "potential");
  } else {
    usage("config needs either xi_plus/xi_minus arrays or a potential block");
  }
  if (static_cast<long long>(out.xi_plus.size()) != n ||
      static_cast<long long>(out.xi_minus.size()) != n)
    usage("potential length must equal K^d");
  return out;
}

int cmd_pam_fk(const CommonOpts& opts) {
  PotentialConfig pot = load_potential(opts);
  int n = static_cast<int>(pot.xi_plus.size());
  double t = opts.time_horizon();
  long long replicas = opts.replica_count(200000);
  std::uint64_t seed = opts.need_seed();

  Artifact table;
  table.columns = {"series", "vertex", "value", "se"};
  std::vector<double> ode(n);
  double ode_err = 0.0;
  check(csim_pam_ode(pot.xi_plus.data(), pot.xi_minus.data(), pot.K, pot.d, pot.torus,
                     pot.v0, t, ode.data(), &ode_err),
        "pam-ode");
  for (int v = 0; v < n; ++v)
    table.row({"ode", fmt(static_cast<long long>(v)), fmt(ode[v]), fmt(0.0)});

  const char* names[] = {"path_integral", "lonely_walker"};
  for (int estimator = 0; estimator < 2; ++estimator) {
    std::vector<csim_estimate> curve(n);
    long long flagged = 0;
    check(csim_pam_path_curve(estimator, pot.xi_plus.data(), pot.xi_minus.data(), pot.K,
                              pot.d, pot.torus, pot.v0, t, replicas, seed + estimator,
                              opts.thread_count(), curve.data(), &flagged),
          "pam-fk");
    for (int v = 0; v < n; ++v)
      table.row({names[estimator], fmt(static_cast<long long>(v)), fmt(curve[v].mean),
                 fmt(curve[v].se)});
    table.extra[std::string(names[estimator]) + "_flagged"] = flagged;
  }

  // forward branching run of the same lattice model
  json preset;
  preset["preset"]["name"] = "pam_branching";
  preset["preset"]["params"] = {{"K", pot.K},
                                {"d", pot.d},
                                {"torus", pot.torus != 0},
                                {"xi_plus", pot.xi_plus},
                                {"xi_minus", pot.xi_minus}};
  ModelHandle model;
  std::string text = preset.dump();
  check(csim_model_from_json(text.c_str(), &model.ptr), "pam model");
  std::vector<long long> z0(n, 0);
  z0[pot.v0] = 1;
  std::vector<csim_estimate> forward(n);
  long long capped = 0;
  check(csim_mc_vertex_means(model.ptr, z0.data(), t, replicas, seed + 2,
                             opts.thread_count(), forward.data(), &capped),
        "pam forward");
  for (int v = 0; v < n; ++v)
    table.row({"forward", fmt(static_cast<long long>(v)), fmt(forward[v].mean),
               fmt(forward[v].se)});
  table.extra["ode_error"] = ode_err;
  write_artifact(opts, "pam-fk", table);
  return 0;
}

int cmd_pam_occupancy(const CommonOpts& opts) {
  double r = num_or(opts.config, "r", 1.0);
  double m = num_or(opts.config, "m", 1.0);
  int probe = static_cast<int>(int_or(opts.config, "probe", 4));
  std::vector<double> grid;
  if (opts.config.contains("t_grid")) {
    grid = doubles_at(opts.config, "t_grid");
  } else {
    double t_max = opts.time_horizon(8.0);
    for (int k = 0; k <= 16; ++k) grid.push_back(t_max * k / 16.0);
  }
  long long replicas = opts.replica_count(20000);

  std::vector<csim_estimate> mc(grid.size());
  std::vector<double> ode(grid.size());
  double ode_err = 0.0;
  check(csim_occupancy_curve(r, m, probe, grid.data(), grid.size(), replicas,
                             opts.need_seed(), opts.thread_count(), mc.data(),
                             ode.data(), &ode_err),
        "pam-occupancy");
  Artifact table;
  table.columns = {"series", "t", "value", "se"};
  for (size_t k = 0; k < grid.size(); ++k)
    table.row({"monte_carlo", fmt(grid[k]), fmt(mc[k].mean), fmt(mc[k].se)});
  for (size_t k = 0; k < grid.size(); ++k)
    table.row({"dual_ode", fmt(grid[k]), fmt(ode[k]), fmt(0.0)});
  table.extra["ode_error"] = ode_err;
  write_artifact(opts, "pam-occupancy", table);
  return 0;
}

int cmd_contact_coupling(const CommonOpts& opts) {
  int K = static_cast<int>(int_or(opts.config, "K", 6));
  int d = static_cast<int>(int_or(opts.config, "d", 2));
  double death = num_or(opts.config, "D", 1.0);
  double repro = num_or(opts.config, "R", 0.15);
  double t = opts.time_horizon(50.0);
  long long replicas = opts.replica_count(1000);
  csim_coupling_report report;
  check(csim_contact_coupling(K, d, death, repro, nullptr, t, replicas, opts.need_seed(),
                              &report),
        "contact-coupling");
  Artifact table;
  table.columns = {"dominated", "projection_ok", "extinct_replicas", "replicas",
                   "events"};
  table.row({report.dominated ? "true" : "false",
             report.projection_ok ? "true" : "false", fmt(report.extinct_replicas),
             fmt(report.replicas), fmt(report.total_events)});
  write_artifact(opts, "contact-coupling", table);
  if (!report.dominated || !report.projection_ok)
    throw CheckFailed("contact coupling violated");
  return 0;
}

int cmd_tree_brw(const CommonOpts& opts) {
  int d = static_cast<int>(int_or(opts.config, "d", 2));
  int depth = static_cast<int>(int_or(opts.config, "depth", 3));
  double r = num_or(opts.config, "r", 1.0);
  double mu = num_or(opts.config, "mu", 1.0);
  double t = opts.time_horizon(1.0);
  long long replicas = opts.replica_count(100000);

  std::vector<csim_estimate> mc(depth + 1);
  check(csim_tree_brw_mc(d, depth, r, mu, t, replicas, opts.need_seed(),
                         opts.thread_count(), mc.data()),
        "tree-brw");
  Artifact table;
  table.columns = {"generation", "closed_form", "mc_mean", "mc_se"};
  for (int k = 0; k <= depth; ++k) {
    double closed = 0.0;
    check(csim_tree_brw_expectation(d, r, mu, t, k, &closed), "tree-brw");
    table.row({fmt(static_cast<long long>(k)), fmt(closed), fmt(mc[k].mean),
               fmt(mc[k].se)});
  }
  write_artifact(opts, "tree-brw", table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordsim: branching-coalescing particle systems with coordinated "
               "events, their dual jump-diffusions, and the moment identities "
               "connecting them"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::function<int(const CommonOpts&)> runner;

  auto add = [&](const char* name, const char* help,
                 std::function<int(const CommonOpts&)> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "JSON config file");
    sub->add_option("--seed", opts.seed, "RNG seed (required here or in the config)");
    sub->add_option("--t", opts.t, "time horizon");
    sub->add_option("--replicas", opts.replicas, "Monte Carlo replica count");
    sub->add_option("--threads", opts.threads, "worker threads for replica runs");
    sub->add_option("--out", opts.out, "output path ('-' for stdout)");
    sub->add_option("--format", opts.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&runner, fn]() { runner = fn; });
  };

  add("validate", "parse and validate a model config; echo its total-mass type",
      cmd_validate);
  add("simulate",
      "exact event-by-event run of the particle system Z_t; exports the event log and "
      "optional state snapshots",
      cmd_simulate);
  add("simulate-dual",
      "jump-diffusion run of the dual frequency process X_t (drift, Wright-Fisher "
      "noise, coordinated jumps)",
      cmd_simulate_dual);
  add("expectation",
      "E[Z_t] from the linear moment system, which depends only on the measures' "
      "total masses",
      [](const CommonOpts& o) { return solver_command(o, "expectation", false); });
  add("kingman-bound",
      "upper bound on E[Z_t] under pair coalescence via the quadratic correction "
      "-(f^2 - f) c/2",
      [](const CommonOpts& o) { return solver_command(o, "kingman-bound", true); });
  add("duality-check",
      "two-sided Monte Carlo test of the moment identity E_x[prod X_t^z] = "
      "E_z[prod x^Z_t]",
      cmd_duality);
  add("oracle",
      "exact truncated-state-space value of E_z[prod x^Z_t] with a reported "
      "truncation leak",
      cmd_oracle);
  add("cdi-probe",
      "coming-down-from-infinity probe: P(|Z_t| < m) against the starting size, "
      "optionally with the dual all-ones hitting curve",
      cmd_cdi);
  add("fixation",
      "fixation probability of the advantageous type in the island-continent "
      "comparison dual",
      cmd_fixation);
  add("variance-order",
      "variance comparison of the independent, half- and fully coordinated "
      "representatives of the model's type",
      cmd_variance_order);
  add("pam-fk",
      "lattice heat equation with potential: path-integral, doubling-walker and "
      "forward branching estimators against the semigroup solution",
      cmd_pam_fk);
  add("pam-occupancy",
      "no-particle probability at a probe site of a branching random walk against "
      "its dual mean-field curve",
      cmd_pam_occupancy);
  add("contact-coupling",
      "pathwise domination of the contact process by the branching random walk "
      "under a shared event stream",
      cmd_contact_coupling);
  add("tree-brw",
      "per-generation means of the tree branching random walk against the closed "
      "form exp(t(r-mu)) (t mu / d)^k / k!",
      cmd_tree_brw);

  CLI11_PARSE(app, argc, argv);

  try {
    opts.load();
    if (!runner) usage("no subcommand selected");
    return runner(opts);
  } catch (const CheckFailed& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

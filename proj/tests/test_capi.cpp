#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "coordsim.h"

TEST_CASE("version and status strings") {
  CHECK(std::string(csim_version()) == "0.1.0");
  CHECK(std::string(csim_status_name(CSIM_OK)) == "ok");
  CHECK(std::string(csim_status_name(CSIM_ERR_PARSE)) == "parse error");
}

TEST_CASE("models from presets and explicit schemas") {
  csim_model* model = nullptr;
  REQUIRE(csim_model_preset("yule", R"({"r": 1.0})", &model) == CSIM_OK);
  int n = 0;
  CHECK(csim_model_vertex_count(model, &n) == CSIM_OK);
  CHECK(n == 1);
  csim_model_free(model);

  const char* explicit_json = R"({
    "graph": {"kind": "complete", "n": 2},
    "measures": {
      "migration": [{"from": 0, "to": 1, "atoms": [{"y": 0.5, "mass": 1.0}]}],
      "death": [{"from": 1, "atoms": [{"y": 0, "mass": 0.25}]}]
    }
  })";
  REQUIRE(csim_model_from_json(explicit_json, &model) == CSIM_OK);
  char label[16];
  CHECK(csim_model_vertex_label(model, 1, label, sizeof label) == CSIM_OK);
  CHECK(std::string(label) == "1");
  char* type_json = nullptr;
  REQUIRE(csim_model_type_json(model, &type_json) == CSIM_OK);
  CHECK(std::string(type_json).find("\"migration\"") != std::string::npos);
  csim_string_free(type_json);
  csim_model_free(model);
}

TEST_CASE("error paths carry codes and messages") {
  csim_model* model = nullptr;
  CHECK(csim_model_from_json("{not json", &model) == CSIM_ERR_PARSE);
  CHECK(std::strlen(csim_last_error()) > 0);

  CHECK(csim_model_preset("no_such_preset", "{}", &model) == CSIM_ERR_UNKNOWN_NAME);

  const char* negative_mass = R"({
    "graph": {"kind": "complete", "n": 1},
    "measures": {"death": [{"from": 0, "atoms": [{"y": 0.5, "mass": -1}]}]}
  })";
  CHECK(csim_model_from_json(negative_mass, &model) == CSIM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(csim_last_error()).find("mass") != std::string::npos);

  const char* self_migration = R"({
    "graph": {"kind": "complete", "n": 1},
    "measures": {"migration": [{"from": 0, "to": 0, "atoms": [{"y": 0, "mass": 1}]}]}
  })";
  CHECK(csim_model_from_json(self_migration, &model) == CSIM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(csim_last_error()).find("self-migration") != std::string::npos);

  CHECK(csim_model_from_json(nullptr, &model) == CSIM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("simulation round trip through the handle API") {
  csim_model* model = nullptr;
  REQUIRE(csim_model_preset("yule", R"({"r": 1.0})", &model) == CSIM_OK);
  long long z0[]{1};
  double snaps[]{0.5, 1.0};
  csim_trajectory* traj = nullptr;
  REQUIRE(csim_simulate(model, z0, 1.0, 42, 0, 0, snaps, 2, &traj) == CSIM_OK);
  CHECK(csim_trajectory_cap_exceeded(traj) == 0);
  long long final_state[1];
  REQUIRE(csim_trajectory_final_state(traj, final_state) == CSIM_OK);
  CHECK(final_state[0] >= 1);
  size_t n_events = csim_trajectory_event_count(traj);
  for (size_t k = 0; k < n_events; ++k) {
    csim_event ev;
    REQUIRE(csim_trajectory_event(traj, k, &ev) == CSIM_OK);
    CHECK(ev.kind == 2);  // reproduction
    CHECK(std::string(csim_event_kind_name(ev.kind)) == "reproduction");
  }
  long long snap[1];
  REQUIRE(csim_trajectory_snapshot(traj, 1, snap) == CSIM_OK);
  CHECK(snap[0] == final_state[0]);

  // same seed, same trajectory
  csim_trajectory* again = nullptr;
  REQUIRE(csim_simulate(model, z0, 1.0, 42, 0, 0, snaps, 2, &again) == CSIM_OK);
  CHECK(csim_trajectory_event_count(again) == n_events);
  long long final_again[1];
  csim_trajectory_final_state(again, final_again);
  CHECK(final_again[0] == final_state[0]);

  csim_trajectory_free(traj);
  csim_trajectory_free(again);
  csim_model_free(model);
}

TEST_CASE("monte carlo means and the deterministic solvers agree") {
  csim_model* model = nullptr;
  REQUIRE(csim_model_preset("yule", R"({"r": 1.0})", &model) == CSIM_OK);
  long long z0[]{1};
  csim_estimate mean[1];
  long long capped = -1;
  REQUIRE(csim_mc_vertex_means(model, z0, 1.0, 20000, 7, 1, mean, &capped) == CSIM_OK);
  CHECK(capped == 0);
  double ode[1], err = 0.0;
  REQUIRE(csim_expectation_ode(model, z0, 1.0, ode, &err) == CSIM_OK);
  CHECK(ode[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
  CHECK(std::abs(mean[0].mean - ode[0]) < 4.0 * mean[0].se);
  csim_model_free(model);
}

TEST_CASE("kingman bound through the C surface") {
  const char* json = R"({
    "graph": {"kind": "complete", "n": 1},
    "measures": {"coalescence": [{"from": 0, "atoms": [{"y": 0, "mass": 1}]}]}
  })";
  csim_model* model = nullptr;
  REQUIRE(csim_model_from_json(json, &model) == CSIM_OK);
  long long z0[]{5};
  double bound[1], err = 0.0;
  REQUIRE(csim_kingman_bound(model, z0, 1.0, bound, &err) == CSIM_OK);
  CHECK(bound[0] == doctest::Approx(5.0 / (5.0 - 4.0 * std::exp(-0.5))).epsilon(1e-7));
  // the mean solver refuses this model and says where to go
  double out[1];
  CHECK(csim_expectation_ode(model, z0, 1.0, out, nullptr) == CSIM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(csim_last_error()).find("kingman_bound") != std::string::npos);
  csim_model_free(model);
}

TEST_CASE("oracle and duality through the C surface") {
  csim_model* model = nullptr;
  REQUIRE(csim_model_preset("binomial_disasters", R"({"p": 0.4, "r": 1.0})", &model) ==
          CSIM_OK);
  long long z[]{2};
  double x[]{0.6};
  double value = 0.0, leak = -1.0;
  long long states = 0;
  REQUIRE(csim_oracle_moment(model, z, x, 0.5, 300, &value, &leak, &states) == CSIM_OK);
  CHECK(value > 0.0);
  CHECK(value < 1.0);
  CHECK(leak < 1e-9);
  CHECK(states > 10);

  csim_duality_report report;
  REQUIRE(csim_duality_check(model, x, z, 0.5, 8000, 11, 4.0, 1e-3, 1, &report) ==
          CSIM_OK);
  CHECK(report.pass == 1);
  CHECK(std::abs(report.forward_side.mean - value) < 4.0 * report.forward_side.se + leak);
  csim_model_free(model);
}

TEST_CASE("probes through the C surface") {
  csim_estimate fix;
  REQUIRE(csim_fixation_probe(0.3, 0.5, 30.0, 1e-3, 2000, 3, 0.5, 1, &fix) == CSIM_OK);
  CHECK(fix.mean > 0.9);

  csim_model* model = nullptr;
  REQUIRE(csim_model_preset("yule", R"({"r": 1.0})", &model) == CSIM_OK);
  long long z0[]{1};
  csim_variance_point points[3];
  int ordered = 0;
  REQUIRE(csim_variance_order(model, z0, 1.0, 20000, 5, 1, points, &ordered) == CSIM_OK);
  CHECK(ordered == 1);
  CHECK(points[0].impact == 0.0);
  CHECK(points[2].impact == 1.0);
  CHECK(points[0].variance.mean < points[2].variance.mean);
  csim_model_free(model);

  const char* death_json = R"({
    "graph": {"kind": "complete", "n": 1},
    "measures": {"death": [{"from": 0, "atoms": [{"y": 1, "mass": 1}]}]}
  })";
  REQUIRE(csim_model_from_json(death_json, &model) == CSIM_OK);
  long long ns[]{10, 100};
  csim_estimate curve[2];
  REQUIRE(csim_cdi_probe(model, ns, 2, 1, 1.0, 4000, 7, 1, curve) == CSIM_OK);
  double expected = 1.0 - std::exp(-1.0);
  CHECK(std::abs(curve[0].mean - expected) < 4.0 * curve[0].se);
  CHECK(std::abs(curve[1].mean - expected) < 4.0 * curve[1].se);
  csim_model_free(model);

  csim_coupling_report coupling;
  REQUIRE(csim_contact_coupling(3, 2, 1.0, 0.1, nullptr, 10.0, 50, 9, &coupling) ==
          CSIM_OK);
  CHECK(coupling.dominated == 1);
  CHECK(coupling.projection_ok == 1);
}

TEST_CASE("potential, path estimators and occupancy through the C surface") {
  double xi_plus[5], xi_minus[5];
  REQUIRE(csim_sample_potential("uniform", 0.0, 1.0, "zero", 0.0, 0.0, 5, 13, xi_plus,
                                xi_minus) == CSIM_OK);
  for (int v = 0; v < 5; ++v) {
    CHECK(xi_plus[v] >= 0.0);
    CHECK(xi_plus[v] <= 1.0);
    CHECK(xi_minus[v] == 0.0);
  }
  CHECK(csim_sample_potential("cauchy", 0, 0, "zero", 0, 0, 5, 13, xi_plus, xi_minus) ==
        CSIM_ERR_UNKNOWN_NAME);

  double ode[5], err = 0.0;
  REQUIRE(csim_pam_ode(xi_plus, xi_minus, 5, 1, 0, 0, 1.0, ode, &err) == CSIM_OK);
  csim_estimate fk[5];
  long long flagged = -1;
  REQUIRE(csim_pam_path_curve(0, xi_plus, xi_minus, 5, 1, 0, 0, 1.0, 20000, 17, 1, fk,
                              &flagged) == CSIM_OK);
  CHECK(flagged == 0);
  for (int v = 0; v < 5; ++v) CHECK(std::abs(fk[v].mean - ode[v]) < 4.0 * fk[v].se + 1e-4);

  int satisfied = -1;
  char* diagnostic = nullptr;
  REQUIRE(csim_moment_condition("pareto", 0.5, 1, &satisfied, &diagnostic) == CSIM_OK);
  CHECK(satisfied == 0);
  CHECK(diagnostic != nullptr);
  csim_string_free(diagnostic);

  double grid[]{0.0, 0.5, 1.0};
  csim_estimate mc[3];
  double dual[3], ode_err = 0.0;
  REQUIRE(csim_occupancy_curve(1.0, 1.0, 2, grid, 3, 4000, 19, 1, mc, dual, &ode_err) ==
          CSIM_OK);
  CHECK(mc[0].mean == 1.0);
  CHECK(dual[0] == doctest::Approx(1.0));
}

TEST_CASE("tree closed form and its sampler") {
  double value = 0.0;
  REQUIRE(csim_tree_brw_expectation(2, 1.0, 1.0, 1.0, 1, &value) == CSIM_OK);
  CHECK(value == doctest::Approx(0.5));
  csim_estimate gens[3];
  REQUIRE(csim_tree_brw_mc(2, 2, 1.0, 1.0, 1.0, 20000, 21, 1, gens) == CSIM_OK);
  for (int k = 0; k <= 2; ++k) {
    double closed = 0.0;
    csim_tree_brw_expectation(2, 1.0, 1.0, 1.0, k, &closed);
    CHECK(std::abs(gens[k].mean - closed) < 4.0 * gens[k].se);
  }
}

TEST_CASE("windowed runs of infinite families") {
  double tau = -1.0;
  long long total = -1;
  const char* measures = R"({"repro_self": [{"y": 0, "mass": 1.0}]})";
  REQUIRE(csim_truncated_run(0, 1, measures, 0, 1.0, 23, &tau, &total) == CSIM_OK);
  CHECK(tau == 0.0);
  REQUIRE(csim_truncated_run(1, 2, measures, 3, 1.0, 23, &tau, &total) == CSIM_OK);
  CHECK(tau == std::numeric_limits<double>::infinity());
  CHECK(total >= 1);
}

TEST_CASE("dual simulation through the C surface") {
  csim_model* model = nullptr;
  const char* json = R"({
    "graph": {"kind": "complete", "n": 1},
    "measures": {"death": [{"from": 0, "atoms": [{"y": 0, "mass": 1}]}]}
  })";
  REQUIRE(csim_model_from_json(json, &model) == CSIM_OK);
  double x0[]{0.2};
  double samples[]{0.5, 1.0};
  double values[2];
  double clamp = -1.0;
  long long jumps = -1;
  REQUIRE(csim_simulate_dual(model, x0, 1.0, 1e-4, 31, samples, 2, values, &clamp,
                             &jumps) == CSIM_OK);
  CHECK(values[1] == doctest::Approx(1.0 - 0.8 * std::exp(-1.0)).epsilon(1e-3));
  CHECK(jumps == 0);

  csim_estimate moment;
  long long z[]{2};
  REQUIRE(csim_dual_moment(model, x0, z, 0.0, 100, 1e-3, 33, 1, &moment) == CSIM_OK);
  CHECK(moment.mean == doctest::Approx(0.04));
  csim_model_free(model);
}

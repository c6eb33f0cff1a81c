/*
 * coordsim - simulation of branching-coalescing particle systems with
 * coordinated transitions, their dual jump-diffusions, and the moment
 * systems both satisfy.
 *
 * C interface of the shared library. All entry points return a status code
 * (CSIM_OK on success); on failure csim_last_error() carries a message for
 * the calling thread. Handles are opaque and owned by the caller through
 * the matching *_free function.
 */
#ifndef COORDSIM_H
#define COORDSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CSIM_OK = 0,
  CSIM_ERR_INVALID_ARGUMENT = 1,
  CSIM_ERR_PARSE = 2,
  CSIM_ERR_UNKNOWN_NAME = 3,
  CSIM_ERR_RUNTIME = 4
} csim_status;

const char* csim_version(void);
const char* csim_status_name(int status);
const char* csim_last_error(void);

/* ---- model ---- */

typedef struct csim_model csim_model;

/* Builds a model from the JSON schema:
 *   {"preset": {"name": ..., "params": {...}}}
 * or
 *   {"graph": {...}, "measures": {...}}  (see README for the field list).
 */
int csim_model_from_json(const char* json_text, csim_model** out);
int csim_model_preset(const char* name, const char* params_json, csim_model** out);
void csim_model_free(csim_model* model);

int csim_model_vertex_count(const csim_model* model, int* out);
int csim_model_vertex_label(const csim_model* model, int v, char* buffer, size_t size);
/* Total masses of every measure family, as JSON. Free with csim_string_free. */
int csim_model_type_json(const csim_model* model, char** out_json);
void csim_string_free(char* text);

/* ---- forward simulation ---- */

typedef struct {
  double mean;
  double se;
  long long n;
} csim_estimate;

typedef struct {
  double time;
  int kind; /* 0 migration, 1 death, 2 reproduction, 3 coalescence */
  int source;
  int target;   /* -1 when the kind has no target */
  double impact; /* coordination impact y; 0 for per-individual events */
  long long participants;
} csim_event;

const char* csim_event_kind_name(int kind);

typedef struct csim_trajectory csim_trajectory;

/* caps of 0 select the defaults (10^7 events, 10^7 particles) */
int csim_simulate(const csim_model* model, const long long* z0, double t_end,
                  uint64_t seed, uint64_t event_cap, long long population_cap,
                  const double* snapshot_times, size_t n_snapshots,
                  csim_trajectory** out);
void csim_trajectory_free(csim_trajectory* trajectory);
size_t csim_trajectory_event_count(const csim_trajectory* trajectory);
int csim_trajectory_event(const csim_trajectory* trajectory, size_t index, csim_event* out);
int csim_trajectory_final_state(const csim_trajectory* trajectory, long long* out);
int csim_trajectory_snapshot(const csim_trajectory* trajectory, size_t index,
                             long long* out);
int csim_trajectory_cap_exceeded(const csim_trajectory* trajectory);

/* Mean of Z_t^{(v)} per vertex over independent replicas. */
int csim_mc_vertex_means(const csim_model* model, const long long* z0, double t,
                         long long replicas, uint64_t seed, int threads,
                         csim_estimate* out, long long* capped_replicas);

/* Windowed run of a homogeneous family on an infinite graph.
 * family_kind: 0 = integer lattice, 1 = rooted tree, each with branching
 * degree d. measures_json keys (all optional atom arrays [{y, mass}...]):
 * coalescence, death, repro_self, repro_neighbor, migration_neighbor,
 * migration_down. Starts from one particle at the root; *tau_hit receives
 * the first boundary-occupancy time or infinity.
 */
int csim_truncated_run(int family_kind, int d, const char* measures_json, int radius,
                       double t_end, uint64_t seed, double* tau_hit,
                       long long* final_total);

/* ---- dual simulation ---- */

/* Simulates the dual jump-diffusion, writing vertex values at the requested
 * sample times into out_values (row-major: n_samples x vertex_count). */
int csim_simulate_dual(const csim_model* model, const double* x0, double t_end,
                       double dt, uint64_t seed, const double* sample_times,
                       size_t n_samples, double* out_values, double* clamp_total,
                       long long* jump_count);

/* Dual side of the moment identity: E_x[prod X_t^{z}] by Monte Carlo. */
int csim_dual_moment(const csim_model* model, const double* x0, const long long* z,
                     double t, long long replicas, double dt, uint64_t seed, int threads,
                     csim_estimate* out);

/* P(tau < t) for the all-ones hitting time, per starting level in x_grid. */
int csim_tau_hit_curve(const csim_model* model, const double* x_grid, size_t n_grid,
                       double t, long long replicas, double dt, uint64_t seed,
                       int threads, csim_estimate* out);

/* ---- deterministic solvers ---- */

/* Mean vector at time t of any zero-coalescence model of this type. */
int csim_expectation_ode(const csim_model* model, const long long* z0, double t,
                         double* out, double* error_estimate);

/* Upper bound on the mean for Kingman-type coalescence. */
int csim_kingman_bound(const csim_model* model, const long long* z0, double t,
                       double* out, double* error_estimate);

/* Heat semigroup with potential applied to a point mass at v0 on a K^d box
 * (torus != 0 selects periodic boundaries). out has K^d entries. */
int csim_pam_ode(const double* xi_plus, const double* xi_minus, int K, int d, int torus,
                 int v0, double t, double* out, double* error_estimate);

/* Closed-form generation-k mean of the tree branching random walk. */
int csim_tree_brw_expectation(int d, double r, double mu, double t, int generation,
                              double* out);

/* Monte Carlo per-generation means (each generation sum divided by d^k). */
int csim_tree_brw_mc(int d, int depth, double r, double mu, double t,
                     long long replicas, uint64_t seed, int threads,
                     csim_estimate* out /* depth+1 entries */);

/* Whether the tail family keeps E[(max(xi,2)/log max(xi,2))^d] finite.
 * family: "bounded" | "exponential" | "pareto". */
int csim_moment_condition(const char* family, double pareto_alpha, int d, int* satisfied,
                          char** diagnostic);

/* ---- statistical verification ---- */

typedef struct {
  csim_estimate forward_side;
  csim_estimate dual_side;
  double z_score;
  double threshold;
  int pass;
} csim_duality_report;

int csim_duality_check(const csim_model* model, const double* x, const long long* z,
                       double t, long long replicas, uint64_t seed, double threshold,
                       double dual_dt, int threads, csim_duality_report* out);

/* Exact truncated-chain value of E_z0[prod x^{Z_t}] with the overflow leak. */
int csim_oracle_moment(const csim_model* model, const long long* z0, const double* x,
                       double t, long long total_cap, double* value, double* leak,
                       long long* n_states);

/* P_{n-bar}(|Z_t| < m) for each n in n_list. */
int csim_cdi_probe(const csim_model* model, const long long* n_list, size_t n_points,
                   long long m, double t, long long replicas, uint64_t seed, int threads,
                   csim_estimate* out);

/* P(N_T > 1 - eps) for the selection-vs-coordinated-decay dual. */
int csim_fixation_probe(double alpha, double p, double t_end, double eps,
                        long long replicas, uint64_t seed, double n0, int threads,
                        csim_estimate* out);

typedef struct {
  double impact;
  csim_estimate mean;
  csim_estimate variance;
} csim_variance_point;

/* Variance of Z_t^{(v)} for the impact-0, impact-1/2 and impact-1
 * representatives of the model's type. out is impact-major with
 * 3 * vertex_count entries. ordered reports whether every vertex shows
 * nondecreasing variances. */
int csim_variance_order(const csim_model* model, const long long* z0, double t,
                        long long replicas, uint64_t seed, int threads,
                        csim_variance_point* out, int* ordered);

typedef struct {
  int dominated;
  int projection_ok;
  long long extinct_replicas;
  long long replicas;
  long long total_events;
} csim_coupling_report;

/* Joint run of the coordinated contact dynamics, its contact-process
 * projection and the branching random walk on a K^d torus, checking the
 * pathwise domination at every event. z0 may be NULL for one particle at
 * vertex 0. */
int csim_contact_coupling(int K, int d, double death_rate, double repro_rate,
                          const long long* z0, double t_end, long long replicas,
                          uint64_t seed, csim_coupling_report* out);

/* ---- random potentials and path estimators ---- */

/* families: "zero" | "uniform" (a..b) | "exponential" (rate a) |
 * "pareto" (index a, scale b) */
int csim_sample_potential(const char* plus_family, double plus_a, double plus_b,
                          const char* minus_family, double minus_a, double minus_b,
                          int n_vertices, uint64_t seed, double* xi_plus,
                          double* xi_minus);

/* estimator: 0 = path integral, 1 = lonely walker, 2 = variance bound.
 * out has K^d entries (estimates indexed by the walk's terminal vertex). */
int csim_pam_path_curve(int estimator, const double* xi_plus, const double* xi_minus,
                        int K, int d, int torus, int v0, double t, long long replicas,
                        uint64_t seed, int threads, csim_estimate* out,
                        long long* flagged);

/* Occupancy probe of the one-directional branching random walk: Monte Carlo
 * P(Z_t^{(probe)} = 0) and the dual ODE curve on the same time grid. */
int csim_occupancy_curve(double r, double m, int probe_distance, const double* t_grid,
                         size_t n_grid, long long replicas, uint64_t seed, int threads,
                         csim_estimate* mc_out, double* ode_out, double* ode_error);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* COORDSIM_H */

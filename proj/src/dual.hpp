#pragma once

#include <optional>
#include <vector>

#include "analytics.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace coordsim {

// Element of [0,1]^V: the frequency configuration of the dual process.
struct FrequencyState {
  std::vector<double> x;

  static FrequencyState constant(int n, double value) {
    return {std::vector<double>(n, value)};
  }
  bool operator==(const FrequencyState&) const = default;
};

struct DualConfig {
  double dt = 1e-3;            // Euler-Maruyama step for the drift/diffusion part
  double hit_tolerance = -1.0; // threshold for tau; < 0 selects it per model
  bool record_jumps = false;
};

struct DualPath {
  std::vector<double> sample_times;
  std::vector<FrequencyState> samples;
  FrequencyState final_state;
  double end_time = 0.0;
  long long jump_count = 0;
  double clamp_total = 0.0;  // summed magnitude of [0,1] clamps (diffusion only)
  std::vector<std::pair<double, int>> jumps;  // (time, vertex), if recorded
};

// Jump-diffusion dual of a model: between Poisson arrivals the atom-at-zero
// drift (migration, selection, mutation) and the Wright-Fisher noise
// sqrt(c_v x(1-x)) dB are integrated by Euler-Maruyama; each positive atom
// (y, w) fires at rate w/y (w/y^2 for coalescence) and applies its exact
// jump map, which preserves [0,1] without clamping.
DualPath simulate_dual(const ModelSpec& spec, const FrequencyState& x0, double t_end,
                       const DualConfig& cfg, Rng& rng,
                       const std::vector<double>& sample_times = {});

// Monte Carlo estimate of E_x[prod_v (X_t^(v))^{z_v}], the dual side of the
// moment identity, with the 0^0 = 1 convention.
EstimateWithCI moment_estimate(const ModelSpec& spec, const FrequencyState& x0,
                               const std::vector<long long>& z, double t,
                               long long n_replicas, const DualConfig& cfg,
                               std::uint64_t seed, int threads = 1);

// First time every coordinate reaches the all-ones state (within the hit
// tolerance), or nullopt if t_max passes first.
std::optional<double> tau_hit(const ModelSpec& spec, const FrequencyState& x0,
                              double t_max, const DualConfig& cfg, Rng& rng);

// Hit threshold used by tau_hit: exactly 1 when every vertex has a mechanism
// that reaches 1 exactly (coalescence mass at zero clamps, an atom at one
// jumps the full gap), else 1 - 1e-9.
double default_hit_tolerance(const ModelSpec& spec);

// Deterministic dual of a drift-only model (every measure a multiple of
// delta_0, no coalescence): solves dx_v/dt = sum_u m_{vu}(x_u - x_v)
// + sum_u r_{vu} x_v(x_u - 1) + d_v(1 - x_v) by RK4 on a time grid.
// Throws if the model has positive atoms or coalescence mass, or if the
// solution leaves [0,1] by more than a rounding tolerance.
std::vector<std::vector<double>> dual_drift_ode(const ModelSpec& spec,
                                                const std::vector<double>& x0,
                                                const std::vector<double>& t_grid,
                                                double* error_estimate = nullptr);

// Dual mean-field curve of the lattice branching model with potential xi:
// dx_v/dt = sum_{u~v}(x_u - x_v) + xi+_v x_v(x_v - 1) + xi-_v (1 - x_v).
std::vector<std::vector<double>> pam_dual_ode(const PotentialField& field,
                                              const GraphSpec& box,
                                              const std::vector<double>& x0,
                                              const std::vector<double>& t_grid,
                                              double* error_estimate = nullptr);

}  // namespace coordsim

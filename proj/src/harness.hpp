#pragma once

#include <cstdint>
#include <vector>

#include "dual.hpp"
#include "forward.hpp"
#include "model.hpp"
#include "stats.hpp"

namespace coordsim {

// Two-sided comparison of the forward and dual Monte Carlo estimates of the
// same moment. pass iff the z-score is below the threshold.
struct DualityReport {
  EstimateWithCI forward;
  EstimateWithCI dual;
  double z = 0.0;
  double threshold = 4.0;
  bool pass = false;
};

struct OracleOptions {
  long long total_cap = 200;      // states with |z| <= total_cap are kept
  double tail_tolerance = 1e-13;  // Poisson tail cut of the uniformization
};

struct OracleResult {
  double value = 0.0;  // E_z0[prod_v x_v^{Z_t^{(v)}}] on the truncated chain
  double leak = 0.0;   // probability mass absorbed by the overflow state
  long long n_states = 0;
};

// Brute-force oracle: enumerates the reachable state space up to the cap,
// assembles the exact jump rates, and propagates the initial distribution by
// uniformization. Mass leaving the cap is routed to an absorbing overflow
// state that contributes 0 to the moment; its probability is the reported
// leak. Independent of both simulation engines and of the dense matrix
// exponential used elsewhere.
OracleResult oracle_expm(const ModelSpec& spec, const std::vector<long long>& z0,
                         const std::vector<double>& x, double t,
                         const OracleOptions& opts = {});

DualityReport duality_check(const ModelSpec& spec, const std::vector<double>& x,
                            const std::vector<long long>& z, double t,
                            long long n_replicas, std::uint64_t seed,
                            double threshold = 4.0, const DualConfig& dual_cfg = {},
                            int threads = 1);

// Monte Carlo curve n -> P_{n-bar}(|Z_t| < m), started from n particles on
// every vertex.
struct CdiPoint {
  long long n = 0;
  EstimateWithCI estimate;
};
std::vector<CdiPoint> cdi_probe(const ModelSpec& spec, const std::vector<long long>& n_list,
                                long long m, double t, long long n_replicas,
                                std::uint64_t seed, const MonteCarloOptions& opts = {});

// Companion curve x -> P_{x-bar}(tau < t) from the dual hitting time.
std::vector<EstimateWithCI> tau_hit_curve(const ModelSpec& spec,
                                          const std::vector<double>& x_grid, double t,
                                          long long n_replicas, const DualConfig& cfg,
                                          std::uint64_t seed, int threads = 1);

// One-dimensional dual of the island-continent comparison process: the
// deficit W = 1 - N grows logistically at rate alpha and is multiplied by
// (1-p) at unit-rate Poisson times; between jumps the logistic flow is
// integrated in closed form. Returns the estimate of P(N_T > 1 - eps).
EstimateWithCI fixation_probe(double alpha, double p, double t_end, double eps,
                              long long n_replicas, std::uint64_t seed,
                              double n0 = 0.5, int threads = 1);

// All measures of the given type concentrated at one impact: w * delta_a.
ModelSpec spec_of_type(const TypeSignature& type, double impact);

struct VarianceOrderEntry {
  double impact = 0.0;
  std::vector<EstimateWithCI> mean;      // per vertex
  std::vector<EstimateWithCI> variance;  // per vertex, CI from batch means
};

struct VarianceOrderReport {
  std::vector<VarianceOrderEntry> entries;  // impacts 0, 1/2, 1
  bool ordered = false;  // point estimates nondecreasing in impact, per vertex
};

// Compares the variance of the fully independent, half-coordinated and fully
// coordinated representatives of a zero-coalescence type, under a common
// seed schedule.
VarianceOrderReport variance_order_check(const TypeSignature& type,
                                         const std::vector<long long>& z0, double t,
                                         long long n_replicas, std::uint64_t seed,
                                         const MonteCarloOptions& opts = {});

struct CouplingReport {
  bool dominated = true;      // occupancy of the coordinated process <= walk counts
  bool projection_ok = true;  // contact state equals that occupancy at all times
  long long extinct_replicas = 0;
  long long replicas = 0;
  long long total_events = 0;
};

// Joint simulation of the fully coordinated contact dynamics Z, its
// occupancy projection (the contact process), and the associated branching
// random walk N, built on one particle-level event stream so that the
// domination 1{Z_v > 0} <= N_v can be asserted pathwise at every event.
CouplingReport coupling_check_contact(const GraphSpec& graph, double death_rate,
                                      double repro_rate, const ParticleState& z0,
                                      double t_end, long long n_replicas,
                                      std::uint64_t seed,
                                      std::uint64_t event_cap = 10'000'000);

}  // namespace coordsim

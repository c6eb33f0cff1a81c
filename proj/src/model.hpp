#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "measure.hpp"

namespace coordsim {

// Component-wise total masses of a model's measures: its coordination-
// invariance class. Two models of equal type share every expectation
// produced by the linear moment system.
struct TypeSignature {
  std::vector<double> coalescence;                // c_v
  std::vector<double> death;                      // d_v
  std::vector<std::vector<double>> reproduction;  // r_{vu}
  std::vector<std::vector<double>> migration;     // m_{vu}

  int size() const { return static_cast<int>(coalescence.size()); }
  bool operator==(const TypeSignature&) const = default;
};

// Full parameterization of a coordinated branching-coalescing model on a
// finite graph: per-vertex coalescence and death measures, per-ordered-pair
// reproduction and migration measures. Absent entries are the zero measure.
class ModelSpec {
 public:
  explicit ModelSpec(GraphSpec graph);

  const GraphSpec& graph() const { return graph_; }
  int vertex_count() const { return graph_.size(); }

  ModelSpec& set_coalescence(int v, AtomicMeasure m);
  ModelSpec& set_death(int v, AtomicMeasure m);
  ModelSpec& set_reproduction(int v, int u, AtomicMeasure m);
  ModelSpec& set_migration(int v, int u, AtomicMeasure m);

  const AtomicMeasure& coalescence(int v) const;
  const AtomicMeasure& death(int v) const;
  const AtomicMeasure& reproduction(int v, int u) const;
  const AtomicMeasure& migration(int v, int u) const;

  const std::map<int, AtomicMeasure>& coalescence_map() const { return coalescence_; }
  const std::map<int, AtomicMeasure>& death_map() const { return death_; }
  const std::map<std::pair<int, int>, AtomicMeasure>& reproduction_map() const {
    return reproduction_;
  }
  const std::map<std::pair<int, int>, AtomicMeasure>& migration_map() const {
    return migration_;
  }

  // Throws std::invalid_argument on any violated invariant (nonzero
  // self-migration, out-of-range vertex).
  void validate() const;

  TypeSignature type() const;

  bool has_coalescence() const;

 private:
  void check_vertex(int v) const;

  GraphSpec graph_;
  std::map<int, AtomicMeasure> coalescence_;
  std::map<int, AtomicMeasure> death_;
  std::map<std::pair<int, int>, AtomicMeasure> reproduction_;
  std::map<std::pair<int, int>, AtomicMeasure> migration_;
};

// Named constructions for the worked examples this library ships with.
// Tests and the CLI reference these rather than re-assembling measures.
namespace presets {

// Single-vertex binary branching at total rate r with impact w: w = 0 gives
// independent (Yule) reproduction, w = 1 fully coordinated doubling.
ModelSpec yule(double r, double w = 0.0);

// Block-counting dynamics of a structured multiple-merger coalescent:
// per-vertex coalescence measures, independent migration at rates m[v][u].
ModelSpec structured_lambda_coalescent(const std::vector<AtomicMeasure>& lambda,
                                       const std::vector<std::vector<double>>& m);

// Single-vertex branching at rate r with binomial disasters of impact p.
ModelSpec binomial_disasters(double p, double r);

// Two-vertex active/dormant model: Kingman coalescence (mass c1) on the
// active vertex only, arbitrary switching measures between the vertices.
ModelSpec seedbank_simultaneous(const AtomicMeasure& m01, const AtomicMeasure& m10,
                                double c1 = 1.0);

// n active islands with pairwise migration a[i][j] plus one dormant partner
// per island, exchange rates e_i (active->dormant) and K*e_i (back).
ModelSpec spatial_seedbank(int n, double K, const std::vector<double>& e,
                           const std::vector<double>& d,
                           const std::vector<std::vector<double>>& a);

// Single vertex with general coalescence and reproduction measures.
ModelSpec coordinated_bc(const AtomicMeasure& lambda, const AtomicMeasure& repro);

// Complete graph: shared reproduction/death measures, Kingman coalescence of
// mass c per vertex, migration c'*delta_0 + c''*delta_1 on every ordered pair.
ModelSpec hierarchical_moran(int n, double c, double c_ind, double c_coord,
                             const AtomicMeasure& repro, const AtomicMeasure& death);

// hierarchical_moran without reproduction or death.
ModelSpec kingman_erosion(int n, double c, double c_ind, double c_coord);

// Branching random walk on a box graph whose expectation solves the lattice
// heat equation with potential xi = xi_plus - xi_minus: on-site birth at
// xi_plus[v], on-site death at xi_minus[v], unit migration per directed edge.
ModelSpec pam_branching(const GraphSpec& box, const std::vector<double>& xi_plus,
                        const std::vector<double>& xi_minus);

// n islands with one shared coalescence measure and fully coordinated
// migration (impact one) between every ordered pair.
ModelSpec nested_coalescent(const AtomicMeasure& lambda, int n_islands);

// Island (vertex 0) - continent (vertex 1) model: Kingman mass c on the
// island only, independent reproduction alpha' (island) and alpha
// (continent), coordinated migration measures between the two.
ModelSpec peripatric(double alpha, double alpha_prime, double c,
                     const AtomicMeasure& m01, const AtomicMeasure& m10);

// Fully coordinated contact dynamics: all particles at a vertex die together
// at rate death_rate, all reproduce together into each neighbour at rate
// repro_rate. The occupancy indicator of this process is the contact process.
ModelSpec binary_contact_path(const GraphSpec& g, double death_rate, double repro_rate);

// Branching random walk on a d-uniform rooted tree: on-site birth at rate r,
// migration to a uniformly chosen child at total rate mu.
ModelSpec tree_brw(int d, int depth, double r, double mu);

}  // namespace presets

// Homogeneous model family on an infinite graph (integer lattice or
// d-uniform rooted tree), describable by finitely many measures.
struct InfiniteFamily {
  enum class Kind { Lattice, Tree };
  Kind kind = Kind::Lattice;
  int d = 1;  // lattice dimension, or tree fan-out

  AtomicMeasure coalescence;        // per vertex
  AtomicMeasure death;              // per vertex
  AtomicMeasure repro_self;         // R_{vv}
  AtomicMeasure repro_neighbor;     // per directed edge (both directions)
  AtomicMeasure migration_neighbor; // lattice: per directed edge
  AtomicMeasure migration_down;     // tree: total mass to children, split 1/d each
};

// Finite window of an infinite family: the subgraph spanned by vertices at
// graph distance <= radius from the root, measures restricted to it. The
// boundary (distance exactly radius) is reported so callers can detect the
// first time mass reaches it.
struct TruncatedModel {
  ModelSpec spec;
  int root = 0;
  std::vector<int> boundary;
};

TruncatedModel truncate(const InfiniteFamily& family, int radius);

}  // namespace coordsim

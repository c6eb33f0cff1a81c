#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace coordsim {

namespace {
const AtomicMeasure kZero{};
}

ModelSpec::ModelSpec(GraphSpec graph) : graph_(std::move(graph)) {}

void ModelSpec::check_vertex(int v) const {
  if (v < 0 || v >= graph_.size())
    throw std::invalid_argument("vertex " + std::to_string(v) +
                                " out of range for a graph of size " +
                                std::to_string(graph_.size()));
}

ModelSpec& ModelSpec::set_coalescence(int v, AtomicMeasure m) {
  check_vertex(v);
  if (m.is_zero()) coalescence_.erase(v);
  else coalescence_[v] = std::move(m);
  return *this;
}

ModelSpec& ModelSpec::set_death(int v, AtomicMeasure m) {
  check_vertex(v);
  if (m.is_zero()) death_.erase(v);
  else death_[v] = std::move(m);
  return *this;
}

ModelSpec& ModelSpec::set_reproduction(int v, int u, AtomicMeasure m) {
  check_vertex(v);
  check_vertex(u);
  if (m.is_zero()) reproduction_.erase({v, u});
  else reproduction_[{v, u}] = std::move(m);
  return *this;
}

ModelSpec& ModelSpec::set_migration(int v, int u, AtomicMeasure m) {
  check_vertex(v);
  check_vertex(u);
  if (v == u && !m.is_zero())
    throw std::invalid_argument("self-migration mass must be zero (vertex " +
                                std::to_string(v) + ")");
  if (m.is_zero()) migration_.erase({v, u});
  else migration_[{v, u}] = std::move(m);
  return *this;
}

const AtomicMeasure& ModelSpec::coalescence(int v) const {
  check_vertex(v);
  auto it = coalescence_.find(v);
  return it == coalescence_.end() ? kZero : it->second;
}

const AtomicMeasure& ModelSpec::death(int v) const {
  check_vertex(v);
  auto it = death_.find(v);
  return it == death_.end() ? kZero : it->second;
}

const AtomicMeasure& ModelSpec::reproduction(int v, int u) const {
  check_vertex(v);
  check_vertex(u);
  auto it = reproduction_.find({v, u});
  return it == reproduction_.end() ? kZero : it->second;
}

const AtomicMeasure& ModelSpec::migration(int v, int u) const {
  check_vertex(v);
  check_vertex(u);
  auto it = migration_.find({v, u});
  return it == migration_.end() ? kZero : it->second;
}

void ModelSpec::validate() const {
  for (const auto& [v, m] : coalescence_) check_vertex(v);
  for (const auto& [v, m] : death_) check_vertex(v);
  for (const auto& [vu, m] : reproduction_) {
    check_vertex(vu.first);
    check_vertex(vu.second);
  }
  for (const auto& [vu, m] : migration_) {
    check_vertex(vu.first);
    check_vertex(vu.second);
    if (vu.first == vu.second && m.total_mass() > 0.0)
      throw std::invalid_argument("self-migration mass must be zero (vertex " +
                                  std::to_string(vu.first) + ")");
  }
}

TypeSignature ModelSpec::type() const {
  int n = vertex_count();
  TypeSignature sig;
  sig.coalescence.assign(n, 0.0);
  sig.death.assign(n, 0.0);
  sig.reproduction.assign(n, std::vector<double>(n, 0.0));
  sig.migration.assign(n, std::vector<double>(n, 0.0));
  for (const auto& [v, m] : coalescence_) sig.coalescence[v] = m.total_mass();
  for (const auto& [v, m] : death_) sig.death[v] = m.total_mass();
  for (const auto& [vu, m] : reproduction_)
    sig.reproduction[vu.first][vu.second] = m.total_mass();
  for (const auto& [vu, m] : migration_)
    sig.migration[vu.first][vu.second] = m.total_mass();
  return sig;
}

bool ModelSpec::has_coalescence() const {
  for (const auto& [v, m] : coalescence_)
    if (m.total_mass() > 0.0) return true;
  return false;
}

namespace presets {

ModelSpec yule(double r, double w) {
  if (r < 0.0) throw std::invalid_argument("yule: rate r must be >= 0");
  if (w < 0.0 || w > 1.0) throw std::invalid_argument("yule: impact w must be in [0,1]");
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_reproduction(0, 0, AtomicMeasure::dirac(w, r));
  spec.validate();
  return spec;
}

ModelSpec structured_lambda_coalescent(const std::vector<AtomicMeasure>& lambda,
                                       const std::vector<std::vector<double>>& m) {
  int n = static_cast<int>(lambda.size());
  if (n < 1) throw std::invalid_argument("structured_lambda_coalescent: empty island list");
  if (static_cast<int>(m.size()) != n)
    throw std::invalid_argument("structured_lambda_coalescent: migration matrix size mismatch");
  ModelSpec spec(GraphSpec::complete(n));
  for (int v = 0; v < n; ++v) {
    spec.set_coalescence(v, lambda[v]);
    if (static_cast<int>(m[v].size()) != n)
      throw std::invalid_argument("structured_lambda_coalescent: migration row size mismatch");
    for (int u = 0; u < n; ++u)
      if (u != v && m[v][u] != 0.0)
        spec.set_migration(v, u, AtomicMeasure::dirac(0.0, m[v][u]));
  }
  spec.validate();
  return spec;
}

ModelSpec binomial_disasters(double p, double r) {
  if (p <= 0.0 || p > 1.0) throw std::invalid_argument("binomial_disasters: p must be in (0,1]");
  if (r < 0.0) throw std::invalid_argument("binomial_disasters: r must be >= 0");
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_death(0, AtomicMeasure::dirac(p, 1.0));
  spec.set_reproduction(0, 0, AtomicMeasure::dirac(0.0, r));
  spec.validate();
  return spec;
}

ModelSpec seedbank_simultaneous(const AtomicMeasure& m01, const AtomicMeasure& m10,
                                double c1) {
  ModelSpec spec(GraphSpec::complete(2));
  spec.set_coalescence(0, AtomicMeasure::dirac(0.0, c1));
  spec.set_migration(0, 1, m01);
  spec.set_migration(1, 0, m10);
  spec.validate();
  return spec;
}

ModelSpec spatial_seedbank(int n, double K, const std::vector<double>& e,
                           const std::vector<double>& d,
                           const std::vector<std::vector<double>>& a) {
  if (n < 1) throw std::invalid_argument("spatial_seedbank: n must be >= 1");
  if (static_cast<int>(e.size()) != n || static_cast<int>(d.size()) != n ||
      static_cast<int>(a.size()) != n)
    throw std::invalid_argument("spatial_seedbank: parameter arrays must have length n");
  // active islands are vertices 0..n-1, dormant partners n..2n-1
  ModelSpec spec(GraphSpec::complete(2 * n));
  for (int i = 0; i < n; ++i) {
    spec.set_coalescence(i, AtomicMeasure::dirac(0.0, d[i]));
    spec.set_migration(i, n + i, AtomicMeasure::dirac(0.0, e[i]));
    spec.set_migration(n + i, i, AtomicMeasure::dirac(0.0, K * e[i]));
    if (static_cast<int>(a[i].size()) != n)
      throw std::invalid_argument("spatial_seedbank: migration row size mismatch");
    for (int j = 0; j < n; ++j)
      if (j != i && a[i][j] != 0.0)
        spec.set_migration(i, j, AtomicMeasure::dirac(0.0, a[i][j]));
  }
  spec.validate();
  return spec;
}

ModelSpec coordinated_bc(const AtomicMeasure& lambda, const AtomicMeasure& repro) {
  ModelSpec spec(GraphSpec::complete(1));
  spec.set_coalescence(0, lambda);
  spec.set_reproduction(0, 0, repro);
  spec.validate();
  return spec;
}

ModelSpec hierarchical_moran(int n, double c, double c_ind, double c_coord,
                             const AtomicMeasure& repro, const AtomicMeasure& death) {
  if (n < 2) throw std::invalid_argument("hierarchical_moran: need at least 2 vertices");
  ModelSpec spec(GraphSpec::complete(n));
  AtomicMeasure mig({Atom{0.0, c_ind}, Atom{1.0, c_coord}});
  for (int v = 0; v < n; ++v) {
    spec.set_coalescence(v, AtomicMeasure::dirac(0.0, c));
    spec.set_reproduction(v, v, repro);
    spec.set_death(v, death);
    for (int u = 0; u < n; ++u)
      if (u != v) spec.set_migration(v, u, mig);
  }
  spec.validate();
  return spec;
}

ModelSpec kingman_erosion(int n, double c, double c_ind, double c_coord) {
  return hierarchical_moran(n, c, c_ind, c_coord, AtomicMeasure::zero(),
                            AtomicMeasure::zero());
}

ModelSpec pam_branching(const GraphSpec& box, const std::vector<double>& xi_plus,
                        const std::vector<double>& xi_minus) {
  int n = box.size();
  if (static_cast<int>(xi_plus.size()) != n || static_cast<int>(xi_minus.size()) != n)
    throw std::invalid_argument("pam_branching: potential length must equal vertex count");
  ModelSpec spec(box);
  for (int v = 0; v < n; ++v) {
    if (xi_plus[v] < 0.0 || xi_minus[v] < 0.0)
      throw std::invalid_argument("pam_branching: potential parts must be >= 0");
    if (xi_plus[v] > 0.0) spec.set_reproduction(v, v, AtomicMeasure::dirac(0.0, xi_plus[v]));
    if (xi_minus[v] > 0.0) spec.set_death(v, AtomicMeasure::dirac(0.0, xi_minus[v]));
    for (int u : box.neighbors(v)) spec.set_migration(v, u, AtomicMeasure::dirac(0.0, 1.0));
  }
  spec.validate();
  return spec;
}

ModelSpec nested_coalescent(const AtomicMeasure& lambda, int n_islands) {
  if (n_islands < 1) throw std::invalid_argument("nested_coalescent: need >= 1 island");
  ModelSpec spec(GraphSpec::complete(n_islands));
  for (int v = 0; v < n_islands; ++v) {
    spec.set_coalescence(v, lambda);
    for (int u = 0; u < n_islands; ++u)
      if (u != v) spec.set_migration(v, u, AtomicMeasure::dirac(1.0, 1.0));
  }
  spec.validate();
  return spec;
}

ModelSpec peripatric(double alpha, double alpha_prime, double c,
                     const AtomicMeasure& m01, const AtomicMeasure& m10) {
  if (alpha < 0.0 || alpha_prime < 0.0 || c < 0.0)
    throw std::invalid_argument("peripatric: rates must be >= 0");
  ModelSpec spec(GraphSpec::complete(2));
  spec.set_coalescence(0, AtomicMeasure::dirac(0.0, c));
  spec.set_reproduction(0, 0, AtomicMeasure::dirac(0.0, alpha_prime));
  spec.set_reproduction(1, 1, AtomicMeasure::dirac(0.0, alpha));
  spec.set_migration(0, 1, m01);
  spec.set_migration(1, 0, m10);
  spec.validate();
  return spec;
}

ModelSpec binary_contact_path(const GraphSpec& g, double death_rate, double repro_rate) {
  if (death_rate < 0.0 || repro_rate < 0.0)
    throw std::invalid_argument("binary_contact_path: rates must be >= 0");
  ModelSpec spec(g);
  for (int v = 0; v < g.size(); ++v) {
    if (death_rate > 0.0) spec.set_death(v, AtomicMeasure::dirac(1.0, death_rate));
    if (repro_rate > 0.0)
      for (int u : g.neighbors(v))
        spec.set_reproduction(v, u, AtomicMeasure::dirac(1.0, repro_rate));
  }
  spec.validate();
  return spec;
}

ModelSpec tree_brw(int d, int depth, double r, double mu) {
  if (r < 0.0 || mu < 0.0) throw std::invalid_argument("tree_brw: rates must be >= 0");
  GraphSpec g = GraphSpec::rooted_tree(d, depth);
  ModelSpec spec(g);
  for (int v = 0; v < g.size(); ++v) {
    if (r > 0.0) spec.set_reproduction(v, v, AtomicMeasure::dirac(0.0, r));
    for (int child : g.tree_children(v))
      spec.set_migration(v, child, AtomicMeasure::dirac(0.0, mu / d));
  }
  spec.validate();
  return spec;
}

}  // namespace presets

namespace {

// l1 ball of the integer lattice: vertices ordered by (distance, lex coords)
// so that windows of increasing radius agree on shared vertices.
struct LatticeBall {
  std::vector<std::vector<int>> points;
  std::map<std::vector<int>, int> index;
};

LatticeBall lattice_ball(int d, int radius) {
  LatticeBall ball;
  std::vector<std::vector<int>> frontier{std::vector<int>(d, 0)};
  std::map<std::vector<int>, int> seen;
  seen[frontier[0]] = 0;
  for (int dist = 0; dist <= radius; ++dist) {
    std::sort(frontier.begin(), frontier.end());
    std::vector<std::vector<int>> next;
    for (const auto& p : frontier) {
      ball.index[p] = static_cast<int>(ball.points.size());
      ball.points.push_back(p);
      if (dist == radius) continue;
      for (int i = 0; i < d; ++i) {
        for (int step : {-1, 1}) {
          std::vector<int> q = p;
          q[i] += step;
          if (seen.emplace(q, dist + 1).second) next.push_back(q);
        }
      }
    }
    frontier = std::move(next);
  }
  return ball;
}

std::string lattice_label(const std::vector<int>& p) {
  std::string out = "(";
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(p[i]);
  }
  return out + ")";
}

}  // namespace

TruncatedModel truncate(const InfiniteFamily& family, int radius) {
  if (radius < 0) throw std::invalid_argument("truncate: radius must be >= 0");
  if (family.kind == InfiniteFamily::Kind::Tree) {
    GraphSpec g = GraphSpec::rooted_tree(family.d, radius);
    ModelSpec spec(g);
    for (int v = 0; v < g.size(); ++v) {
      spec.set_coalescence(v, family.coalescence);
      spec.set_death(v, family.death);
      spec.set_reproduction(v, v, family.repro_self);
      for (int child : g.tree_children(v)) {
        spec.set_reproduction(v, child, family.repro_neighbor);
        spec.set_reproduction(child, v, family.repro_neighbor);
        if (!family.migration_down.is_zero()) {
          std::vector<Atom> scaled = family.migration_down.atoms();
          for (Atom& a : scaled) a.mass /= family.d;
          spec.set_migration(v, child, AtomicMeasure(scaled));
        }
      }
    }
    spec.validate();
    TruncatedModel out{std::move(spec), 0, {}};
    for (int v = g.tree_generation_begin(radius); v < g.size(); ++v)
      out.boundary.push_back(v);
    return out;
  }

  LatticeBall ball = lattice_ball(family.d, radius);
  int n = static_cast<int>(ball.points.size());
  std::vector<std::pair<int, int>> edges;
  std::vector<std::string> labels(n);
  for (int v = 0; v < n; ++v) {
    labels[v] = lattice_label(ball.points[v]);
    for (int i = 0; i < family.d; ++i) {
      std::vector<int> q = ball.points[v];
      q[i] += 1;
      auto it = ball.index.find(q);
      if (it != ball.index.end()) edges.emplace_back(v, it->second);
    }
  }
  GraphSpec g = GraphSpec::explicit_edges(n, edges, labels);
  ModelSpec spec(g);
  for (int v = 0; v < n; ++v) {
    spec.set_coalescence(v, family.coalescence);
    spec.set_death(v, family.death);
    spec.set_reproduction(v, v, family.repro_self);
    for (int u : g.neighbors(v)) {
      spec.set_reproduction(v, u, family.repro_neighbor);
      spec.set_migration(v, u, family.migration_neighbor);
    }
  }
  spec.validate();
  TruncatedModel out{std::move(spec), 0, {}};
  for (int v = 0; v < n; ++v) {
    int dist = 0;
    for (int c : ball.points[v]) dist += std::abs(c);
    if (dist == radius) out.boundary.push_back(v);
  }
  return out;
}

}  // namespace coordsim

#include "graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coordsim {

const char* graph_kind_name(GraphKind kind) {
  switch (kind) {
    case GraphKind::Complete: return "complete";
    case GraphKind::Line: return "line";
    case GraphKind::Grid: return "grid";
    case GraphKind::Torus: return "torus";
    case GraphKind::RootedTree: return "rooted_tree";
    case GraphKind::Explicit: return "explicit";
  }
  return "?";
}

void GraphSpec::add_edge(int a, int b) {
  adjacency_[a].push_back(b);
  adjacency_[b].push_back(a);
}

GraphSpec GraphSpec::complete(int n) {
  if (n < 1) throw std::invalid_argument("complete graph needs n >= 1");
  GraphSpec g;
  g.kind_ = GraphKind::Complete;
  g.adjacency_.resize(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) g.add_edge(a, b);
  return g;
}

GraphSpec GraphSpec::line(int n) {
  if (n < 1) throw std::invalid_argument("line graph needs n >= 1");
  GraphSpec g;
  g.kind_ = GraphKind::Line;
  g.adjacency_.resize(n);
  for (int a = 0; a + 1 < n; ++a) g.add_edge(a, a + 1);
  return g;
}

GraphSpec GraphSpec::box(int K, int d, bool periodic) {
  if (K < 1 || d < 1) throw std::invalid_argument("grid/torus needs K >= 1, d >= 1");
  long long n = 1;
  for (int i = 0; i < d; ++i) {
    n *= K;
    if (n > 1'000'000) throw std::invalid_argument("grid/torus too large");
  }
  GraphSpec g;
  g.adjacency_.resize(static_cast<size_t>(n));
  std::vector<int> coords(d, 0);
  for (long long v = 0; v < n; ++v) {
    long long rem = v;
    for (int i = 0; i < d; ++i) {
      coords[i] = static_cast<int>(rem % K);
      rem /= K;
    }
    for (int i = 0; i < d; ++i) {
      long long stride = 1;
      for (int j = 0; j < i; ++j) stride *= K;
      if (coords[i] + 1 < K) {
        g.add_edge(static_cast<int>(v), static_cast<int>(v + stride));
      } else if (periodic && K > 2) {
        // K == 2 wrap would duplicate the existing edge
        g.add_edge(static_cast<int>(v), static_cast<int>(v - (K - 1) * stride));
      }
    }
  }
  return g;
}

GraphSpec GraphSpec::grid(int K, int d) {
  GraphSpec g = box(K, d, false);
  g.kind_ = GraphKind::Grid;
  g.K_ = K;
  g.d_ = d;
  return g;
}

GraphSpec GraphSpec::torus(int K, int d) {
  GraphSpec g = box(K, d, true);
  g.kind_ = GraphKind::Torus;
  g.K_ = K;
  g.d_ = d;
  return g;
}

GraphSpec GraphSpec::rooted_tree(int d, int depth) {
  if (d < 1 || depth < 0) throw std::invalid_argument("rooted_tree needs d >= 1, depth >= 0");
  long long n = 0, gen = 1;
  for (int k = 0; k <= depth; ++k) {
    n += gen;
    gen *= d;
    if (n > 1'000'000) throw std::invalid_argument("rooted_tree too large");
  }
  GraphSpec g;
  g.kind_ = GraphKind::RootedTree;
  g.d_ = d;
  g.depth_ = depth;
  g.adjacency_.resize(static_cast<size_t>(n));
  for (int v = 0; v < g.size(); ++v) {
    int parent = g.tree_parent(v);
    if (parent >= 0) g.add_edge(parent, v);
  }
  return g;
}

GraphSpec GraphSpec::explicit_edges(int n, std::vector<std::pair<int, int>> edges,
                                    std::vector<std::string> labels) {
  if (n < 1) throw std::invalid_argument("explicit graph needs n >= 1");
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("label list length must equal vertex count");
  GraphSpec g;
  g.kind_ = GraphKind::Explicit;
  g.adjacency_.resize(n);
  g.labels_ = std::move(labels);
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self-loop edges are not allowed");
    if (!g.adjacent(a, b)) g.add_edge(a, b);
  }
  return g;
}

bool GraphSpec::adjacent(int v, int u) const {
  const auto& nb = adjacency_.at(v);
  return std::find(nb.begin(), nb.end(), u) != nb.end();
}

bool GraphSpec::connected() const {
  if (size() == 0) return true;
  std::vector<char> seen(size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : adjacency_[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == size();
}

std::string GraphSpec::label(int v) const {
  if (v < 0 || v >= size()) throw std::out_of_range("vertex index");
  if (!labels_.empty()) return labels_[v];
  if (kind_ == GraphKind::Grid || kind_ == GraphKind::Torus) {
    std::vector<int> c = grid_coords(v);
    std::string out = "(";
    for (size_t i = 0; i < c.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(c[i] + 1);  // 1-based, matching [K]^d
    }
    return out + ")";
  }
  if (kind_ == GraphKind::RootedTree) {
    int k = tree_generation(v);
    int slot = v - tree_generation_begin(k);
    return "(" + std::to_string(k) + "," + std::to_string(slot + 1) + ")";
  }
  return std::to_string(v);
}

std::vector<int> GraphSpec::grid_coords(int v) const {
  if (kind_ != GraphKind::Grid && kind_ != GraphKind::Torus)
    throw std::logic_error("grid_coords on a non-grid graph");
  std::vector<int> coords(d_);
  long long rem = v;
  for (int i = 0; i < d_; ++i) {
    coords[i] = static_cast<int>(rem % K_);
    rem /= K_;
  }
  return coords;
}

int GraphSpec::grid_index(const std::vector<int>& coords) const {
  if (static_cast<int>(coords.size()) != d_)
    throw std::invalid_argument("coordinate dimension mismatch");
  long long v = 0, stride = 1;
  for (int i = 0; i < d_; ++i) {
    if (coords[i] < 0 || coords[i] >= K_)
      throw std::invalid_argument("coordinate out of range");
    v += coords[i] * stride;
    stride *= K_;
  }
  return static_cast<int>(v);
}

int GraphSpec::tree_generation_begin(int k) const {
  if (kind_ != GraphKind::RootedTree) throw std::logic_error("not a rooted tree");
  if (d_ == 1) return k;
  // 1 + d + ... + d^{k-1}
  long long begin = 0, gen = 1;
  for (int i = 0; i < k; ++i) {
    begin += gen;
    gen *= d_;
  }
  return static_cast<int>(begin);
}

int GraphSpec::tree_generation_size(int k) const {
  if (kind_ != GraphKind::RootedTree) throw std::logic_error("not a rooted tree");
  long long gen = 1;
  for (int i = 0; i < k; ++i) gen *= d_;
  return static_cast<int>(gen);
}

int GraphSpec::tree_generation(int v) const {
  if (kind_ != GraphKind::RootedTree) throw std::logic_error("not a rooted tree");
  int k = 0;
  while (tree_generation_begin(k + 1) <= v && k < depth_) ++k;
  return k;
}

int GraphSpec::tree_parent(int v) const {
  int k = tree_generation(v);
  if (k == 0) return -1;
  int slot = v - tree_generation_begin(k);
  return tree_generation_begin(k - 1) + slot / d_;
}

std::vector<int> GraphSpec::tree_children(int v) const {
  int k = tree_generation(v);
  if (k >= depth_) return {};
  int slot = v - tree_generation_begin(k);
  std::vector<int> kids(d_);
  for (int j = 0; j < d_; ++j) kids[j] = tree_generation_begin(k + 1) + slot * d_ + j;
  return kids;
}

}  // namespace coordsim

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace coordsim {

enum class GraphKind { Complete, Line, Grid, Torus, RootedTree, Explicit };

const char* graph_kind_name(GraphKind kind);

// Finite interaction graph. Vertices are dense indices 0..size()-1; label(v)
// renders the domain name (grid coordinates, tree (generation, slot), or the
// stored name for explicit graphs).
class GraphSpec {
 public:
  static GraphSpec complete(int n);
  static GraphSpec line(int n);
  static GraphSpec grid(int K, int d);
  static GraphSpec torus(int K, int d);
  // d-uniform rooted tree: one root, every vertex down to `depth`-1
  // generations has exactly d children. Vertices are generation-major.
  static GraphSpec rooted_tree(int d, int depth);
  static GraphSpec explicit_edges(int n, std::vector<std::pair<int, int>> edges,
                                  std::vector<std::string> labels = {});

  GraphKind kind() const { return kind_; }
  int size() const { return static_cast<int>(adjacency_.size()); }
  const std::vector<int>& neighbors(int v) const { return adjacency_.at(v); }
  int degree(int v) const { return static_cast<int>(adjacency_.at(v).size()); }
  bool adjacent(int v, int u) const;
  bool connected() const;
  std::string label(int v) const;

  // Grid / torus coordinates, each in [0, K).
  int grid_K() const { return K_; }
  int grid_d() const { return d_; }
  std::vector<int> grid_coords(int v) const;
  int grid_index(const std::vector<int>& coords) const;

  // Rooted-tree structure.
  int tree_fanout() const { return d_; }
  int tree_depth() const { return depth_; }
  int tree_generation(int v) const;
  int tree_parent(int v) const;                // -1 at the root
  std::vector<int> tree_children(int v) const; // empty at the last generation
  int tree_generation_begin(int k) const;
  int tree_generation_size(int k) const;

 private:
  GraphSpec() = default;
  static GraphSpec box(int K, int d, bool periodic);
  void add_edge(int a, int b);

  GraphKind kind_ = GraphKind::Explicit;
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::string> labels_;
  int K_ = 0, d_ = 0, depth_ = 0;
};

}  // namespace coordsim

#pragma once

#include <utility>
#include <vector>

namespace upmclp {

// Absolute tolerance for all distance comparisons in this module.
inline constexpr double kDistTol = 1e-9;

struct Edge {
  int k = 0;               // endpoint, 0-based
  int q = 0;               // endpoint, 0-based
  double length = 0.0;     // l_e > 0
  double max_reduction = 0.0;  // u_e, 0 <= u_e < l_e
  double unit_cost = 0.0;  // c_e >= 0
};

// Undirected network. Edge identity is the index into edges(); the induced
// arc set has two arcs per edge: arc 2e runs k->q, arc 2e+1 runs q->k.
// Immutable after construction.
class Network {
 public:
  Network() = default;  // empty placeholder; real networks use the main ctor
  Network(int node_count, std::vector<Edge> edges);

  int node_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int arc_count() const { return 2 * edge_count(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }

  static int arc_edge(int a) { return a / 2; }
  int arc_tail(int a) const { return (a % 2) == 0 ? edges_[a / 2].k : edges_[a / 2].q; }
  int arc_head(int a) const { return (a % 2) == 0 ? edges_[a / 2].q : edges_[a / 2].k; }

  // (edge index, neighbor) pairs for node i.
  const std::vector<std::pair<int, int>>& adjacency(int i) const;
  int degree(int i) const { return static_cast<int>(adjacency(i).size()); }

  // (outgoing arcs, incoming arcs). Throws std::out_of_range on a bad index.
  std::pair<std::vector<int>, std::vector<int>> incident_arcs(int i) const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
};

// Symmetric all-pairs distance matrix, +inf for unreachable pairs.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(int n);

  int size() const { return n_; }
  double operator()(int i, int j) const { return d_[static_cast<std::size_t>(i) * n_ + j]; }
  double& at(int i, int j) { return d_[static_cast<std::size_t>(i) * n_ + j]; }
  bool reachable(int i, int j) const;
  double* row(int i) { return d_.data() + static_cast<std::size_t>(i) * n_; }
  const double* row(int i) const { return d_.data() + static_cast<std::size_t>(i) * n_; }

 private:
  int n_ = 0;
  std::vector<double> d_;
};

// All-pairs shortest distances via Floyd-Warshall under lengths l_e
// (use_full_upgrade = false) or l_e - u_e (true).
DistanceMatrix shortest_distances(const Network& net, bool use_full_upgrade);

// Same, under caller-supplied per-edge lengths (e.g. l_e - delta_e).
DistanceMatrix shortest_distances(const Network& net, const std::vector<double>& edge_lengths);

// Single-source shortest distances (Dijkstra) under per-edge lengths.
std::vector<double> single_source_distances(const Network& net,
                                            const std::vector<double>& edge_lengths, int source);

}  // namespace upmclp

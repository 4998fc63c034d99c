#include "upmclp/graph.hpp"

#include <limits>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

#include "upmclp/kernels.hpp"

namespace upmclp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Network::Network(int node_count, std::vector<Edge> edges)
    : n_(node_count), edges_(std::move(edges)) {
  if (n_ <= 0) throw std::invalid_argument("network needs at least one node");
  std::set<std::pair<int, int>> seen;
  adj_.resize(n_);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.k < 0 || ed.k >= n_ || ed.q < 0 || ed.q >= n_)
      throw std::invalid_argument("edge " + std::to_string(e) + ": endpoint out of range");
    if (ed.k == ed.q) throw std::invalid_argument("edge " + std::to_string(e) + ": self-loop");
    if (!(ed.length > 0.0))
      throw std::invalid_argument("edge " + std::to_string(e) + ": length must be positive");
    if (ed.max_reduction < 0.0 || ed.max_reduction >= ed.length)
      throw std::invalid_argument("edge " + std::to_string(e) + ": need 0 <= u < l");
    if (ed.unit_cost < 0.0)
      throw std::invalid_argument("edge " + std::to_string(e) + ": negative unit cost");
    auto key = std::minmax(ed.k, ed.q);
    if (!seen.insert(key).second)
      throw std::invalid_argument("edge " + std::to_string(e) + ": duplicate edge");
    adj_[ed.k].push_back({static_cast<int>(e), ed.q});
    adj_[ed.q].push_back({static_cast<int>(e), ed.k});
  }
}

const std::vector<std::pair<int, int>>& Network::adjacency(int i) const {
  if (i < 0 || i >= n_) throw std::out_of_range("node index out of range");
  return adj_[i];
}

std::pair<std::vector<int>, std::vector<int>> Network::incident_arcs(int i) const {
  const auto& adj = adjacency(i);
  std::vector<int> out, in;
  out.reserve(adj.size());
  in.reserve(adj.size());
  for (const auto& [e, nb] : adj) {
    const bool is_k = edges_[e].k == i;
    out.push_back(2 * e + (is_k ? 0 : 1));
    in.push_back(2 * e + (is_k ? 1 : 0));
  }
  return {std::move(out), std::move(in)};
}

DistanceMatrix::DistanceMatrix(int n) : n_(n), d_(static_cast<std::size_t>(n) * n, kInf) {
  for (int i = 0; i < n; ++i) at(i, i) = 0.0;
}

bool DistanceMatrix::reachable(int i, int j) const { return (*this)(i, j) < kInf; }

DistanceMatrix shortest_distances(const Network& net, const std::vector<double>& edge_lengths) {
  const int n = net.node_count();
  DistanceMatrix d(n);
  for (int e = 0; e < net.edge_count(); ++e) {
    const Edge& ed = net.edge(e);
    const double len = edge_lengths[e];
    if (len < d(ed.k, ed.q)) {
      d.at(ed.k, ed.q) = len;
      d.at(ed.q, ed.k) = len;
    }
  }
  for (int k = 0; k < n; ++k) {
    const double* rk = d.row(k);
    for (int i = 0; i < n; ++i) {
      const double dik = d(i, k);
      if (dik == kInf) continue;
      kernels::minplus_relax(d.row(i), rk, dik, static_cast<std::size_t>(n));
    }
  }
  return d;
}

DistanceMatrix shortest_distances(const Network& net, bool use_full_upgrade) {
  std::vector<double> len(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e) {
    const Edge& ed = net.edge(e);
    len[e] = use_full_upgrade ? ed.length - ed.max_reduction : ed.length;
  }
  return shortest_distances(net, len);
}

std::vector<double> single_source_distances(const Network& net,
                                            const std::vector<double>& edge_lengths, int source) {
  const int n = net.node_count();
  std::vector<double> dist(n, kInf);
  dist[source] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    for (const auto& [e, v] : net.adjacency(u)) {
      const double cand = du + edge_lengths[e];
      if (cand < dist[v]) {
        dist[v] = cand;
        heap.push({cand, v});
      }
    }
  }
  return dist;
}

}  // namespace upmclp

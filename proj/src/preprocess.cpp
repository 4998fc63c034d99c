#include "upmclp/preprocess.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace upmclp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStrict = 1e-9;  // a > b means a > b + kStrict
}

const char* to_string(PairStatusKind k) {
  switch (k) {
    case PairStatusKind::AlwaysCovered: return "always";
    case PairStatusKind::NeverCovered: return "never";
    case PairStatusKind::Undecided: return "undecided";
  }
  return "?";
}

const char* to_string(PairCondition c) {
  switch (c) {
    case PairCondition::None: return "";
    case PairCondition::CondI: return "i";
    case PairCondition::CondII: return "ii";
    case PairCondition::CondIII: return "iii";
    case PairCondition::CondIV: return "iv";
  }
  return "?";
}

PreprocessReport::PreprocessReport(int n, DistanceMatrix d, DistanceMatrix d_u)
    : n_(n), d_(std::move(d)), d_u_(std::move(d_u)) {
  const std::size_t pairs = static_cast<std::size_t>(n) * (n - 1) / 2;
  status_.resize(pairs);
  lb_.resize(pairs, 0.0);
}

std::size_t PreprocessReport::pair_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  // row-major upper triangle
  return static_cast<std::size_t>(i) * n_ - static_cast<std::size_t>(i) * (i + 1) / 2 + (j - i - 1);
}

void PreprocessReport::set(int i, int j, PairStatus s, double lb) {
  status_[pair_index(i, j)] = s;
  lb_[pair_index(i, j)] = lb;
}

std::vector<int> PreprocessReport::covered_before(int i, double R) const {
  std::vector<int> out;
  for (int j = 0; j < n_; ++j)
    if (j != i && d_(i, j) <= R + kDistTol) out.push_back(j);
  return out;
}

bool condition_i(int i, int j, const DistanceMatrix& d, const Network& net, double R) {
  double total_u = 0.0;
  for (const Edge& e : net.edges()) total_u += e.max_reduction;
  return d(i, j) > R + total_u + kStrict;
}

bool condition_ii(int i, int j, const DistanceMatrix& d_u, double R) {
  return d_u(i, j) > R + kStrict;
}

bool condition_iii(int i, int j, const DistanceMatrix& d, const Network& net, double B, double R) {
  // spend the budget on the cheapest unit costs; fractional knapsack bound on
  // the total attainable reduction anywhere in the network
  std::vector<int> order(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e) order[e] = e;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return net.edge(a).unit_cost < net.edge(b).unit_cost;
  });
  double reduction = 0.0;
  double spent = 0.0;
  std::size_t t = 0;
  for (; t < order.size(); ++t) {
    const Edge& e = net.edge(order[t]);
    if (spent + e.unit_cost * e.max_reduction > B + 1e-12) break;
    spent += e.unit_cost * e.max_reduction;
    reduction += e.max_reduction;
  }
  if (t < order.size()) {
    const double c_next = net.edge(order[t]).unit_cost;
    if (c_next > 0) reduction += (B - spent) / c_next;
    // c_next == 0 cannot happen: zero-cost edges always fit the prefix
  }
  return d(i, j) > R + reduction + kStrict;
}

MilpModel build_dmip_lp(int i, int j, const Network& net, double B) {
  if (i == j) throw std::invalid_argument("build_dmip_lp: i == j");
  MilpModel m;
  const int narcs = net.arc_count();
  std::vector<int> f(narcs), gam(narcs), del(net.edge_count());
  for (int a = 0; a < narcs; ++a)
    f[a] = m.add_variable("f_" + std::to_string(a), 0.0, 1.0, VarKind::Continuous);
  for (int a = 0; a < narcs; ++a)
    gam[a] = m.add_variable("gam_" + std::to_string(a), 0.0,
                            net.edge(Network::arc_edge(a)).max_reduction, VarKind::Continuous);
  for (int e = 0; e < net.edge_count(); ++e)
    del[e] = m.add_variable("del_" + std::to_string(e), 0.0, net.edge(e).max_reduction,
                            VarKind::Continuous);

  std::vector<std::pair<int, double>> obj;
  for (int a = 0; a < narcs; ++a) {
    obj.push_back({f[a], net.edge(Network::arc_edge(a)).length});
    obj.push_back({gam[a], -1.0});
  }
  m.set_objective(ObjSense::Minimize, std::move(obj));

  std::vector<std::pair<int, double>> budget;
  for (int e = 0; e < net.edge_count(); ++e) budget.push_back({del[e], net.edge(e).unit_cost});
  m.add_constraint(std::move(budget), Sense::LE, B, "budget");

  for (int k = 0; k < net.node_count(); ++k) {
    const auto [out_arcs, in_arcs] = net.incident_arcs(k);
    std::vector<std::pair<int, double>> terms;
    for (int a : out_arcs) terms.push_back({f[a], 1.0});
    for (int a : in_arcs) terms.push_back({f[a], -1.0});
    const double g = k == i ? 1.0 : (k == j ? -1.0 : 0.0);
    m.add_constraint(std::move(terms), Sense::EQ, g, "flow_" + std::to_string(k));
  }
  for (int a = 0; a < narcs; ++a) {
    const Edge& e = net.edge(Network::arc_edge(a));
    m.add_constraint({{gam[a], 1.0}, {f[a], -e.max_reduction}}, Sense::LE, 0.0);
    m.add_constraint({{gam[a], 1.0}, {del[Network::arc_edge(a)], -1.0}}, Sense::LE, 0.0);
  }
  return m;
}

namespace {

struct PathResult {
  double dist = kInf;
  std::vector<int> edges;
};

PathResult dijkstra_path(const Network& net, const std::vector<double>& len, int s, int t) {
  const int n = net.node_count();
  std::vector<double> dist(n, kInf);
  std::vector<int> via_edge(n, -1), via_node(n, -1);
  dist[s] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.push({0.0, s});
  while (!heap.empty()) {
    auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    if (u == t) break;
    for (const auto& [e, v] : net.adjacency(u)) {
      const double cand = du + len[e];
      if (cand < dist[v]) {
        dist[v] = cand;
        via_edge[v] = e;
        via_node[v] = u;
        heap.push({cand, v});
      }
    }
  }
  PathResult res;
  res.dist = dist[t];
  if (res.dist < kInf)
    for (int v = t; v != s; v = via_node[v]) res.edges.push_back(via_edge[v]);
  return res;
}

}  // namespace

double dmip_lp_value_parametric(const Network& net, double B, int i, int j) {
  const int m = net.edge_count();
  std::vector<double> len(m);
  const auto lengths_at = [&](double lambda) {
    for (int e = 0; e < m; ++e) {
      const Edge& ed = net.edge(e);
      const double active = std::max(0.0, 1.0 - lambda * ed.unit_cost);
      len[e] = ed.length - ed.max_reduction * active;
    }
  };
  struct Eval {
    double value;  // L(lambda) = d_lambda(i,j) - lambda*B
    double slope;  // sum of c*u over discount-active path edges, minus B
  };
  // interval_hi: discounts with 1/c_e > lambda stay active on (lambda, hi)
  const auto eval = [&](double lambda, double interval_hi) -> Eval {
    lengths_at(lambda);
    const PathResult pr = dijkstra_path(net, len, i, j);
    if (pr.dist == kInf) return {kInf, 0.0};
    double slope = -B;
    for (int e : pr.edges) {
      const Edge& ed = net.edge(e);
      if (ed.unit_cost == 0.0 || 1.0 / ed.unit_cost >= interval_hi - 1e-15)
        slope += ed.unit_cost * ed.max_reduction;
    }
    return {pr.dist - lambda * B, slope};
  };

  std::vector<double> grid = {0.0};
  for (const Edge& ed : net.edges())
    if (ed.unit_cost > 0.0) grid.push_back(1.0 / ed.unit_cost);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-15; }),
             grid.end());

  double best = eval(grid.back(), grid.back()).value;  // all discounts priced out
  if (best == kInf) return kInf;

  // L is concave piecewise linear; within each grid interval every path's
  // contribution is linear in lambda, so chase line intersections.
  for (std::size_t t = 0; t + 1 < grid.size(); ++t) {
    double a = grid[t], b = grid[t + 1];
    Eval ea = eval(a, b), eb = eval(b, b);
    best = std::max({best, ea.value, eb.value});
    for (int guard = 0; guard < 200; ++guard) {
      if (ea.slope <= 1e-15 || eb.slope >= -1e-15 || b - a < 1e-15) break;
      // intersection of the two supporting lines
      double x = (eb.value - ea.value + ea.slope * a - eb.slope * b) / (ea.slope - eb.slope);
      if (!(x > a + 1e-15 && x < b - 1e-15)) break;
      const Eval ex = eval(x, grid[t + 1]);
      best = std::max(best, ex.value);
      const double predicted = ea.value + ea.slope * (x - a);
      if (ex.value >= predicted - 1e-12) break;  // apex of the envelope found
      if (ex.slope > 1e-15) { a = x; ea = ex; }
      else if (ex.slope < -1e-15) { b = x; eb = ex; }
      else break;
    }
  }
  return best;
}

double dmip_exact_by_paths(const Network& net, double B, int i, int j) {
  // value of a path = l-length minus the best budget-feasible reduction,
  // a fractional knapsack over the path's edges by ascending unit cost
  const auto path_value = [&](const std::vector<int>& edges) {
    double total = 0.0;
    std::vector<int> order(edges);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return net.edge(a).unit_cost < net.edge(b).unit_cost;
    });
    double spent = 0.0, reduction = 0.0;
    for (int e : order) {
      const Edge& ed = net.edge(e);
      total += ed.length;
      const double cost = ed.unit_cost * ed.max_reduction;
      if (spent + cost <= B + 1e-12) {
        spent += cost;
        reduction += ed.max_reduction;
      } else if (ed.unit_cost > 0) {
        reduction += (B - spent) / ed.unit_cost;
        spent = B;
      }
    }
    return total - reduction;
  };

  double best = kInf;
  std::vector<char> used(net.node_count(), 0);
  std::vector<int> stack;
  used[i] = 1;
  const auto dfs = [&](auto&& self, int u, double floor_len) -> void {
    if (u == j) {
      best = std::min(best, path_value(stack));
      return;
    }
    for (const auto& [e, v] : net.adjacency(u)) {
      if (used[v]) continue;
      const Edge& ed = net.edge(e);
      const double fl = floor_len + ed.length - ed.max_reduction;
      if (fl >= best - 1e-15) continue;  // path value >= sum of l-u
      used[v] = 1;
      stack.push_back(e);
      self(self, v, fl);
      stack.pop_back();
      used[v] = 0;
    }
  };
  dfs(dfs, i, 0.0);
  return best;
}

PreprocessReport classify_pairs(const Instance& inst, const PreprocessOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Network& net = inst.net;
  const int n = net.node_count();
  PreprocessReport report(n, shortest_distances(net, false), shortest_distances(net, true));
  const DistanceMatrix& d = report.dist();
  const DistanceMatrix& d_u = report.dist_full_upgrade();

  // condition i's bound is pair-independent; precompute once
  double total_u = 0.0;
  for (const Edge& e : net.edges()) total_u += e.max_reduction;

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (d(i, j) <= inst.R + kDistTol) {
        report.set(i, j, {PairStatusKind::AlwaysCovered, PairCondition::None}, d_u(i, j));
        continue;
      }
      PairCondition hit = PairCondition::None;
      if (opts.cond_i && d(i, j) > inst.R + total_u + kStrict) hit = PairCondition::CondI;
      else if (opts.cond_ii && condition_ii(i, j, d_u, inst.R)) hit = PairCondition::CondII;
      else if (opts.cond_iii && condition_iii(i, j, d, net, inst.B, inst.R)) hit = PairCondition::CondIII;
      if (hit != PairCondition::None) {
        report.set(i, j, {PairStatusKind::NeverCovered, hit}, d_u(i, j));
        continue;
      }
      double lb = d_u(i, j);
      if (opts.cond_iv) {
        double bound = kInf;
        if (opts.exact_subproblem) {
          bound = dmip_exact_by_paths(net, inst.B, i, j);
        } else if (opts.lp_mode == PreprocessOptions::LpMode::Parametric) {
          bound = dmip_lp_value_parametric(net, inst.B, i, j);
        } else {
          const SolveResult lp = solve_lp(build_dmip_lp(i, j, net, inst.B));
          if (lp.status == SolveStatus::Optimal) {
            bound = lp.objective;
          } else if (lp.status == SolveStatus::Infeasible) {
            bound = kInf;
          } else {
            report.warnings.push_back("pair (" + std::to_string(i + 1) + "," +
                                      std::to_string(j + 1) + "): LP " +
                                      to_string(lp.status) + ", kept undecided");
            report.set(i, j, {PairStatusKind::Undecided, PairCondition::None}, lb);
            continue;
          }
        }
        lb = std::max(lb, bound);
      }
      if (lb > inst.R + kStrict)
        report.set(i, j, {PairStatusKind::NeverCovered, PairCondition::CondIV}, lb);
      else
        report.set(i, j, {PairStatusKind::Undecided, PairCondition::None}, lb);
    }
  }
  report.elapsed_pre =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_report_csv(const PreprocessReport& report, std::ostream& out) {
  out << "pair_i,pair_j,status,reason,lb_upgraded\n";
  const int n = report.node_count();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const PairStatus s = report.status(i, j);
      out << i + 1 << ',' << j + 1 << ',' << to_string(s.kind) << ',' << to_string(s.reason)
          << ',';
      const double lb = report.lb_upgraded(i, j);
      if (lb == std::numeric_limits<double>::infinity()) out << "inf";
      else {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.9g", lb);
        out << buf;
      }
      out << '\n';
    }
}

}  // namespace upmclp

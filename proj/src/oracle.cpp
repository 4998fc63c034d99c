#include "upmclp/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "upmclp/milp.hpp"

namespace upmclp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<int> verify_solution(const Instance& inst, const UpMclpSolution& sol) {
  const Network& net = inst.net;
  if (static_cast<int>(sol.facilities.size()) != inst.p)
    throw std::logic_error("solution invariant violated: |X_p| = p");
  for (int f : sol.facilities)
    if (f < 0 || f >= net.node_count())
      throw std::logic_error("solution invariant violated: facility index range");
  if (static_cast<int>(sol.delta.size()) != net.edge_count())
    throw std::logic_error("solution invariant violated: delta size");
  double cost = 0.0;
  std::vector<double> len(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e) {
    const Edge& ed = net.edge(e);
    if (sol.delta[e] < -1e-9 || sol.delta[e] > ed.max_reduction + 1e-9)
      throw std::logic_error("solution invariant violated: 0 <= delta_e <= u_e");
    cost += ed.unit_cost * sol.delta[e];
    len[e] = ed.length - sol.delta[e];
  }
  if (cost > inst.B + 1e-6) throw std::logic_error("solution invariant violated: budget");

  const DistanceMatrix d = shortest_distances(net, len);
  std::vector<int> covered;
  for (int i = 0; i < net.node_count(); ++i) {
    double nearest = kInf;
    for (int f : sol.facilities) nearest = std::min(nearest, d(i, f));
    if (nearest <= inst.R + 1e-6) covered.push_back(i);
  }
  for (int i : sol.covered)
    if (!std::binary_search(covered.begin(), covered.end(), i))
      throw std::logic_error("solution invariant violated: claimed node not covered");
  double value = 0.0;
  for (int i : covered) value += inst.demands[i];
  if (std::abs(value - sol.objective) > 1e-6)
    throw std::logic_error("solution invariant violated: objective equals covered weight");
  return covered;
}

std::pair<double, std::vector<int>> solve_mclp_exact(const Instance& inst,
                                                     const OracleLimits& limits) {
  const int n = inst.net.node_count();
  const int p = inst.p;
  if (n > 62) throw std::invalid_argument("solve_mclp_exact: n > 62");
  double sets = 1.0;
  for (int t = 0; t < p; ++t) sets = sets * (n - t) / (t + 1);
  const double cap = limits.max_cover_subsets < 0 ? std::ldexp(1.0, n)
                                                  : static_cast<double>(limits.max_cover_subsets);
  if (sets > cap)
    throw std::runtime_error("solve_mclp_exact: C(n,p) = " + std::to_string(sets) +
                             " exceeds the subset limit");

  const DistanceMatrix d = shortest_distances(inst.net, false);
  std::vector<std::uint64_t> cover(n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (d(i, j) <= inst.R + kDistTol) cover[j] |= 1ULL << i;

  std::vector<int> pick(p);
  for (int t = 0; t < p; ++t) pick[t] = t;
  double best = -1.0;
  std::vector<int> best_set;
  while (true) {
    std::uint64_t mask = 0;
    for (int t = 0; t < p; ++t) mask |= cover[pick[t]];
    double val = 0.0;
    for (std::uint64_t m = mask; m; m &= m - 1) val += inst.demands[__builtin_ctzll(m)];
    if (val > best + 1e-12) {  // lex order of enumeration keeps the smallest optimum
      best = val;
      best_set = pick;
    }
    int t = p - 1;
    while (t >= 0 && pick[t] == n - p + t) --t;
    if (t < 0) break;
    ++pick[t];
    for (int s = t + 1; s < p; ++s) pick[s] = pick[s - 1] + 1;
  }
  return {best, best_set};
}

namespace {

struct Certificate {
  int node;
  std::vector<int> edges;  // sorted edge ids
  double needed;           // reduction required to reach length R
};

// all simple paths from s into the facility set with full-upgrade length <= R
void enumerate_certificates(const Network& net, const std::vector<char>& is_facility, int s,
                            double R, int cap, std::vector<Certificate>& out) {
  std::vector<char> used(net.node_count(), 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> edge_sets;
  used[s] = 1;
  int count = 0;
  const auto dfs = [&](auto&& self, int u, double len_floor, double len_full) -> void {
    if (is_facility[u]) {
      std::vector<int> key(stack);
      std::sort(key.begin(), key.end());
      if (std::find(edge_sets.begin(), edge_sets.end(), key) == edge_sets.end()) {
        edge_sets.push_back(key);
        out.push_back({s, key, len_full - R});
        ++count;
      }
      return;  // any continuation only lengthens the path
    }
    for (const auto& [e, v] : net.adjacency(u)) {
      if (used[v] || count >= cap) continue;
      const Edge& ed = net.edge(e);
      if (len_floor + ed.length - ed.max_reduction > R + 1e-9) continue;
      used[v] = 1;
      stack.push_back(e);
      self(self, v, len_floor + ed.length - ed.max_reduction, len_full + ed.length);
      stack.pop_back();
      used[v] = 0;
    }
  };
  dfs(dfs, s, 0.0, 0.0);
  if (count >= cap)
    throw std::runtime_error("solve_upmclp_exact: certificate count for node " +
                             std::to_string(s + 1) + " hit the limit of " + std::to_string(cap));
}

// min-cost reduction meeting all chosen path rows; feasible iff cost <= B
struct ReductionLp {
  const Network* net;
  double B;

  // returns (feasible, delta) for the given certificates
  std::pair<bool, std::vector<double>> check(const std::vector<const Certificate*>& rows) const {
    MilpModel m;
    std::vector<int> del(net->edge_count(), -1);
    std::vector<std::pair<int, double>> obj;
    for (const Certificate* c : rows)
      for (int e : c->edges)
        if (del[e] < 0) {
          del[e] = m.add_variable("d" + std::to_string(e), 0.0, net->edge(e).max_reduction,
                                  VarKind::Continuous);
          obj.push_back({del[e], net->edge(e).unit_cost});
        }
    m.set_objective(ObjSense::Minimize, obj);
    for (const Certificate* c : rows) {
      if (c->needed <= 1e-12) continue;
      std::vector<std::pair<int, double>> terms;
      for (int e : c->edges) terms.push_back({del[e], 1.0});
      m.add_constraint(std::move(terms), Sense::GE, c->needed);
    }
    const SolveResult r = solve_lp(m);
    if (r.status != SolveStatus::Optimal || r.objective > B + 1e-9) return {false, {}};
    std::vector<double> delta(net->edge_count(), 0.0);
    for (int e = 0; e < net->edge_count(); ++e)
      if (del[e] >= 0) delta[e] = std::max(0.0, r.values[del[e]]);
    return {true, std::move(delta)};
  }
};

}  // namespace

double mclp_value_via_mip(const Instance& inst, double R) {
  const int n = inst.net.node_count();
  const DistanceMatrix d = shortest_distances(inst.net, false);
  MilpModel m;
  std::vector<int> x(n), cov(n);
  for (int j = 0; j < n; ++j)
    x[j] = m.add_variable("x" + std::to_string(j), 0.0, 1.0, VarKind::Binary);
  for (int i = 0; i < n; ++i)
    cov[i] = m.add_variable("c" + std::to_string(i), 0.0, 1.0, VarKind::Continuous);
  std::vector<std::pair<int, double>> obj, card;
  for (int i = 0; i < n; ++i) obj.push_back({cov[i], inst.demands[i]});
  m.set_objective(ObjSense::Maximize, std::move(obj));
  for (int j = 0; j < n; ++j) card.push_back({x[j], 1.0});
  m.add_constraint(std::move(card), Sense::EQ, inst.p);
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> terms{{cov[i], 1.0}};
    for (int j = 0; j < n; ++j)
      if (d(i, j) <= R + kDistTol) terms.push_back({x[j], -1.0});
    m.add_constraint(std::move(terms), Sense::LE, 0.0);
  }
  const SolveResult res = solve_mip(m);
  if (res.status != SolveStatus::Optimal)
    throw std::runtime_error("mclp_value_via_mip: solve ended " +
                             std::string(to_string(res.status)));
  return res.objective;
}

UpMclpSolution solve_upmclp_exact(const Instance& inst, const OracleLimits& limits) {
  const auto t0 = std::chrono::steady_clock::now();
  const Network& net = inst.net;
  const int n = net.node_count();
  const int p = inst.p;
  if (n > limits.max_nodes)
    throw std::invalid_argument("solve_upmclp_exact: n = " + std::to_string(n) + " exceeds " +
                                std::to_string(limits.max_nodes));

  const DistanceMatrix d = shortest_distances(net, false);
  const ReductionLp lp{&net, inst.B};

  double best = -1.0;
  std::vector<int> best_set;
  std::vector<double> best_delta;

  std::vector<int> pick(p);
  for (int t = 0; t < p; ++t) pick[t] = t;
  while (true) {
    std::vector<char> is_fac(n, 0);
    for (int t = 0; t < p; ++t) is_fac[pick[t]] = 1;

    double base = 0.0;
    std::vector<int> open;  // not covered for free, by weight descending
    for (int i = 0; i < n; ++i) {
      double nearest = kInf;
      for (int t = 0; t < p; ++t) nearest = std::min(nearest, d(i, pick[t]));
      if (nearest <= inst.R + kDistTol) base += inst.demands[i];
      else open.push_back(i);
    }
    std::stable_sort(open.begin(), open.end(),
                     [&](int a, int b) { return inst.demands[a] > inst.demands[b]; });

    std::vector<std::vector<Certificate>> certs(open.size());
    double potential = base;
    for (std::size_t t = 0; t < open.size(); ++t) {
      enumerate_certificates(net, is_fac, open[t], inst.R, limits.max_paths_per_pair, certs[t]);
      // drop certificates that cannot be afforded even alone
      std::vector<const Certificate*> single(1);
      std::erase_if(certs[t], [&](const Certificate& c) {
        single[0] = &c;
        return !lp.check(single).first;
      });
      if (!certs[t].empty()) potential += inst.demands[open[t]];
    }
    if (potential > best + 1e-12) {
      std::vector<double> suffix(open.size() + 1, 0.0);
      for (int t = static_cast<int>(open.size()) - 1; t >= 0; --t)
        suffix[t] = suffix[t + 1] + (certs[t].empty() ? 0.0 : inst.demands[open[t]]);

      std::vector<const Certificate*> chosen;
      std::vector<double> cur_delta(net.edge_count(), 0.0);
      const auto dfs = [&](auto&& self, std::size_t t, double value) -> void {
        if (value + suffix[t] <= best + 1e-12) return;
        if (t == open.size()) {
          if (value > best + 1e-12) {
            const auto [ok, delta] = lp.check(chosen);
            if (ok) {
              best = value;
              best_set.assign(pick.begin(), pick.end());
              best_delta = delta;
            }
          }
          return;
        }
        for (const Certificate& c : certs[t]) {
          chosen.push_back(&c);
          if (lp.check(chosen).first)
            self(self, t + 1, value + inst.demands[open[t]]);
          chosen.pop_back();
        }
        self(self, t + 1, value);  // leave open[t] uncovered
      };
      dfs(dfs, 0, base);
    }

    int t = p - 1;
    while (t >= 0 && pick[t] == n - p + t) --t;
    if (t < 0) break;
    ++pick[t];
    for (int s = t + 1; s < p; ++s) pick[s] = pick[s - 1] + 1;
  }

  UpMclpSolution sol;
  sol.facilities = best_set;
  sol.delta = best_delta.empty() ? std::vector<double>(net.edge_count(), 0.0) : best_delta;
  sol.stats.status = "Optimal";
  sol.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // recompute coverage from delta, then run the invariant checks
  std::vector<double> len(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e) len[e] = net.edge(e).length - sol.delta[e];
  const DistanceMatrix dd = shortest_distances(net, len);
  sol.objective = 0.0;
  for (int i = 0; i < n; ++i) {
    double nearest = kInf;
    for (int f : sol.facilities) nearest = std::min(nearest, dd(i, f));
    if (nearest <= inst.R + 1e-6) {
      sol.covered.push_back(i);
      sol.objective += inst.demands[i];
    }
  }
  verify_solution(inst, sol);
  return sol;
}

}  // namespace upmclp

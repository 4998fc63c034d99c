#pragma once

// Test-only oracles and fixtures. Everything here is deliberately brute
// force and independent of the implementation paths it checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "upmclp/graph.hpp"
#include "upmclp/instance.hpp"
#include "upmclp/milp.hpp"

namespace testing_oracles {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest distance by enumerating every simple path.
inline double dist_by_path_enumeration(const upmclp::Network& net,
                                       const std::vector<double>& len, int s, int t) {
  double best = s == t ? 0.0 : kInf;
  std::vector<char> used(net.node_count(), 0);
  used[s] = 1;
  const auto dfs = [&](auto&& self, int u, double acc) -> void {
    if (u == t) {
      best = std::min(best, acc);
      return;
    }
    for (const auto& [e, v] : net.adjacency(u)) {
      if (used[v]) continue;
      used[v] = 1;
      self(self, v, acc + len[e]);
      used[v] = 0;
    }
  };
  if (s != t) dfs(dfs, s, 0.0);
  return best;
}

// LP optimum by enumerating every basic solution of the slack-extended
// system: pick m basic columns out of structural+slack, put the rest at a
// finite bound, solve and keep the best feasible point.
inline bool lp_by_basic_enumeration(const upmclp::MilpModel& model, double* opt) {
  const int n = model.num_vars();
  const int m = model.num_constraints();
  const int N = n + m;
  std::vector<double> lb(N), ub(N);
  for (int j = 0; j < n; ++j) {
    lb[j] = model.var(j).lb;
    ub[j] = model.var(j).ub;
  }
  for (int i = 0; i < m; ++i) {
    switch (model.row(i).sense) {
      case upmclp::Sense::LE: lb[n + i] = 0; ub[n + i] = kInf; break;
      case upmclp::Sense::GE: lb[n + i] = -kInf; ub[n + i] = 0; break;
      case upmclp::Sense::EQ: lb[n + i] = 0; ub[n + i] = 0; break;
    }
  }
  std::vector<std::vector<double>> A(m, std::vector<double>(N, 0.0));
  std::vector<double> b(m);
  for (int i = 0; i < m; ++i) {
    for (const auto& [j, c] : model.row(i).terms) A[i][j] += c;
    A[i][n + i] = 1.0;
    b[i] = model.row(i).rhs;
  }
  const bool maximize = model.objective_sense() == upmclp::ObjSense::Maximize;

  bool found = false;
  double best = 0.0;
  std::vector<int> pick;
  const auto evaluate_basis = [&](const std::vector<int>& basic) {
    std::vector<char> is_basic(N, 0);
    for (int j : basic) is_basic[j] = 1;
    // enumerate bound choices for nonbasic columns
    std::vector<int> nonbasic;
    for (int j = 0; j < N; ++j)
      if (!is_basic[j]) nonbasic.push_back(j);
    const int k = static_cast<int>(nonbasic.size());
    for (long mask = 0; mask < (1L << k); ++mask) {
      std::vector<double> x(N, 0.0);
      bool ok = true;
      for (int t = 0; t < k && ok; ++t) {
        const int j = nonbasic[t];
        const double v = (mask >> t) & 1 ? ub[j] : lb[j];
        if (!std::isfinite(v)) ok = false;
        x[j] = v;
      }
      if (!ok) continue;
      // solve for the basic part by Gaussian elimination
      std::vector<std::vector<double>> M(m, std::vector<double>(m + 1, 0.0));
      for (int i = 0; i < m; ++i) {
        double rhs = b[i];
        for (int t = 0; t < k; ++t) rhs -= A[i][nonbasic[t]] * x[nonbasic[t]];
        for (int c = 0; c < m; ++c) M[i][c] = A[i][basic[c]];
        M[i][m] = rhs;
      }
      bool singular = false;
      for (int col = 0; col < m && !singular; ++col) {
        int piv = -1;
        double bestp = 1e-9;
        for (int r = col; r < m; ++r)
          if (std::abs(M[r][col]) > bestp) { bestp = std::abs(M[r][col]); piv = r; }
        if (piv < 0) { singular = true; break; }
        std::swap(M[piv], M[col]);
        for (int r = 0; r < m; ++r) {
          if (r == col) continue;
          const double f = M[r][col] / M[col][col];
          if (f == 0.0) continue;
          for (int c = col; c <= m; ++c) M[r][c] -= f * M[col][c];
        }
      }
      if (singular) continue;
      bool feas = true;
      for (int c = 0; c < m && feas; ++c) {
        const double v = M[c][m] / M[c][c];
        x[basic[c]] = v;
        if (v < lb[basic[c]] - 1e-7 || v > ub[basic[c]] + 1e-7) feas = false;
      }
      if (!feas) continue;
      double val = 0.0;
      for (int j = 0; j < n; ++j) val += model.objective()[j] * x[j];
      if (!found || (maximize ? val > best : val < best)) {
        found = true;
        best = val;
      }
    }
  };
  const auto rec = [&](auto&& self, int from, int need) -> void {
    if (need == 0) {
      evaluate_basis(pick);
      return;
    }
    for (int j = from; j <= N - need; ++j) {
      pick.push_back(j);
      self(self, j + 1, need - 1);
      pick.pop_back();
    }
  };
  rec(rec, 0, m);
  if (found) *opt = best;
  return found;
}

// Random boxed LP with up to 6 columns and rows; used to cross-check the
// simplex against basic-solution enumeration.
inline upmclp::MilpModel random_small_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nv(1, 6), nr(1, 6);
  std::uniform_real_distribution<double> coef(-4.0, 4.0), ub(0.5, 6.0);
  upmclp::MilpModel m;
  const int n = nv(rng);
  std::vector<std::pair<int, double>> obj;
  for (int j = 0; j < n; ++j) {
    const int v = m.add_variable("v" + std::to_string(j), 0.0, ub(rng),
                                 upmclp::VarKind::Continuous);
    obj.push_back({v, coef(rng)});
  }
  const int rows = nr(rng);
  for (int i = 0; i < rows; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < n; ++j) {
      const double c = coef(rng);
      if (std::abs(c) > 0.7) terms.push_back({j, c});
    }
    if (terms.empty()) terms.push_back({0, 1.0});
    const int pick = static_cast<int>(rng() % 3);
    const upmclp::Sense s =
        pick == 0 ? upmclp::Sense::LE : pick == 1 ? upmclp::Sense::GE : upmclp::Sense::EQ;
    m.add_constraint(std::move(terms), s, coef(rng));
  }
  m.set_objective(rng() % 2 ? upmclp::ObjSense::Maximize : upmclp::ObjSense::Minimize, obj);
  return m;
}

// Hand-checked six-node fixture with exactly one upgradable edge. The two
// heavy nodes r and s sit on opposite sides; covering everything requires
// spending the whole budget on the middle edge. Node order: i, j, k, q, r, s
// (0-based 0..5).
inline upmclp::Instance six_node_instance(double B = 0.75) {
  using upmclp::Edge;
  std::vector<Edge> edges = {
      {0, 2, 1.0, 0.0, 0.0},    // i-k
      {1, 2, 0.5, 0.0, 0.0},    // j-k
      {2, 3, 1.25, 0.75, 1.0},  // k-q
      {0, 4, 0.5, 0.0, 0.0},    // i-r
      {3, 5, 0.55, 0.0, 0.0},   // q-s
  };
  upmclp::Instance inst{upmclp::Network(6, std::move(edges)),
                        {1.0, 1.0, 1.0, 1.0, 1000.0, 1000.0},
                        2,
                        1.0,
                        B};
  return inst;
}

inline upmclp::Instance random_tiny_instance(std::mt19937_64& rng, int n_lo = 4, int n_hi = 7) {
  upmclp::GeneratorConfig cfg;
  cfg.n = n_lo + static_cast<int>(rng() % static_cast<unsigned>(n_hi - n_lo + 1));
  cfg.seed = rng();
  const double fractions[3] = {0.005, 0.01, 0.05};
  cfg.budget_fraction = fractions[rng() % 3];
  const double targets[3] = {0.5, 0.6, 0.7};
  cfg.coverage_target = targets[rng() % 3];
  cfg.p_rule = (rng() % 2) == 0 ? upmclp::PRule::One : upmclp::PRule::NOver20;
  upmclp::Instance inst = upmclp::generate_geometric(cfg);
  if ((rng() % 2) == 0) inst.p = 2;  // exercise p=2 on small n as well
  if (inst.p >= inst.net.node_count()) inst.p = 1;
  return inst;
}

}  // namespace testing_oracles

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "upmclp/milp.hpp"

// Best-bound branch and bound. Branching variable: most fractional integer
// variable, ties by lowest index. Cuts returned by the generators are valid
// for every integer-feasible point, so they are appended to the model
// globally and survive across nodes.

namespace upmclp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BbNode {
  long id = 0;
  double bound = kInf;  // parent LP value, in maximization sense
  std::vector<std::tuple<int, double, double>> overrides;  // (var, lb, ub)
};

struct NodeOrder {
  // larger bound first, then older node
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

}  // namespace

SolveResult solve_mip(const MilpModel& model, const std::vector<CutGenerator>& cuts,
                      const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const bool maximize = model.objective_sense() == ObjSense::Maximize;
  const double sign = maximize ? 1.0 : -1.0;  // node bounds stored as sign*objective

  std::vector<int> int_vars;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.var(j).kind != VarKind::Continuous) int_vars.push_back(j);

  SolveResult res;
  if (int_vars.empty()) {
    res = solve_lp(model, cfg);
    res.node_count = 1;
    res.wall_seconds = elapsed();
    return res;
  }

  MilpModel work = model;
  bool have_inc = false;
  double inc = -kInf;  // sign-adjusted incumbent value
  std::vector<double> inc_values;
  long next_id = 0;
  long nodes_done = 0;
  bool hit_limit = false;
  bool degraded = false;
  std::string message;

  std::priority_queue<BbNode, std::vector<BbNode>, NodeOrder> open;
  open.push({next_id++, kInf, {}});

  const auto prune_eps = [&] { return std::max(cfg.rel_gap * std::max(1.0, std::abs(inc)), 1e-9); };

  double open_bound_at_stop = -kInf;
  while (!open.empty()) {
    if (elapsed() > cfg.time_limit || nodes_done >= cfg.node_limit) {
      hit_limit = true;
      open_bound_at_stop = open.top().bound;
      break;
    }
    BbNode node = std::move(const_cast<BbNode&>(open.top()));
    open.pop();
    if (have_inc && node.bound <= inc + prune_eps()) {
      // best-first order: every remaining node is at least as bad
      open_bound_at_stop = std::max(inc, node.bound);
      break;
    }

    std::vector<std::tuple<int, double, double>> saved;
    saved.reserve(node.overrides.size());
    for (const auto& [j, lo, hi] : node.overrides) {
      saved.emplace_back(j, work.var(j).lb, work.var(j).ub);
      work.var(j).lb = std::max(work.var(j).lb, lo);
      work.var(j).ub = std::min(work.var(j).ub, hi);
    }
    const auto restore = [&] {
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
        const auto& [j, lo, hi] = *it;
        work.var(j).lb = lo;
        work.var(j).ub = hi;
      }
    };

    SolveResult lp;
    for (int round = 0;; ++round) {
      lp = solve_lp(work, cfg);
      if (lp.status != SolveStatus::Optimal || cuts.empty() ||
          round >= cfg.cut_rounds_per_node)
        break;
      int added = 0;
      for (const auto& gen : cuts) {
        if (added >= cfg.max_cuts_per_round) break;
        for (auto& c : gen.separate(lp.values)) {
          if (added >= cfg.max_cuts_per_round) break;
          double act = 0.0;
          for (const auto& [j, coef] : c.terms) act += coef * lp.values[j];
          const bool violated = (c.sense == Sense::LE && act > c.rhs + cfg.cut_violation_tol) ||
                                (c.sense == Sense::GE && act < c.rhs - cfg.cut_violation_tol) ||
                                (c.sense == Sense::EQ && std::abs(act - c.rhs) > cfg.cut_violation_tol);
          if (!violated) continue;
          work.add_constraint(std::move(c));
          ++res.cut_counts[gen.name];
          ++added;
        }
      }
      if (added == 0) break;
    }
    restore();
    ++nodes_done;

    if (lp.status == SolveStatus::Infeasible) continue;
    if (lp.status == SolveStatus::Unbounded) {
      res.status = SolveStatus::Unbounded;
      res.node_count = nodes_done;
      res.wall_seconds = elapsed();
      return res;
    }
    if (lp.status != SolveStatus::Optimal) {
      message = "node LP: " + std::string(to_string(lp.status)) +
                (lp.message.empty() ? "" : " (" + lp.message + ")");
      degraded = true;  // pruned without proof; infeasibility can no longer be claimed
      continue;
    }

    const double node_val = sign * lp.objective;
    if (have_inc && node_val <= inc + prune_eps()) continue;

    int branch_var = -1;
    double best_frac = cfg.int_tol;
    for (int j : int_vars) {
      const double x = lp.values[j];
      const double frac = std::abs(x - std::round(x));
      if (frac > best_frac) {
        best_frac = frac;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      if (!have_inc || node_val > inc + 1e-9) {
        have_inc = true;
        inc = node_val;
        inc_values = lp.values;
        for (int j : int_vars) inc_values[j] = std::round(inc_values[j]);
      }
      continue;
    }

    const double x = lp.values[branch_var];
    const double fl = std::floor(x + cfg.int_tol);
    auto down = node.overrides;
    down.emplace_back(branch_var, -kInf, fl);
    auto up = node.overrides;
    up.emplace_back(branch_var, fl + 1.0, kInf);
    open.push({next_id++, node_val, std::move(down)});
    open.push({next_id++, node_val, std::move(up)});
  }

  res.node_count = nodes_done;
  res.wall_seconds = elapsed();
  res.message = message;
  if (have_inc) {
    res.values = std::move(inc_values);
    res.objective = sign * inc;
    if (hit_limit || degraded) {
      double ob = inc;
      if (!open.empty()) ob = std::max(ob, open_bound_at_stop);
      res.best_bound = sign * ob;
      res.status = hit_limit || degraded ? SolveStatus::Feasible : SolveStatus::Optimal;
    } else {
      res.best_bound = res.objective;
      res.status = SolveStatus::Optimal;
    }
  } else if (hit_limit) {
    res.status = SolveStatus::Feasible;
    res.objective = -sign * kInf;
    res.best_bound = !open.empty() ? sign * open_bound_at_stop : res.objective;
  } else if (degraded) {
    // every branch was pruned, but some prunes lacked a proof
    res.status = SolveStatus::NumericalFailure;
    res.objective = -sign * kInf;
    res.best_bound = res.objective;
  } else {
    res.status = SolveStatus::Infeasible;
    res.objective = -sign * kInf;
    res.best_bound = res.objective;
  }
  return res;
}

}  // namespace upmclp

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "upmclp/kernels.hpp"
#include "upmclp/milp.hpp"

// Bounded-variable primal simplex on a dense tableau. Phase 1 introduces
// artificial columns only for rows whose slack start is out of bounds and
// minimizes their sum; phase 2 prices with Dantzig's rule and falls back to
// Bland's rule after a stall threshold of degenerate iterations.

namespace upmclp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDjTol = 1e-9;    // reduced-cost tolerance
constexpr double kPivTol = 1e-9;   // smallest usable pivot element
constexpr double kZeroTol = 1e-11;

enum class St : unsigned char { Lower, Upper, Basic, Free };

struct Tableau {
  int m = 0;       // rows
  int nstruct = 0; // structural columns
  int N = 0;       // structural + slack + artificial
  int nart = 0;
  std::vector<double> T;       // m x N
  std::vector<double> beta;    // basic values
  std::vector<double> objrow;  // reduced costs for the active cost vector
  std::vector<double> lb, ub, val, cost, rhs;
  std::vector<St> st;
  std::vector<int> basis;        // row -> column
  long iterations = 0;
  bool bland = false;
  int stall = 0;

  double* row(int i) { return T.data() + static_cast<std::size_t>(i) * N; }

  double solution(int j, const std::vector<int>& row_of) const {
    return st[j] == St::Basic ? beta[row_of[j]] : val[j];
  }

  // Re-derive the basic values from the original right-hand sides: the slack
  // block of T is the current basis inverse (the slack columns started as
  // the identity). Snaps values within tolerance onto their bounds so stale
  // round-off cannot pin the ratio test at zero steps.
  void refresh_beta(double snap_tol) {
    std::vector<int> nz;
    for (int j = 0; j < N; ++j)
      if (st[j] != St::Basic && val[j] != 0.0) nz.push_back(j);
    for (int i = 0; i < m; ++i) {
      const double* ri = row(i);
      double s = 0.0;
      for (int r = 0; r < m; ++r) s += ri[nstruct + r] * rhs[r];
      for (int j : nz) s -= ri[j] * val[j];
      const double lo = lb[basis[i]], hi = ub[basis[i]];
      if (std::isfinite(lo) && std::abs(s - lo) <= snap_tol) s = lo;
      else if (std::isfinite(hi) && std::abs(s - hi) <= snap_tol) s = hi;
      beta[i] = s;
    }
  }
};

enum class StepResult { Improved, Optimal, Unbounded };

StepResult simplex_step(Tableau& tb, int stall_threshold) {
  // entering column
  int q = -1;
  int dir = +1;
  double best = kDjTol;
  for (int j = 0; j < tb.N; ++j) {
    if (tb.st[j] == St::Basic) continue;
    const double d = tb.objrow[j];
    int cand_dir = 0;
    if (tb.st[j] == St::Lower && d < -kDjTol) cand_dir = +1;
    else if (tb.st[j] == St::Upper && d > kDjTol) cand_dir = -1;
    else if (tb.st[j] == St::Free && std::abs(d) > kDjTol) cand_dir = d < 0 ? +1 : -1;
    if (cand_dir == 0) continue;
    if (tb.bland) { q = j; dir = cand_dir; break; }
    if (std::abs(d) > best) { best = std::abs(d); q = j; dir = cand_dir; }
  }
  if (q < 0) return StepResult::Optimal;

  // ratio test
  double t = (std::isfinite(tb.lb[q]) && std::isfinite(tb.ub[q])) ? tb.ub[q] - tb.lb[q] : kInf;
  int leave = -1;           // row index, -1 = bound flip
  bool leave_at_upper = false;
  double leave_piv = 0.0;
  for (int i = 0; i < tb.m; ++i) {
    const double a = dir * tb.row(i)[q];
    double lim;
    bool to_upper;
    if (a > kPivTol) {
      const double lo = tb.lb[tb.basis[i]];
      if (!std::isfinite(lo)) continue;
      lim = (tb.beta[i] - lo) / a;
      to_upper = false;
    } else if (a < -kPivTol) {
      const double hi = tb.ub[tb.basis[i]];
      if (!std::isfinite(hi)) continue;
      lim = (hi - tb.beta[i]) / (-a);
      to_upper = true;
    } else {
      continue;
    }
    if (lim < 0) lim = 0;
    const bool tie = std::abs(lim - t) <= 1e-12;
    bool take = lim < t - 1e-12;
    if (tie && leave >= 0) {
      take = tb.bland ? tb.basis[i] < tb.basis[leave]
                      : std::abs(tb.row(i)[q]) > std::abs(leave_piv);
    } else if (tie && leave < 0 && lim <= t) {
      take = true;
    }
    if (take) {
      t = std::min(t, lim);
      leave = i;
      leave_at_upper = to_upper;
      leave_piv = tb.row(i)[q];
    }
  }

  if (leave < 0 && !std::isfinite(t)) return StepResult::Unbounded;

  ++tb.iterations;
  if (t <= kZeroTol) {
    if (++tb.stall > stall_threshold) tb.bland = true;
  } else {
    tb.stall = 0;
    tb.bland = false;  // anti-cycling rule only while the step length is stuck
  }

  if (leave < 0) {
    // bound flip, no basis change
    for (int i = 0; i < tb.m; ++i) tb.beta[i] -= dir * t * tb.row(i)[q];
    tb.st[q] = (dir > 0) ? St::Upper : St::Lower;
    tb.val[q] = (dir > 0) ? tb.ub[q] : tb.lb[q];
    return StepResult::Improved;
  }

  const double enter_val = (tb.st[q] == St::Free ? 0.0 : tb.val[q]) + dir * t;
  for (int i = 0; i < tb.m; ++i) tb.beta[i] -= dir * t * tb.row(i)[q];

  const int c = tb.basis[leave];
  tb.st[c] = leave_at_upper ? St::Upper : St::Lower;
  tb.val[c] = leave_at_upper ? tb.ub[c] : tb.lb[c];

  double* pr = tb.row(leave);
  const double piv = pr[q];
  const double inv = 1.0 / piv;
  for (int j = 0; j < tb.N; ++j) pr[j] *= inv;
  pr[q] = 1.0;  // exact
  for (int i = 0; i < tb.m; ++i) {
    if (i == leave) continue;
    double* ri = tb.row(i);
    const double f = ri[q];
    if (f != 0.0) {
      kernels::axpy(-f, pr, ri, static_cast<std::size_t>(tb.N));
      ri[q] = 0.0;
    }
  }
  const double fo = tb.objrow[q];
  if (fo != 0.0) {
    kernels::axpy(-fo, pr, tb.objrow.data(), static_cast<std::size_t>(tb.N));
    tb.objrow[q] = 0.0;
  }
  tb.basis[leave] = q;
  tb.st[q] = St::Basic;
  tb.beta[leave] = enter_val;
  return StepResult::Improved;
}

void rebuild_objrow(Tableau& tb) {
  tb.objrow = tb.cost;
  for (int i = 0; i < tb.m; ++i) {
    const double cb = tb.cost[tb.basis[i]];
    if (cb != 0.0) kernels::axpy(-cb, tb.row(i), tb.objrow.data(), static_cast<std::size_t>(tb.N));
  }
}

}  // namespace

SolveResult solve_lp(const MilpModel& model, const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res;
  const int m = model.num_constraints();
  const int n = model.num_vars();

  // quick reject on inconsistent fixed bounds
  for (int j = 0; j < n; ++j)
    if (model.var(j).lb > model.var(j).ub) {
      res.status = SolveStatus::Infeasible;
      return res;
    }

  const bool maximize = model.objective_sense() == ObjSense::Maximize;

  Tableau tb;
  tb.m = m;
  tb.nstruct = n;

  // residuals with structurals at their start bounds
  std::vector<double> start(n);
  std::vector<St> start_st(n);
  for (int j = 0; j < n; ++j) {
    const Variable& v = model.var(j);
    if (std::isfinite(v.lb)) { start[j] = v.lb; start_st[j] = St::Lower; }
    else if (std::isfinite(v.ub)) { start[j] = v.ub; start_st[j] = St::Upper; }
    else { start[j] = 0.0; start_st[j] = St::Free; }
  }
  std::vector<double> resid(m);
  std::vector<double> slack_lb(m), slack_ub(m);
  for (int i = 0; i < m; ++i) {
    const Constraint& r = model.row(i);
    double act = 0.0;
    for (const auto& [j, coef] : r.terms) act += coef * start[j];
    resid[i] = r.rhs - act;
    switch (r.sense) {
      case Sense::LE: slack_lb[i] = 0.0; slack_ub[i] = kInf; break;
      case Sense::GE: slack_lb[i] = -kInf; slack_ub[i] = 0.0; break;
      case Sense::EQ: slack_lb[i] = 0.0; slack_ub[i] = 0.0; break;
    }
  }
  std::vector<int> art_row;  // artificial columns, in order
  std::vector<double> art_sign;
  for (int i = 0; i < m; ++i) {
    if (resid[i] < slack_lb[i] - kZeroTol || resid[i] > slack_ub[i] + kZeroTol) {
      const double clamped = std::clamp(resid[i], slack_lb[i], slack_ub[i]);
      art_row.push_back(i);
      art_sign.push_back(resid[i] - clamped > 0 ? 1.0 : -1.0);
    }
  }
  tb.nart = static_cast<int>(art_row.size());
  tb.N = n + m + tb.nart;

  tb.T.assign(static_cast<std::size_t>(m) * tb.N, 0.0);
  tb.lb.assign(tb.N, 0.0);
  tb.ub.assign(tb.N, kInf);
  tb.val.assign(tb.N, 0.0);
  tb.st.assign(tb.N, St::Lower);
  tb.cost.assign(tb.N, 0.0);
  tb.basis.assign(m, -1);
  tb.beta.assign(m, 0.0);

  tb.rhs.resize(m);
  for (int i = 0; i < m; ++i) tb.rhs[i] = model.row(i).rhs;
  for (int j = 0; j < n; ++j) {
    tb.lb[j] = model.var(j).lb;
    tb.ub[j] = model.var(j).ub;
    tb.st[j] = start_st[j];
    tb.val[j] = start[j];
  }
  for (int i = 0; i < m; ++i) {
    tb.lb[n + i] = slack_lb[i];
    tb.ub[n + i] = slack_ub[i];
  }
  for (int a = 0; a < tb.nart; ++a) {
    tb.lb[n + m + a] = 0.0;
    tb.ub[n + m + a] = kInf;
  }

  // rows of T start as B^{-1}[A | I | Art] with B the start basis; rows whose
  // basic artificial has coefficient -1 are flipped so the basic entry is +1.
  for (int i = 0; i < m; ++i) {
    double* ri = tb.row(i);
    for (const auto& [j, coef] : model.row(i).terms) ri[j] += coef;
    ri[n + i] = 1.0;
  }
  int next_art = 0;
  for (int i = 0; i < m; ++i) {
    const bool has_art = next_art < tb.nart && art_row[next_art] == i;
    if (!has_art) {
      tb.basis[i] = n + i;
      tb.beta[i] = resid[i];
      tb.st[n + i] = St::Basic;
      continue;
    }
    const double s = art_sign[next_art];
    const int acol = n + m + next_art;
    ++next_art;
    const double clamped = std::clamp(resid[i], slack_lb[i], slack_ub[i]);
    tb.st[n + i] = (clamped == slack_ub[i] && std::isfinite(slack_ub[i]) && clamped != slack_lb[i])
                       ? St::Upper
                       : St::Lower;
    tb.val[n + i] = clamped;
    double* ri = tb.row(i);
    ri[acol] = s;
    if (s < 0)
      for (int j = 0; j < tb.N; ++j) ri[j] = -ri[j];
    tb.basis[i] = acol;
    tb.beta[i] = std::abs(resid[i] - clamped);
    tb.st[acol] = St::Basic;
  }

  const auto time_left = [&]() {
    if (!std::isfinite(cfg.time_limit)) return true;
    const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return el < cfg.time_limit;
  };

  long next_refresh = 1000;
  const auto maybe_refresh = [&] {
    if (tb.iterations < next_refresh) return;
    next_refresh = tb.iterations + 1000;
    tb.refresh_beta(cfg.feas_tol);
    rebuild_objrow(tb);
  };

  // phase 1
  if (tb.nart > 0) {
    for (int a = 0; a < tb.nart; ++a) tb.cost[n + m + a] = 1.0;
    rebuild_objrow(tb);
    while (time_left()) {
      double p1 = 0.0;
      for (int i = 0; i < m; ++i)
        if (tb.basis[i] >= n + m) p1 += tb.beta[i];
      if (p1 < cfg.feas_tol) break;
      const StepResult sr = simplex_step(tb, cfg.bland_stall_threshold);
      maybe_refresh();
      if (sr == StepResult::Optimal) break;
      if (sr == StepResult::Unbounded) {
        res.status = SolveStatus::NumericalFailure;
        res.message = "phase-1 unbounded";
        return res;
      }
    }
    double p1 = 0.0;
    for (int i = 0; i < m; ++i)
      if (tb.basis[i] >= n + m) p1 += tb.beta[i];
    if (p1 > cfg.feas_tol) {
      res.status = SolveStatus::Infeasible;
      res.simplex_iterations = tb.iterations;
      res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return res;
    }
    // drive basic artificials out where possible; fix all artificials at 0
    for (int i = 0; i < m; ++i) {
      if (tb.basis[i] < n + m) continue;
      double* ri = tb.row(i);
      int q = -1;
      double best = kPivTol * 10;
      for (int j = 0; j < n + m; ++j) {
        if (tb.st[j] == St::Basic) continue;
        if (std::abs(ri[j]) > best) { best = std::abs(ri[j]); q = j; }
      }
      if (q < 0) continue;  // redundant row; artificial stays basic at zero
      const int acol = tb.basis[i];
      const double piv = ri[q];
      const double inv = 1.0 / piv;
      for (int j = 0; j < tb.N; ++j) ri[j] *= inv;
      ri[q] = 1.0;
      for (int k = 0; k < m; ++k) {
        if (k == i) continue;
        double* rk = tb.row(k);
        const double f = rk[q];
        if (f != 0.0) {
          kernels::axpy(-f, ri, rk, static_cast<std::size_t>(tb.N));
          rk[q] = 0.0;
        }
      }
      tb.basis[i] = q;
      tb.beta[i] = tb.val[q];
      tb.st[q] = St::Basic;
      tb.st[acol] = St::Lower;
      tb.val[acol] = 0.0;
    }
    for (int a = 0; a < tb.nart; ++a) tb.ub[n + m + a] = 0.0;
    // leftover phase-1 round-off must not pin the phase-2 ratio test
    tb.refresh_beta(cfg.feas_tol);
  }

  // phase 2
  std::fill(tb.cost.begin(), tb.cost.end(), 0.0);
  for (int j = 0; j < n; ++j) tb.cost[j] = maximize ? -model.objective()[j] : model.objective()[j];
  rebuild_objrow(tb);
  tb.bland = false;
  tb.stall = 0;
  bool hit_limit = false;
  while (true) {
    if (!time_left()) { hit_limit = true; break; }
    const StepResult sr = simplex_step(tb, cfg.bland_stall_threshold);
    maybe_refresh();
    if (sr == StepResult::Optimal) break;
    if (sr == StepResult::Unbounded) {
      res.status = SolveStatus::Unbounded;
      res.simplex_iterations = tb.iterations;
      return res;
    }
  }

  std::vector<int> row_of(tb.N, -1);
  for (int i = 0; i < m; ++i) row_of[tb.basis[i]] = i;
  res.values.resize(n);
  for (int j = 0; j < n; ++j) res.values[j] = tb.solution(j, row_of);
  res.objective = model.objective_value(res.values);
  res.best_bound = res.objective;
  res.simplex_iterations = tb.iterations;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // never report a dirty point as optimal
  double scale = 1.0;
  for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(model.row(i).rhs));
  if (!model.violated_rows(res.values, cfg.feas_tol * 10 * scale).empty()) {
    res.status = SolveStatus::NumericalFailure;
    res.message = "final point fails feasibility check";
    return res;
  }
  res.status = hit_limit ? SolveStatus::Feasible : SolveStatus::Optimal;
  return res;
}

}  // namespace upmclp

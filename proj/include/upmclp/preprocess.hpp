#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "upmclp/instance.hpp"
#include "upmclp/milp.hpp"

namespace upmclp {

enum class PairCondition { None, CondI, CondII, CondIII, CondIV };
enum class PairStatusKind { AlwaysCovered, NeverCovered, Undecided };

struct PairStatus {
  PairStatusKind kind = PairStatusKind::Undecided;
  PairCondition reason = PairCondition::None;
};

const char* to_string(PairStatusKind k);
const char* to_string(PairCondition c);

// Pairwise classification plus the lower bounds on best-case upgraded
// distances used by the distance-based valid inequalities.
class PreprocessReport {
 public:
  PreprocessReport() = default;
  PreprocessReport(int n, DistanceMatrix d, DistanceMatrix d_u);

  int node_count() const { return n_; }
  const DistanceMatrix& dist() const { return d_; }
  const DistanceMatrix& dist_full_upgrade() const { return d_u_; }

  PairStatus status(int i, int j) const { return status_[pair_index(i, j)]; }
  double lb_upgraded(int i, int j) const { return i == j ? 0.0 : lb_[pair_index(i, j)]; }
  void set(int i, int j, PairStatus s, double lb);

  bool flow_block_needed(int i, int j) const {
    return status(i, j).kind == PairStatusKind::Undecided;
  }
  bool pair_removed(int i, int j) const {
    return status(i, j).kind == PairStatusKind::NeverCovered;
  }

  // nodes within R of i before upgrading (V-hat)
  std::vector<int> covered_before(int i, double R) const;

  double elapsed_pre = 0.0;  // seconds
  std::vector<std::string> warnings;

 private:
  std::size_t pair_index(int i, int j) const;
  int n_ = 0;
  DistanceMatrix d_, d_u_;
  std::vector<PairStatus> status_;
  std::vector<double> lb_;
};

struct PreprocessOptions {
  bool cond_i = true;
  bool cond_ii = true;
  bool cond_iii = true;
  bool cond_iv = true;       // LP bound from the pairwise reduction subproblem
  bool exact_subproblem = false;  // tiny instances: exact path enumeration instead of the LP
  enum class LpMode { Parametric, Simplex } lp_mode = LpMode::Parametric;
};

// Elimination conditions for a pair; strict comparisons are evaluated as
// a > b + 1e-9, keeping borderline pairs.
bool condition_i(int i, int j, const DistanceMatrix& d, const Network& net, double R);
bool condition_ii(int i, int j, const DistanceMatrix& d_u, double R);
bool condition_iii(int i, int j, const DistanceMatrix& d, const Network& net, double B, double R);

// LP relaxation of the pairwise most-favourable-reduction subproblem:
// min sum_a (f_a * l_a - gamma_a) over a unit i->j flow with shared delta
// under the budget. Variables: f per arc in [0,1], gamma per arc, delta per
// edge; 2|A| + m variables.
MilpModel build_dmip_lp(int i, int j, const Network& net, double B);

// Same optimum, computed as max over lambda >= 0 of the shortest i-j path
// under lengths l_e - u_e*(1 - lambda*c_e)^+ minus lambda*B (exact; the
// budget row's Lagrangian dual). +inf when disconnected.
double dmip_lp_value_parametric(const Network& net, double B, int i, int j);

// Exact pairwise subproblem by simple-path enumeration with a fractional
// knapsack over each path's edges. +inf when disconnected.
double dmip_exact_by_paths(const Network& net, double B, int i, int j);

PreprocessReport classify_pairs(const Instance& inst, const PreprocessOptions& opts = {});

// CSV: pair_i,pair_j,status,reason,lb_upgraded (1-based nodes)
void write_report_csv(const PreprocessReport& report, std::ostream& out);

}  // namespace upmclp

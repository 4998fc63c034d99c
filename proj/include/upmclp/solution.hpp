#pragma once

#include <string>
#include <vector>

#include "upmclp/instance.hpp"

namespace upmclp {

struct SolveStats {
  double wall_seconds = 0.0;
  double gap = 0.0;
  long nodes = 0;
  int n_constraints = 0;
  int n_vars = 0;
  int n_binvars = 0;
  std::string status;
};

struct UpMclpSolution {
  std::vector<int> facilities;  // sorted, size p
  std::vector<double> delta;    // per edge, within [0, u_e]
  std::vector<int> covered;     // sorted node list
  double objective = 0.0;       // covered demand, recomputed from delta
  SolveStats stats;
  std::string notes;  // e.g. solver-vs-recomputed objective discrepancy
};

// Recomputes coverage from (facilities, delta) and checks the solution
// invariants; throws std::logic_error naming the violated invariant.
// Returns the recomputed covered set.
std::vector<int> verify_solution(const Instance& inst, const UpMclpSolution& sol);

}  // namespace upmclp

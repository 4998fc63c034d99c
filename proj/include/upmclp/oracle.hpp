#pragma once

#include <utility>
#include <vector>

#include "upmclp/instance.hpp"
#include "upmclp/solution.hpp"

namespace upmclp {

struct OracleLimits {
  int max_nodes = 7;             // for the full upgrading oracle
  int max_paths_per_pair = 64;   // simple-path certificates per (node, facility)
  long max_cover_subsets = -1;   // facility sets to enumerate; -1 means 2^n
};

// Exact plain MCLP (delta = 0) by enumerating all facility sets. Returns the
// optimum and the lexicographically smallest optimal set.
std::pair<double, std::vector<int>> solve_mclp_exact(const Instance& inst,
                                                     const OracleLimits& limits = {});

// Exact Up-MCLP by facility-set enumeration, simple-path coverage
// certificates and per-assignment feasibility LPs (min-cost reduction vs
// budget). Intended for n <= limits.max_nodes.
UpMclpSolution solve_upmclp_exact(const Instance& inst, const OracleLimits& limits = {});

// Exact plain-MCLP objective through a small covering MILP; calibration
// fallback for instances where facility-set enumeration does not fit.
double mclp_value_via_mip(const Instance& inst, double R);

}  // namespace upmclp

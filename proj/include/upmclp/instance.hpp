#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "upmclp/graph.hpp"

namespace upmclp {

struct Instance {
  Network net;
  std::vector<double> demands;  // w_i >= 0, one per node
  int p = 1;                    // facilities to locate
  double R = 0.0;               // coverage radius
  double B = 0.0;               // upgrade budget
};

// Seedable generator used everywhere instances are randomized. splitmix64
// core; draw order is documented at each call site so instances are
// reproducible across builds.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // in [0,1)
  double uniform01();
  // in (0,1]
  double uniform01_open_low();
  // inclusive
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::uint64_t state_;
};

enum class Topology { CompleteGeometric, OrLibrary };
enum class PRule { One, NOver10, NOver20 };

int facilities_for(PRule rule, int n);

struct GeneratorConfig {
  int n = 10;
  std::uint64_t seed = 1;
  Topology topology = Topology::CompleteGeometric;
  double budget_fraction = 0.01;   // of B_max
  double coverage_target = 0.5;    // plain-MCLP demand share fixing R
  PRule p_rule = PRule::NOver10;
};

struct NormalizationEvent {
  enum class Kind { RemovedEdge, CappedReduction };
  Kind kind;
  int edge;  // index in the pre-normalization edge list
  double old_value = 0.0;
  double new_value = 0.0;
};

struct NormalizationLog {
  std::vector<NormalizationEvent> events;
  bool changed() const { return !events.empty(); }
};

// Enforces the two standing assumptions: u_e capped to B/c_e where
// c_e*u_e > B, then edges with l_e - u_e > R removed. Optimum-preserving.
std::pair<Instance, NormalizationLog> normalize(const Instance& inst);

bool is_normalized(const Instance& inst);

// Sum of the n-p largest c_e*u_e values (all of them when m < n-p).
double compute_bmax(const Instance& inst);

// Exact plain-MCLP solver hook: given the instance and a radius, returns the
// optimal covered demand with delta = 0.
using MclpValueFn = std::function<double(const Instance&, double R)>;

// Smallest distinct pairwise distance R whose plain-MCLP optimum reaches
// coverage_target * total demand. Second element is true when even the
// largest distance misses the target (R is then that largest distance).
std::pair<double, bool> calibrate_radius(const Instance& inst, double coverage_target,
                                         const MclpValueFn& mclp);

// Complete geometric instance per the experimental protocol. Draw order:
// node coordinates (x,y per node), demands, per-edge unit costs, per-edge
// max reductions; edges ordered (0,1),(0,2),...,(n-2,n-1).
Instance generate_geometric(const GeneratorConfig& cfg, const MclpValueFn& mclp = {});

// OR-Library p-median text: header "n m p", then m lines "i j cost"
// (1-based). The header's p is ignored in favor of cfg.p_rule; demands,
// costs, reductions, R and B are generated with the same distributions as
// generate_geometric (draw order: demands, per-edge c, per-edge u).
Instance read_orlibrary(std::istream& in, const GeneratorConfig& cfg,
                        const MclpValueFn& mclp = {});

// Canonical instance file format (see README). 9 significant digits.
Instance read_instance(std::istream& in);
void write_instance(std::ostream& out, const Instance& inst);

}  // namespace upmclp

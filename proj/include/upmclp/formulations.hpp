#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "upmclp/instance.hpp"
#include "upmclp/milp.hpp"
#include "upmclp/preprocess.hpp"
#include "upmclp/solution.hpp"

namespace upmclp {

enum class FormulationKind { FlowCov, Path, PathCov };
enum class FlowVariant { Alpha, Gamma };

enum class ViFamily {
  NoTwoWayArc,           // flow pairs never traverse an edge in both directions
  PathChain,             // nodes on a covering path inherit its assignment
  ClosestBefore,         // serve from the closest facility at pre-upgrade distances
  ClosestUpgraded,       // same idea with best-case upgraded distance bounds
  SuccessorLowerBound,   // d_i >= sum (l-u) z over outgoing successor arcs
  ReinforcedDistance,    // strengthened distance propagation (replaces the base rows)
  ClosestSuccessor,      // successor edge consistent with a pre-upgrade closest facility
  TriangleCycle,         // static 3-cycle rows on z
  AssignmentLowerBound,  // d_i >= sum lb(i,k) y_ik
};

enum class CutFamily {
  SuccessorDistance,  // per-node cuts bounding d_i from its neighbourhood
  SameFacility,       // per-edge cuts forcing linked nodes to share a facility
  TriangleCycle,      // lazy 3-cycle rows
};

const char* to_string(FormulationKind k);
const char* to_string(FlowVariant v);
const char* to_string(ViFamily f);
const char* to_string(CutFamily c);
std::optional<FormulationKind> parse_formulation(const std::string& token, FlowVariant* variant);
std::optional<ViFamily> parse_vi_family(const std::string& token);
std::optional<CutFamily> parse_cut_family(const std::string& token);

struct FormulationSpec {
  FormulationKind kind = FormulationKind::PathCov;
  FlowVariant flow_variant = FlowVariant::Gamma;
  bool relax_x = true;  // drop the binary marking where the model forces integrality anyway
  bool relax_y = true;
  std::set<ViFamily> vi;
  std::set<CutFamily> cuts;
  bool use_preprocess = true;
  bool allow_conflicting_vi = false;  // testing backdoor around the family-conflict check
  int triangle_cap = 20000;

  static FormulationSpec defaults(FormulationKind k, FlowVariant fv = FlowVariant::Gamma);
  std::string config_string() const;  // key=value, echoed into result CSVs
};

// Index map from model columns back to formulation variables. Absent
// variables are -1 / missing keys.
struct VariableMap {
  int n = 0;
  int m = 0;
  std::vector<int> x;      // per node
  std::vector<int> dvar;   // per node (Path/Path-Cov)
  std::vector<int> delta;  // per edge
  std::vector<int> z;      // per arc (Path/Path-Cov)
  std::unordered_map<long long, int> y;        // ordered pair (i,j)
  std::unordered_map<long long, int> flow;     // (pair, arc) -> f column
  std::unordered_map<long long, int> flowlen;  // (pair, arc) -> alpha/gamma column

  long long ykey(int i, int j) const { return static_cast<long long>(i) * n + j; }
  long long fkey(int i, int j, int a) const {
    return (static_cast<long long>(i) * n + j) * (2LL * m) + a;
  }
  int y_at(int i, int j) const {
    const auto it = y.find(ykey(i, j));
    return it == y.end() ? -1 : it->second;
  }
  int flow_at(int i, int j, int a) const {
    const auto it = flow.find(fkey(i, j, a));
    return it == flow.end() ? -1 : it->second;
  }
  int flowlen_at(int i, int j, int a) const {
    const auto it = flowlen.find(fkey(i, j, a));
    return it == flowlen.end() ? -1 : it->second;
  }
};

struct BuiltModel {
  MilpModel model;
  VariableMap vars;
  FormulationSpec spec;
};

// report may be null only when neither preprocessing nor a report-dependent
// family is requested.
BuiltModel build_flow_cov(const Instance& inst, const PreprocessReport* report,
                          const FormulationSpec& spec);
BuiltModel build_path(const Instance& inst, const FormulationSpec& spec);
BuiltModel build_path_cov(const Instance& inst, const PreprocessReport& report,
                          const FormulationSpec& spec);
BuiltModel build_formulation(const Instance& inst, const PreprocessReport* report,
                             const FormulationSpec& spec);

// Separation routines; fractional point given as model-variable values.
std::vector<Constraint> separate_successor_distance(const BuiltModel& bm, const Instance& inst,
                                                    const std::vector<double>& xbar);
std::vector<Constraint> separate_same_facility(const BuiltModel& bm, const Instance& inst,
                                               const std::vector<double>& xbar);
std::vector<Constraint> separate_triangle_cycles(const BuiltModel& bm, const Instance& inst,
                                                 const std::vector<double>& xbar);

// Generators for spec.cuts; they capture bm and inst by reference.
std::vector<CutGenerator> make_cut_generators(const BuiltModel& bm, const Instance& inst);

// Maps a solver point back to the domain: rounds/repairs facilities,
// recomputes coverage under the chosen reductions, checks the solution
// invariants. A solver-vs-recomputed objective mismatch > 1e-6 lands in
// notes.
UpMclpSolution extract_solution(const Instance& inst, const BuiltModel& bm,
                                const SolveResult& result);

// Embeds an integral solution into model variables (facilities, reductions,
// shortest-path flow/successor structure). Used for MIP starts and for
// checking that rows hold at integral optima.
std::vector<double> lift_solution(const Instance& inst, const BuiltModel& bm,
                                  const UpMclpSolution& sol);

struct ModelSizeReduction {
  double constraints_pct = 0.0;
  double vars_pct = 0.0;
  double binvars_pct = 0.0;
};

// (raw - preprocessed) / raw * 100 for rows, columns and binary columns.
ModelSizeReduction model_size_report(const MilpModel& raw, const MilpModel& preprocessed);

}  // namespace upmclp

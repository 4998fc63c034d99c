#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace upmclp {

enum class VarKind { Continuous, Binary, Integer };
enum class Sense { LE, EQ, GE };
enum class ObjSense { Maximize, Minimize };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = std::numeric_limits<double>::infinity();
  VarKind kind = VarKind::Continuous;
};

struct Constraint {
  std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
  Sense sense = Sense::LE;
  double rhs = 0.0;
  std::string name;  // optional; export synthesizes c<row> when empty
};

class MilpModel {
 public:
  int add_variable(std::string name, double lb, double ub, VarKind kind);
  int add_constraint(Constraint c);
  int add_constraint(std::vector<std::pair<int, double>> terms, Sense sense, double rhs,
                     std::string name = {});
  void set_objective(ObjSense sense, std::vector<std::pair<int, double>> coeffs);

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_binary_vars() const;
  int num_integer_vars() const;  // binary + general integer

  const Variable& var(int j) const { return vars_[j]; }
  Variable& var(int j) { return vars_[j]; }
  const std::vector<Variable>& vars() const { return vars_; }
  const Constraint& row(int i) const { return rows_[i]; }
  const std::vector<Constraint>& rows() const { return rows_; }
  ObjSense objective_sense() const { return obj_sense_; }
  const std::vector<double>& objective() const { return obj_; }  // dense, size num_vars

  double objective_value(const std::vector<double>& x) const;
  double row_activity(int i, const std::vector<double>& x) const;
  // Row indices violated by more than tol (bounds reported as row -1 - j).
  std::vector<int> violated_rows(const std::vector<double>& x, double tol) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  ObjSense obj_sense_ = ObjSense::Maximize;
  std::vector<double> obj_;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;   // incumbent (or LP optimum)
  double best_bound = 0.0;  // proved bound; equals objective when Optimal
  std::vector<double> values;
  long node_count = 0;
  double wall_seconds = 0.0;
  long simplex_iterations = 0;
  std::map<std::string, int> cut_counts;
  std::string message;

  double relative_gap() const;
};

// All hard-coded tolerances live here.
struct SolverConfig {
  double feas_tol = 1e-7;
  double int_tol = 1e-6;
  double cut_violation_tol = 1e-6;
  double rel_gap = 1e-6;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  long node_limit = std::numeric_limits<long>::max();
  int cut_rounds_per_node = 3;
  int max_cuts_per_round = 50;
  int bland_stall_threshold = 200;  // degenerate iterations before Bland's rule
};

// Returns violated globally-valid rows for a fractional point.
struct CutGenerator {
  std::string name;
  std::function<std::vector<Constraint>(const std::vector<double>&)> separate;
};

SolveResult solve_lp(const MilpModel& model, const SolverConfig& cfg = {});
SolveResult solve_mip(const MilpModel& model, const std::vector<CutGenerator>& cuts = {},
                      const SolverConfig& cfg = {});

// CPLEX-style LP-format text; deterministic; mangles names that the format
// cannot represent and emits the mapping as leading comment lines.
void export_lp_file(const MilpModel& model, std::ostream& out);

// Reads "name value" lines, binds them to model variables, recomputes the
// objective from the model coefficients and re-checks feasibility (1e-6).
SolveResult import_solution(const MilpModel& model, std::istream& in);

}  // namespace upmclp

#include "upmclp/milp.hpp"

#include <cmath>
#include <stdexcept>

namespace upmclp {

int MilpModel::add_variable(std::string name, double lb, double ub, VarKind kind) {
  if (lb > ub) throw std::invalid_argument("variable " + name + ": lb > ub");
  if (kind == VarKind::Binary && (lb < -0.0 || ub > 1.0))
    throw std::invalid_argument("variable " + name + ": binary bounds outside [0,1]");
  vars_.push_back({std::move(name), lb, ub, kind});
  obj_.push_back(0.0);
  return num_vars() - 1;
}

int MilpModel::add_constraint(Constraint c) {
  for (const auto& [j, coef] : c.terms) {
    if (j < 0 || j >= num_vars()) throw std::invalid_argument("constraint references unknown variable");
    if (!std::isfinite(coef)) throw std::invalid_argument("non-finite constraint coefficient");
  }
  rows_.push_back(std::move(c));
  return num_constraints() - 1;
}

int MilpModel::add_constraint(std::vector<std::pair<int, double>> terms, Sense sense, double rhs,
                              std::string name) {
  return add_constraint(Constraint{std::move(terms), sense, rhs, std::move(name)});
}

void MilpModel::set_objective(ObjSense sense, std::vector<std::pair<int, double>> coeffs) {
  obj_sense_ = sense;
  obj_.assign(vars_.size(), 0.0);
  for (const auto& [j, coef] : coeffs) {
    if (j < 0 || j >= num_vars()) throw std::invalid_argument("objective references unknown variable");
    obj_[j] += coef;
  }
}

int MilpModel::num_binary_vars() const {
  int c = 0;
  for (const auto& v : vars_)
    if (v.kind == VarKind::Binary) ++c;
  return c;
}

int MilpModel::num_integer_vars() const {
  int c = 0;
  for (const auto& v : vars_)
    if (v.kind != VarKind::Continuous) ++c;
  return c;
}

double MilpModel::objective_value(const std::vector<double>& x) const {
  double s = 0.0;
  for (int j = 0; j < num_vars(); ++j) s += obj_[j] * x[j];
  return s;
}

double MilpModel::row_activity(int i, const std::vector<double>& x) const {
  double s = 0.0;
  for (const auto& [j, coef] : rows_[i].terms) s += coef * x[j];
  return s;
}

std::vector<int> MilpModel::violated_rows(const std::vector<double>& x, double tol) const {
  std::vector<int> out;
  for (int i = 0; i < num_constraints(); ++i) {
    const double a = row_activity(i, x);
    const Constraint& r = rows_[i];
    const bool bad = (r.sense == Sense::LE && a > r.rhs + tol) ||
                     (r.sense == Sense::GE && a < r.rhs - tol) ||
                     (r.sense == Sense::EQ && std::abs(a - r.rhs) > tol);
    if (bad) out.push_back(i);
  }
  for (int j = 0; j < num_vars(); ++j)
    if (x[j] < vars_[j].lb - tol || x[j] > vars_[j].ub + tol) out.push_back(-1 - j);
  return out;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

double SolveResult::relative_gap() const {
  if (status == SolveStatus::Optimal) return 0.0;
  const double denom = std::max(1e-10, std::abs(objective));
  return std::abs(best_bound - objective) / denom;
}

}  // namespace upmclp

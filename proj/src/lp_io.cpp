#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "upmclp/milp.hpp"

namespace upmclp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

bool needs_prefix(const std::string& s) {
  if (s.empty()) return true;
  const char c = s[0];
  if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return true;
  // LP format reserves names that could parse as exponents
  if ((c == 'e' || c == 'E') && s.size() > 1) {
    const char d = s[1];
    if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == 'e' || d == 'E') return true;
  }
  return false;
}

// Deterministic LP-format-safe names; collisions resolved by column index.
std::vector<std::string> sanitize_names(const MilpModel& model,
                                        std::vector<std::pair<std::string, std::string>>* mapping) {
  std::vector<std::string> out(model.num_vars());
  std::unordered_map<std::string, int> used;
  for (int j = 0; j < model.num_vars(); ++j) {
    std::string s = model.var(j).name;
    if (s.empty()) s = "x" + std::to_string(j);
    std::string clean;
    clean.reserve(s.size());
    for (char c : s)
      clean.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_');
    if (needs_prefix(clean)) clean = "v_" + clean;
    if (used.count(clean)) clean += "_" + std::to_string(j);
    used[clean] = j;
    if (clean != model.var(j).name && mapping) mapping->push_back({model.var(j).name, clean});
    out[j] = clean;
  }
  return out;
}

void write_terms(std::ostream& out, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& [j, coef] : terms) {
    if (coef == 0.0) continue;
    if (first) {
      if (coef < 0) out << "- ";
      first = false;
    } else {
      out << (coef < 0 ? " - " : " + ");
    }
    const double a = std::abs(coef);
    if (a != 1.0) out << fmt(a) << ' ';
    out << names[j];
  }
  if (first) out << "0 " << (names.empty() ? "none" : names[0]);
}

}  // namespace

void export_lp_file(const MilpModel& model, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> mapping;
  const std::vector<std::string> names = sanitize_names(model, &mapping);
  for (const auto& [orig, man] : mapping) out << "\\ name " << orig << " => " << man << "\n";

  out << (model.objective_sense() == ObjSense::Maximize ? "Maximize" : "Minimize") << "\n obj: ";
  std::vector<std::pair<int, double>> obj_terms;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.objective()[j] != 0.0) obj_terms.push_back({j, model.objective()[j]});
  write_terms(out, obj_terms, names);
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const Constraint& r = model.row(i);
    std::string rname = r.name.empty() ? "c" + std::to_string(i) : r.name;
    for (char& c : rname)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
    if (needs_prefix(rname)) rname = "r_" + rname;
    out << ' ' << rname << ": ";
    write_terms(out, r.terms, names);
    switch (r.sense) {
      case Sense::LE: out << " <= "; break;
      case Sense::GE: out << " >= "; break;
      case Sense::EQ: out << " = "; break;
    }
    out << fmt(r.rhs) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < model.num_vars(); ++j) {
    const Variable& v = model.var(j);
    const bool lb0 = v.lb == 0.0;
    const bool ub_inf = !std::isfinite(v.ub);
    if (v.kind == VarKind::Binary && lb0 && v.ub == 1.0) continue;  // implied by Binaries
    if (lb0 && ub_inf) continue;                                    // LP-format default
    if (!std::isfinite(v.lb) && ub_inf) {
      out << ' ' << names[j] << " free\n";
    } else if (v.lb == v.ub) {
      out << ' ' << names[j] << " = " << fmt(v.lb) << "\n";
    } else {
      out << ' ';
      if (std::isfinite(v.lb)) out << fmt(v.lb) << " <= ";
      else out << "-infinity <= ";
      out << names[j];
      if (!ub_inf) out << " <= " << fmt(v.ub);
      out << "\n";
    }
  }
  bool any = false;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (model.var(j).kind != VarKind::Binary) continue;
    if (!any) { out << "Binaries\n"; any = true; }
    out << ' ' << names[j] << "\n";
  }
  any = false;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (model.var(j).kind != VarKind::Integer) continue;
    if (!any) { out << "Generals\n"; any = true; }
    out << ' ' << names[j] << "\n";
  }
  out << "End\n";
}

SolveResult import_solution(const MilpModel& model, std::istream& in) {
  std::unordered_map<std::string, int> lookup;
  for (int j = 0; j < model.num_vars(); ++j) lookup[model.var(j).name] = j;
  const std::vector<std::string> mangled = sanitize_names(model, nullptr);
  for (int j = 0; j < model.num_vars(); ++j) lookup.emplace(mangled[j], j);

  std::vector<double> x(model.num_vars(), 0.0);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line[0] == '\\') continue;
    std::istringstream ls(line);
    std::string name;
    while (ls >> name) {
      double value;
      if (!(ls >> value))
        throw std::runtime_error("solution line " + std::to_string(lineno) + ": missing value for '" +
                                 name + "'");
      const auto it = lookup.find(name);
      if (it == lookup.end())
        throw std::runtime_error("solution line " + std::to_string(lineno) + ": unknown variable '" +
                                 name + "'");
      x[it->second] = value;
    }
  }

  SolveResult res;
  res.values = std::move(x);
  res.objective = model.objective_value(res.values);
  res.best_bound = res.objective;
  const auto bad = model.violated_rows(res.values, 1e-6);
  if (!bad.empty()) {
    res.status = SolveStatus::Infeasible;
    std::ostringstream msg;
    msg << "claimed solution violates:";
    for (int i : bad) {
      if (i >= 0) {
        const std::string& nm = model.row(i).name;
        msg << ' ' << (nm.empty() ? "c" + std::to_string(i) : nm);
      } else {
        msg << " bounds(" << model.var(-1 - i).name << ")";
      }
    }
    res.message = msg.str();
  } else {
    res.status = SolveStatus::Feasible;
  }
  return res;
}

}  // namespace upmclp

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "upmclp/formulations.hpp"

// Separation for the exponential row families of the successor formulations.
// Every emitted row is globally valid (its proof uses feasibility only), so
// the branch-and-bound keeps them across nodes.

namespace upmclp {

namespace {
constexpr double kStrict = 1e-9;
constexpr double kViolation = 1e-6;

// accumulate coefficients, collapsing duplicate columns
class RowBuilder {
 public:
  void add(int var, double coef) { coefs_[var] += coef; }
  Constraint take(Sense sense, double rhs, std::string name = {}) {
    Constraint c;
    for (const auto& [var, coef] : coefs_)
      if (coef != 0.0) c.terms.push_back({var, coef});
    c.sense = sense;
    c.rhs = rhs;
    c.name = std::move(name);
    return c;
  }
  double activity(const std::vector<double>& x) const {
    double s = 0.0;
    for (const auto& [var, coef] : coefs_) s += coef * x[var];
    return s;
  }

 private:
  std::map<int, double> coefs_;
};

}  // namespace

std::vector<Constraint> separate_successor_distance(const BuiltModel& bm, const Instance& inst,
                                                    const std::vector<double>& xbar) {
  const Network& net = inst.net;
  const VariableMap& V = bm.vars;
  const double R = inst.R;
  std::vector<Constraint> out;
  if (V.z.empty()) return out;

  for (int i = 0; i < net.node_count(); ++i) {
    // split variant: independent memberships for the distance-chain part and
    // the adjacent-edge part
    RowBuilder split;
    double split_rhs = 0.0;
    split.add(V.dvar[i], 1.0);
    // merged variant: one membership test per neighbour with both parts
    RowBuilder merged;
    double merged_rhs = 0.0;
    merged.add(V.dvar[i], 1.0);
    bool any_split = false, any_merged = false;

    for (const auto& [e, j] : net.adjacency(i)) {
      const int a = net.edge(e).k == i ? 2 * e : 2 * e + 1;  // arc i->j
      const double zbar = xbar[V.z[a]];
      const double dbar_j = xbar[V.dvar[j]];
      const double delbar = xbar[V.delta[e]];
      const double lij = net.edge(e).length;

      if (dbar_j > R * (1.0 - zbar) + kStrict) {
        split.add(V.dvar[j], -1.0);
        split.add(V.z[a], -R);
        split_rhs -= R;
        any_split = true;
      }
      if (lij * zbar > delbar + kStrict) {
        split.add(V.z[a], -lij);
        split.add(V.delta[e], 1.0);
        any_split = true;
      }
      if (dbar_j + lij * zbar > R * (1.0 - zbar) + delbar + kStrict) {
        merged.add(V.dvar[j], -1.0);
        merged.add(V.z[a], -(lij + R));
        merged.add(V.delta[e], 1.0);
        merged_rhs -= R;
        any_merged = true;
      }
    }
    if (any_split && split.activity(xbar) < split_rhs - kViolation)
      out.push_back(split.take(Sense::GE, split_rhs, "cutdi_" + std::to_string(i + 1)));
    if (any_merged && merged.activity(xbar) < merged_rhs - kViolation)
      out.push_back(merged.take(Sense::GE, merged_rhs, "cutdi2_" + std::to_string(i + 1)));
  }
  return out;
}

std::vector<Constraint> separate_same_facility(const BuiltModel& bm, const Instance& inst,
                                               const std::vector<double>& xbar) {
  const Network& net = inst.net;
  const VariableMap& V = bm.vars;
  const int n = net.node_count();
  std::vector<Constraint> out;
  if (V.y.empty() || V.z.empty()) return out;

  const auto yval = [&](int i, int j) {
    const int v = V.y_at(i, j);
    return v < 0 ? 0.0 : xbar[v];
  };

  for (int e = 0; e < net.edge_count(); ++e) {
    const int i = net.edge(e).k;
    const int j = net.edge(e).q;
    // choose the cheaper side of the set W for every node independently;
    // ties go to the W side
    RowBuilder row;
    row.add(V.z[2 * e], 1.0);
    row.add(V.z[2 * e + 1], 1.0);
    double rhs_bar = 0.0;
    const auto pick = [&](int in_var, double in_val, int out_var, double out_val) {
      if (in_val <= out_val) {
        if (in_var >= 0) row.add(in_var, -1.0);
        rhs_bar += in_val;
      } else {
        if (out_var >= 0) row.add(out_var, -1.0);
        rhs_bar += out_val;
      }
    };
    for (int k = 0; k < n; ++k) {
      if (k == i) pick(V.x[i], xbar[V.x[i]], V.y_at(j, i), yval(j, i));
      else if (k == j) pick(V.y_at(i, j), yval(i, j), V.x[j], xbar[V.x[j]]);
      else pick(V.y_at(i, k), yval(i, k), V.y_at(j, k), yval(j, k));
    }
    const double lhs_bar = xbar[V.z[2 * e]] + xbar[V.z[2 * e + 1]];
    if (lhs_bar - rhs_bar > kViolation)
      out.push_back(row.take(Sense::LE, 0.0, "cutsepa_" + std::to_string(e + 1)));
  }
  return out;
}

std::vector<Constraint> separate_triangle_cycles(const BuiltModel& bm, const Instance& inst,
                                                 const std::vector<double>& xbar) {
  const Network& net = inst.net;
  const VariableMap& V = bm.vars;
  std::vector<Constraint> out;
  if (V.z.empty()) return out;
  const int n = net.node_count();
  std::vector<std::vector<int>> edge_of(n, std::vector<int>(n, -1));
  for (int e = 0; e < net.edge_count(); ++e) {
    edge_of[net.edge(e).k][net.edge(e).q] = e;
    edge_of[net.edge(e).q][net.edge(e).k] = e;
  }
  int seen = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (edge_of[i][j] < 0) continue;
      for (int k = j + 1; k < n; ++k) {
        if (edge_of[i][k] < 0 || edge_of[j][k] < 0) continue;
        if (++seen > bm.spec.triangle_cap) return out;
        const std::array<int, 3> tri = {edge_of[i][j], edge_of[j][k], edge_of[i][k]};
        double act = 0.0;
        for (int e : tri) act += xbar[V.z[2 * e]] + xbar[V.z[2 * e + 1]];
        if (act > 2.0 + kViolation) {
          RowBuilder row;
          for (int e : tri) {
            row.add(V.z[2 * e], 1.0);
            row.add(V.z[2 * e + 1], 1.0);
          }
          out.push_back(row.take(Sense::LE, 2.0));
        }
      }
    }
  return out;
}

std::vector<CutGenerator> make_cut_generators(const BuiltModel& bm, const Instance& inst) {
  std::vector<CutGenerator> out;
  for (CutFamily c : bm.spec.cuts) {
    switch (c) {
      case CutFamily::SuccessorDistance:
        out.push_back({"cutdi", [&bm, &inst](const std::vector<double>& x) {
                         return separate_successor_distance(bm, inst, x);
                       }});
        break;
      case CutFamily::SameFacility:
        out.push_back({"cutsepa", [&bm, &inst](const std::vector<double>& x) {
                         return separate_same_facility(bm, inst, x);
                       }});
        break;
      case CutFamily::TriangleCycle:
        out.push_back({"cut3cycle", [&bm, &inst](const std::vector<double>& x) {
                         return separate_triangle_cycles(bm, inst, x);
                       }});
        break;
    }
  }
  return out;
}

}  // namespace upmclp

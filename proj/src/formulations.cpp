#include "upmclp/formulations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace upmclp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-9;

std::string num(int v) { return std::to_string(v); }
}  // namespace

const char* to_string(FormulationKind k) {
  switch (k) {
    case FormulationKind::FlowCov: return "flowcov";
    case FormulationKind::Path: return "path";
    case FormulationKind::PathCov: return "pathcov";
  }
  return "?";
}

const char* to_string(FlowVariant v) {
  return v == FlowVariant::Alpha ? "alpha" : "gamma";
}

const char* to_string(ViFamily f) {
  switch (f) {
    case ViFamily::NoTwoWayArc: return "no-two-way";
    case ViFamily::PathChain: return "path-chain";
    case ViFamily::ClosestBefore: return "closest-before";
    case ViFamily::ClosestUpgraded: return "closest-upgraded";
    case ViFamily::SuccessorLowerBound: return "succ-lb";
    case ViFamily::ReinforcedDistance: return "reinforced-distance";
    case ViFamily::ClosestSuccessor: return "closest-successor";
    case ViFamily::TriangleCycle: return "triangle";
    case ViFamily::AssignmentLowerBound: return "assign-lb";
  }
  return "?";
}

const char* to_string(CutFamily c) {
  switch (c) {
    case CutFamily::SuccessorDistance: return "cutdi";
    case CutFamily::SameFacility: return "cutsepa";
    case CutFamily::TriangleCycle: return "triangle";
  }
  return "?";
}

std::optional<FormulationKind> parse_formulation(const std::string& token, FlowVariant* variant) {
  if (token == "flowcov-alpha") {
    if (variant) *variant = FlowVariant::Alpha;
    return FormulationKind::FlowCov;
  }
  if (token == "flowcov-gamma" || token == "flowcov") {
    if (variant) *variant = FlowVariant::Gamma;
    return FormulationKind::FlowCov;
  }
  if (token == "path") return FormulationKind::Path;
  if (token == "pathcov") return FormulationKind::PathCov;
  return std::nullopt;
}

std::optional<ViFamily> parse_vi_family(const std::string& token) {
  for (ViFamily f : {ViFamily::NoTwoWayArc, ViFamily::PathChain, ViFamily::ClosestBefore,
                     ViFamily::ClosestUpgraded, ViFamily::SuccessorLowerBound,
                     ViFamily::ReinforcedDistance, ViFamily::ClosestSuccessor,
                     ViFamily::TriangleCycle, ViFamily::AssignmentLowerBound})
    if (token == to_string(f)) return f;
  return std::nullopt;
}

std::optional<CutFamily> parse_cut_family(const std::string& token) {
  for (CutFamily c : {CutFamily::SuccessorDistance, CutFamily::SameFacility, CutFamily::TriangleCycle})
    if (token == to_string(c)) return c;
  return std::nullopt;
}

FormulationSpec FormulationSpec::defaults(FormulationKind k, FlowVariant fv) {
  FormulationSpec s;
  s.kind = k;
  s.flow_variant = fv;
  switch (k) {
    case FormulationKind::FlowCov:
      s.vi = {ViFamily::NoTwoWayArc};
      break;
    case FormulationKind::Path:
      s.vi = {ViFamily::SuccessorLowerBound, ViFamily::ReinforcedDistance};
      s.use_preprocess = false;  // no pairwise reductions apply to this formulation
      break;
    case FormulationKind::PathCov:
      s.vi = {ViFamily::ReinforcedDistance, ViFamily::AssignmentLowerBound};
      break;
  }
  return s;
}

std::string FormulationSpec::config_string() const {
  std::ostringstream out;
  out << "formulation=" << to_string(kind);
  if (kind == FormulationKind::FlowCov) out << '-' << to_string(flow_variant);
  out << ";preprocess=" << (use_preprocess ? 1 : 0);
  out << ";relax_x=" << (relax_x ? 1 : 0) << ";relax_y=" << (relax_y ? 1 : 0);
  out << ";vi=";
  bool first = true;
  for (ViFamily f : vi) {
    if (!first) out << '+';
    out << to_string(f);
    first = false;
  }
  out << ";cuts=";
  first = true;
  for (CutFamily c : cuts) {
    if (!first) out << '+';
    out << to_string(c);
    first = false;
  }
  return out.str();
}

namespace {

void check_spec(const Instance& inst, const FormulationSpec& spec, const PreprocessReport* report) {
  if (!is_normalized(inst))
    throw std::invalid_argument("formulation builder requires a normalized instance");
  if (!spec.allow_conflicting_vi && spec.vi.count(ViFamily::PathChain) &&
      spec.vi.count(ViFamily::ClosestBefore))
    throw std::invalid_argument(
        "the path-chain and closest-before families cannot be enabled together");
  if (spec.vi.count(ViFamily::ClosestUpgraded) && report == nullptr)
    throw std::invalid_argument("closest-upgraded rows need a preprocessing report");
  if (spec.use_preprocess && report == nullptr)
    throw std::invalid_argument("preprocessing requested but no report given");
}

// family availability per formulation
void check_families(const FormulationSpec& spec) {
  const auto reject = [&](ViFamily f) {
    if (spec.vi.count(f))
      throw std::invalid_argument(std::string("family ") + to_string(f) +
                                  " is not available for " + to_string(spec.kind));
  };
  switch (spec.kind) {
    case FormulationKind::FlowCov:
      reject(ViFamily::SuccessorLowerBound);
      reject(ViFamily::ReinforcedDistance);
      reject(ViFamily::ClosestSuccessor);
      reject(ViFamily::TriangleCycle);
      reject(ViFamily::AssignmentLowerBound);
      if (!spec.cuts.empty())
        throw std::invalid_argument("cut families attach to the successor formulations");
      break;
    case FormulationKind::Path:
      reject(ViFamily::NoTwoWayArc);
      reject(ViFamily::PathChain);
      reject(ViFamily::ClosestBefore);
      reject(ViFamily::ClosestUpgraded);
      reject(ViFamily::AssignmentLowerBound);
      if (spec.cuts.count(CutFamily::SameFacility))
        throw std::invalid_argument("same-facility cuts need assignment variables");
      break;
    case FormulationKind::PathCov:
      reject(ViFamily::NoTwoWayArc);
      reject(ViFamily::PathChain);
      reject(ViFamily::ClosestBefore);
      break;
  }
}

std::vector<int> vhat(const DistanceMatrix& d, int i, double R) {
  std::vector<int> out;
  for (int j = 0; j < d.size(); ++j)
    if (j != i && d(i, j) <= R + kTol) out.push_back(j);
  return out;
}

}  // namespace

BuiltModel build_flow_cov(const Instance& inst, const PreprocessReport* report,
                          const FormulationSpec& spec) {
  check_spec(inst, spec, report);
  check_families(spec);
  const Network& net = inst.net;
  const int n = net.node_count();
  const int m = net.edge_count();
  const bool pre = spec.use_preprocess;
  const bool gamma = spec.flow_variant == FlowVariant::Gamma;

  const DistanceMatrix dist = report ? report->dist() : shortest_distances(net, false);

  const auto removed = [&](int i, int j) { return pre && report->pair_removed(i, j); };
  const auto needs_flow = [&](int i, int j) {  // i < j
    return !pre || report->flow_block_needed(i, j);
  };

  BuiltModel bm;
  bm.spec = spec;
  MilpModel& M = bm.model;
  VariableMap& V = bm.vars;
  V.n = n;
  V.m = m;
  V.x.resize(n);
  V.delta.resize(m);

  for (int j = 0; j < n; ++j)
    V.x[j] = M.add_variable("x_" + num(j + 1), 0.0, 1.0,
                            spec.relax_x ? VarKind::Continuous : VarKind::Binary);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || removed(i, j)) continue;
      // assignment indicators stay binary when their flow block was dropped;
      // without that block nothing links them to the f-variables and the
      // relaxation is no longer exact
      const bool flow_linked = needs_flow(std::min(i, j), std::max(i, j));
      const VarKind kind =
          (spec.relax_y && flow_linked) ? VarKind::Continuous : VarKind::Binary;
      V.y[V.ykey(i, j)] = M.add_variable("y_" + num(i + 1) + "_" + num(j + 1), 0.0, 1.0, kind);
    }
  for (int e = 0; e < m; ++e)
    V.delta[e] = M.add_variable("del_" + num(e + 1), 0.0, net.edge(e).max_reduction,
                                VarKind::Continuous);

  // per-pair flow variables over A \ (incoming(i) U outgoing(j))
  std::vector<std::pair<int, int>> flow_pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!removed(i, j) && needs_flow(i, j)) flow_pairs.push_back({i, j});

  const char* len_name = gamma ? "gam_" : "alp_";
  std::vector<std::vector<int>> pair_arcs(flow_pairs.size());
  for (std::size_t t = 0; t < flow_pairs.size(); ++t) {
    const auto [i, j] = flow_pairs[t];
    for (int a = 0; a < net.arc_count(); ++a) {
      if (net.arc_head(a) == i || net.arc_tail(a) == j) continue;
      pair_arcs[t].push_back(a);
      const std::string suffix = num(i + 1) + "_" + num(j + 1) + "_" + num(a);
      V.flow[V.fkey(i, j, a)] = M.add_variable("f_" + suffix, 0.0, 1.0, VarKind::Binary);
      const Edge& ed = net.edge(Network::arc_edge(a));
      V.flowlen[V.fkey(i, j, a)] =
          M.add_variable(len_name + suffix, 0.0, gamma ? ed.max_reduction : ed.length,
                         VarKind::Continuous);
    }
  }

  std::vector<std::pair<int, double>> obj;
  for (int i = 0; i < n; ++i) {
    obj.push_back({V.x[i], inst.demands[i]});
    for (int j = 0; j < n; ++j)
      if (i != j && V.y_at(i, j) >= 0) obj.push_back({V.y_at(i, j), inst.demands[i]});
  }
  M.set_objective(ObjSense::Maximize, std::move(obj));

  {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < n; ++j) terms.push_back({V.x[j], 1.0});
    M.add_constraint(std::move(terms), Sense::EQ, inst.p, "p_facilities");
  }
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> terms{{V.x[i], 1.0}};
    for (int j = 0; j < n; ++j)
      if (i != j && V.y_at(i, j) >= 0) terms.push_back({V.y_at(i, j), 1.0});
    M.add_constraint(std::move(terms), Sense::LE, 1.0, "assign_" + num(i + 1));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || V.y_at(i, j) < 0) continue;
      M.add_constraint({{V.y_at(i, j), 1.0}, {V.x[j], -1.0}}, Sense::LE, 0.0,
                       "open_" + num(i + 1) + "_" + num(j + 1));
    }
  {
    std::vector<std::pair<int, double>> terms;
    for (int e = 0; e < m; ++e) terms.push_back({V.delta[e], net.edge(e).unit_cost});
    M.add_constraint(std::move(terms), Sense::LE, inst.B, "budget");
  }

  for (std::size_t t = 0; t < flow_pairs.size(); ++t) {
    const auto [i, j] = flow_pairs[t];
    const std::string pr = num(i + 1) + "_" + num(j + 1);
    if (gamma) {
      std::vector<std::pair<int, double>> len_terms;
      for (int a : pair_arcs[t]) {
        const Edge& ed = net.edge(Network::arc_edge(a));
        len_terms.push_back({V.flow_at(i, j, a), ed.length});
        len_terms.push_back({V.flowlen_at(i, j, a), -1.0});
      }
      M.add_constraint(std::move(len_terms), Sense::LE, inst.R, "len_" + pr);
      for (int a : pair_arcs[t]) {
        const Edge& ed = net.edge(Network::arc_edge(a));
        M.add_constraint({{V.flowlen_at(i, j, a), 1.0}, {V.flow_at(i, j, a), -ed.max_reduction}},
                         Sense::LE, 0.0);
        M.add_constraint({{V.flowlen_at(i, j, a), 1.0}, {V.delta[Network::arc_edge(a)], -1.0}},
                         Sense::LE, 0.0);
      }
    } else {
      std::vector<std::pair<int, double>> len_terms;
      for (int a : pair_arcs[t]) len_terms.push_back({V.flowlen_at(i, j, a), 1.0});
      M.add_constraint(std::move(len_terms), Sense::LE, inst.R, "len_" + pr);
      for (int a : pair_arcs[t]) {
        const Edge& ed = net.edge(Network::arc_edge(a));
        M.add_constraint({{V.flowlen_at(i, j, a), 1.0},
                          {V.flow_at(i, j, a), -ed.length},
                          {V.delta[Network::arc_edge(a)], 1.0}},
                         Sense::GE, 0.0);
        M.add_constraint({{V.flowlen_at(i, j, a), 1.0}, {V.delta[Network::arc_edge(a)], 1.0}},
                         Sense::LE, ed.length);
      }
    }
    for (int k = 0; k < n; ++k) {
      if (k == i || k == j) continue;
      std::vector<std::pair<int, double>> terms;
      const auto [out_arcs, in_arcs] = net.incident_arcs(k);
      for (int a : out_arcs)
        if (V.flow_at(i, j, a) >= 0) terms.push_back({V.flow_at(i, j, a), 1.0});
      for (int a : in_arcs)
        if (V.flow_at(i, j, a) >= 0) terms.push_back({V.flow_at(i, j, a), -1.0});
      if (!terms.empty())
        M.add_constraint(std::move(terms), Sense::EQ, 0.0, "cons_" + pr + "_" + num(k + 1));
    }
    {
      std::vector<std::pair<int, double>> terms;
      const auto [out_arcs, in_arcs] = net.incident_arcs(i);
      for (int a : out_arcs)
        if (V.flow_at(i, j, a) >= 0) terms.push_back({V.flow_at(i, j, a), 1.0});
      terms.push_back({V.y_at(i, j), -1.0});
      terms.push_back({V.y_at(j, i), -1.0});
      M.add_constraint(std::move(terms), Sense::EQ, 0.0, "src_" + pr);
    }
    {
      std::vector<std::pair<int, double>> terms;
      const auto [out_arcs, in_arcs] = net.incident_arcs(j);
      for (int a : in_arcs)
        if (V.flow_at(i, j, a) >= 0) terms.push_back({V.flow_at(i, j, a), 1.0});
      terms.push_back({V.y_at(i, j), -1.0});
      terms.push_back({V.y_at(j, i), -1.0});
      M.add_constraint(std::move(terms), Sense::EQ, 0.0, "snk_" + pr);
    }
  }

  if (spec.vi.count(ViFamily::NoTwoWayArc)) {
    for (std::size_t t = 0; t < flow_pairs.size(); ++t) {
      const auto [i, j] = flow_pairs[t];
      for (int e = 0; e < m; ++e) {
        const Edge& ed = net.edge(e);
        if (ed.k == i || ed.k == j || ed.q == i || ed.q == j) continue;
        const int f1 = V.flow_at(i, j, 2 * e);
        const int f2 = V.flow_at(i, j, 2 * e + 1);
        if (f1 >= 0 && f2 >= 0)
          M.add_constraint({{f1, 1.0}, {f2, 1.0}}, Sense::LE, 1.0);
      }
    }
  }
  if (spec.vi.count(ViFamily::PathChain)) {
    for (std::size_t t = 0; t < flow_pairs.size(); ++t) {
      const auto [i, j] = flow_pairs[t];
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const auto [out_arcs, in_arcs] = net.incident_arcs(k);
        for (int a : in_arcs) {
          const int f = V.flow_at(i, j, a);
          if (f < 0) continue;
          {
            std::vector<std::pair<int, double>> terms{{V.y_at(i, j), 1.0}, {f, 1.0}};
            if (V.y_at(k, j) >= 0) terms.push_back({V.y_at(k, j), -1.0});
            M.add_constraint(std::move(terms), Sense::LE, 1.0);
          }
          {
            std::vector<std::pair<int, double>> terms{{V.y_at(j, i), 1.0}, {f, 1.0}};
            if (V.y_at(k, i) >= 0) terms.push_back({V.y_at(k, i), -1.0});
            M.add_constraint(std::move(terms), Sense::LE, 1.0);
          }
        }
      }
    }
  }
  const auto closest_rows = [&](bool upgraded) {
    for (int i = 0; i < n; ++i) {
      for (int j : vhat(dist, i, inst.R)) {
        std::vector<std::pair<int, double>> terms{{V.x[j], 1.0}, {V.x[i], -1.0}};
        for (int k = 0; k < n; ++k) {
          if (k == i || V.y_at(i, k) < 0) continue;
          const double dk = upgraded ? report->lb_upgraded(i, k) : dist(i, k);
          if (dk <= dist(i, j) + kTol) terms.push_back({V.y_at(i, k), -1.0});
        }
        M.add_constraint(std::move(terms), Sense::LE, 0.0);
      }
    }
  };
  if (spec.vi.count(ViFamily::ClosestBefore)) closest_rows(false);
  if (spec.vi.count(ViFamily::ClosestUpgraded)) closest_rows(true);

  return bm;
}

namespace {

// shared core of the two successor formulations
void build_path_core(const Instance& inst, const FormulationSpec& spec, BuiltModel& bm) {
  const Network& net = inst.net;
  const int n = net.node_count();
  const int m = net.edge_count();
  MilpModel& M = bm.model;
  VariableMap& V = bm.vars;
  V.n = n;
  V.m = m;
  V.x.resize(n);
  V.dvar.resize(n);
  V.delta.resize(m);
  V.z.assign(2 * m, -1);

  for (int j = 0; j < n; ++j)
    V.x[j] = M.add_variable("x_" + num(j + 1), 0.0, 1.0,
                            spec.relax_x ? VarKind::Continuous : VarKind::Binary);
  for (int a = 0; a < 2 * m; ++a)
    V.z[a] = M.add_variable("z_" + num(net.arc_tail(a) + 1) + "_" + num(net.arc_head(a) + 1), 0.0,
                            1.0, VarKind::Binary);
  for (int i = 0; i < n; ++i)
    V.dvar[i] = M.add_variable("d_" + num(i + 1), 0.0, inst.R, VarKind::Continuous);
  for (int e = 0; e < m; ++e)
    V.delta[e] = M.add_variable("del_" + num(e + 1), 0.0, net.edge(e).max_reduction,
                                VarKind::Continuous);

  std::vector<std::pair<int, double>> obj;
  for (int i = 0; i < n; ++i) obj.push_back({V.x[i], inst.demands[i]});
  for (int a = 0; a < 2 * m; ++a) obj.push_back({V.z[a], inst.demands[net.arc_tail(a)]});
  M.set_objective(ObjSense::Maximize, std::move(obj));

  {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < n; ++j) terms.push_back({V.x[j], 1.0});
    M.add_constraint(std::move(terms), Sense::EQ, inst.p, "p_facilities");
  }
  {
    std::vector<std::pair<int, double>> terms;
    for (int e = 0; e < m; ++e) terms.push_back({V.delta[e], net.edge(e).unit_cost});
    M.add_constraint(std::move(terms), Sense::LE, inst.B, "budget");
  }
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> terms{{V.x[i], 1.0}};
    const auto [out_arcs, in_arcs] = net.incident_arcs(i);
    for (int a : out_arcs) terms.push_back({V.z[a], 1.0});
    M.add_constraint(std::move(terms), Sense::LE, 1.0, "assign_" + num(i + 1));
  }
  // a successor node must itself be covered or host a facility
  for (int a = 0; a < 2 * m; ++a) {
    const int k = net.arc_tail(a);
    const int i = net.arc_head(a);
    std::vector<std::pair<int, double>> terms{{V.z[a], 1.0}, {V.x[i], -1.0}};
    const auto [out_arcs, in_arcs] = net.incident_arcs(i);
    for (int b : out_arcs)
      if (net.arc_head(b) != k) terms.push_back({V.z[b], -1.0});
    M.add_constraint(std::move(terms), Sense::LE, 0.0,
                     "trans_" + num(k + 1) + "_" + num(i + 1));
  }
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> terms{{V.dvar[i], 1.0}};
    const auto [out_arcs, in_arcs] = net.incident_arcs(i);
    for (int a : out_arcs) terms.push_back({V.z[a], -inst.R});
    M.add_constraint(std::move(terms), Sense::LE, 0.0, "dcap_" + num(i + 1));
  }
  const bool reinforced = spec.vi.count(ViFamily::ReinforcedDistance) > 0;
  for (int a = 0; a < 2 * m; ++a) {
    const int i = net.arc_tail(a);
    const int j = net.arc_head(a);
    const int e = Network::arc_edge(a);
    const Edge& ed = net.edge(e);
    std::vector<std::pair<int, double>> terms{{V.dvar[i], 1.0},
                                              {V.dvar[j], -1.0},
                                              {V.z[a], -(ed.length + inst.R)},
                                              {V.delta[e], 1.0}};
    if (reinforced) {
      const double bonus = std::max(inst.R - ed.length, 0.0);
      if (bonus > 0) terms.push_back({V.z[a ^ 1], -bonus});
    }
    M.add_constraint(std::move(terms), Sense::GE, -inst.R,
                     "dist_" + num(i + 1) + "_" + num(j + 1));
  }
  for (int e = 0; e < m; ++e) {
    const Edge& ed = net.edge(e);
    M.add_constraint({{V.delta[e], 1.0}, {V.z[2 * e], -ed.max_reduction},
                      {V.z[2 * e + 1], -ed.max_reduction}},
                     Sense::LE, 0.0, "dred_" + num(e + 1));
  }
  if (spec.vi.count(ViFamily::SuccessorLowerBound)) {
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> terms{{V.dvar[i], 1.0}};
      const auto [out_arcs, in_arcs] = net.incident_arcs(i);
      for (int a : out_arcs) {
        const Edge& ed = net.edge(Network::arc_edge(a));
        terms.push_back({V.z[a], -(ed.length - ed.max_reduction)});
      }
      M.add_constraint(std::move(terms), Sense::GE, 0.0);
    }
  }
}

void add_closest_successor_rows(const Instance& inst, BuiltModel& bm, const DistanceMatrix& dist) {
  const Network& net = inst.net;
  MilpModel& M = bm.model;
  VariableMap& V = bm.vars;
  for (int i = 0; i < net.node_count(); ++i) {
    for (int j : vhat(dist, i, inst.R)) {
      std::vector<std::pair<int, double>> terms{{V.x[j], 1.0}, {V.x[i], -1.0}};
      const auto [out_arcs, in_arcs] = net.incident_arcs(i);
      for (int a : out_arcs) {
        const Edge& ed = net.edge(Network::arc_edge(a));
        if (ed.length - ed.max_reduction <= dist(i, j) + kTol) terms.push_back({V.z[a], -1.0});
      }
      M.add_constraint(std::move(terms), Sense::LE, 0.0);
    }
  }
}

std::vector<std::array<int, 3>> enumerate_triangles(const Network& net, int cap);

void add_triangle_rows(const Instance& inst, BuiltModel& bm) {
  const Network& net = inst.net;
  for (const auto& tri : enumerate_triangles(net, bm.spec.triangle_cap)) {
    std::vector<std::pair<int, double>> terms;
    for (int e : tri) {
      terms.push_back({bm.vars.z[2 * e], 1.0});
      terms.push_back({bm.vars.z[2 * e + 1], 1.0});
    }
    bm.model.add_constraint(std::move(terms), Sense::LE, 2.0);
  }
}

}  // namespace

BuiltModel build_path(const Instance& inst, const FormulationSpec& spec) {
  check_spec(inst, spec, nullptr);
  check_families(spec);
  if (spec.use_preprocess)
    throw std::invalid_argument("the successor formulation has no pairwise preprocessing");
  BuiltModel bm;
  bm.spec = spec;
  build_path_core(inst, spec, bm);
  if (spec.vi.count(ViFamily::ClosestSuccessor))
    add_closest_successor_rows(inst, bm, shortest_distances(inst.net, false));
  if (spec.vi.count(ViFamily::TriangleCycle)) add_triangle_rows(inst, bm);
  return bm;
}

BuiltModel build_path_cov(const Instance& inst, const PreprocessReport& report,
                          const FormulationSpec& spec) {
  check_spec(inst, spec, &report);
  check_families(spec);
  const Network& net = inst.net;
  const int n = net.node_count();

  BuiltModel bm;
  bm.spec = spec;
  build_path_core(inst, spec, bm);
  MilpModel& M = bm.model;
  VariableMap& V = bm.vars;

  const auto removed = [&](int i, int j) { return spec.use_preprocess && report.pair_removed(i, j); };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || removed(i, j)) continue;
      V.y[V.ykey(i, j)] = M.add_variable("y_" + num(i + 1) + "_" + num(j + 1), 0.0, 1.0,
                                         spec.relax_y ? VarKind::Continuous : VarKind::Binary);
    }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || V.y_at(i, j) < 0) continue;
      M.add_constraint({{V.y_at(i, j), 1.0}, {V.x[j], -1.0}}, Sense::LE, 0.0,
                       "open_" + num(i + 1) + "_" + num(j + 1));
    }
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int k = 0; k < n; ++k)
      if (k != i && V.y_at(i, k) >= 0) terms.push_back({V.y_at(i, k), 1.0});
    const auto [out_arcs, in_arcs] = net.incident_arcs(i);
    for (int a : out_arcs) terms.push_back({V.z[a], -1.0});
    M.add_constraint(std::move(terms), Sense::EQ, 0.0, "link_" + num(i + 1));
  }
  // linked nodes are assigned to the same facility
  for (int e = 0; e < net.edge_count(); ++e) {
    const Edge& ed = net.edge(e);
    for (const auto& [i, j] : {std::pair{ed.k, ed.q}, std::pair{ed.q, ed.k}}) {
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (V.y_at(j, k) < 0) continue;  // row weakens to a consequence of others
        std::vector<std::pair<int, double>> terms{
            {V.z[2 * e], 1.0}, {V.z[2 * e + 1], 1.0}, {V.y_at(j, k), 1.0}};
        if (V.y_at(i, k) >= 0) terms.push_back({V.y_at(i, k), -1.0});
        M.add_constraint(std::move(terms), Sense::LE, 1.0);
      }
      {
        std::vector<std::pair<int, double>> terms{
            {V.z[2 * e], 1.0}, {V.z[2 * e + 1], 1.0}, {V.x[j], 1.0}};
        if (V.y_at(i, j) >= 0) terms.push_back({V.y_at(i, j), -1.0});
        M.add_constraint(std::move(terms), Sense::LE, 1.0);
      }
    }
  }
  if (spec.vi.count(ViFamily::AssignmentLowerBound)) {
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> terms{{V.dvar[i], 1.0}};
      for (int k = 0; k < n; ++k) {
        if (k == i || V.y_at(i, k) < 0) continue;
        const double lb = report.lb_upgraded(i, k);
        if (std::isfinite(lb) && lb > 0) terms.push_back({V.y_at(i, k), -lb});
      }
      M.add_constraint(std::move(terms), Sense::GE, 0.0);
    }
  }
  if (spec.vi.count(ViFamily::ClosestUpgraded)) {
    const DistanceMatrix& dist = report.dist();
    for (int i = 0; i < n; ++i) {
      for (int j : vhat(dist, i, inst.R)) {
        std::vector<std::pair<int, double>> terms{{V.x[j], 1.0}, {V.x[i], -1.0}};
        for (int k = 0; k < n; ++k) {
          if (k == i || V.y_at(i, k) < 0) continue;
          if (report.lb_upgraded(i, k) <= dist(i, j) + kTol)
            terms.push_back({V.y_at(i, k), -1.0});
        }
        M.add_constraint(std::move(terms), Sense::LE, 0.0);
      }
    }
  }
  if (spec.vi.count(ViFamily::ClosestSuccessor))
    add_closest_successor_rows(inst, bm, report.dist());
  if (spec.vi.count(ViFamily::TriangleCycle)) add_triangle_rows(inst, bm);
  return bm;
}

BuiltModel build_formulation(const Instance& inst, const PreprocessReport* report,
                             const FormulationSpec& spec) {
  switch (spec.kind) {
    case FormulationKind::FlowCov: return build_flow_cov(inst, report, spec);
    case FormulationKind::Path: return build_path(inst, spec);
    case FormulationKind::PathCov:
      if (!report) throw std::invalid_argument("this formulation needs a preprocessing report");
      return build_path_cov(inst, *report, spec);
  }
  throw std::logic_error("unknown formulation kind");
}

ModelSizeReduction model_size_report(const MilpModel& raw, const MilpModel& preprocessed) {
  const auto pct = [](int a, int b) {
    if (a == 0) throw std::invalid_argument("model_size_report: raw count is zero");
    return 100.0 * (a - b) / a;
  };
  return {pct(raw.num_constraints(), preprocessed.num_constraints()),
          pct(raw.num_vars(), preprocessed.num_vars()),
          pct(raw.num_binary_vars(), preprocessed.num_binary_vars())};
}

// ---------------------------------------------------------------------------
// solution extraction and lifting

namespace {

struct Forest {
  std::vector<double> dist;   // distance to the nearest facility under l-delta
  std::vector<int> root;      // assigned facility, -1 outside radius
  std::vector<int> pred_arc;  // arc (toward the facility) leaving this node, -1 at roots
};

// multi-source shortest paths; ties prefer the lower facility index, then
// the lower predecessor node index, so the forest is deterministic
Forest build_forest(const Network& net, const std::vector<double>& len,
                    const std::vector<int>& facilities, double radius) {
  const int n = net.node_count();
  Forest f;
  f.dist.assign(n, kInf);
  f.root.assign(n, -1);
  f.pred_arc.assign(n, -1);
  using Item = std::tuple<double, int, int>;  // (dist, root, node)
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int fac : facilities) {
    f.dist[fac] = 0.0;
    f.root[fac] = fac;
    heap.push({0.0, fac, fac});
  }
  while (!heap.empty()) {
    const auto [du, rt, u] = heap.top();
    heap.pop();
    if (du > f.dist[u] + 1e-15 || rt != f.root[u]) continue;
    for (const auto& [e, v] : net.adjacency(u)) {
      const double cand = du + len[e];
      const bool better = cand < f.dist[v] - 1e-12 ||
                          (cand < f.dist[v] + 1e-12 && rt < f.root[v]);
      if (better) {
        f.dist[v] = std::min(cand, f.dist[v]);
        f.root[v] = rt;
        // arc from v toward u
        f.pred_arc[v] = net.edge(e).k == v ? 2 * e : 2 * e + 1;
        heap.push({cand, rt, v});
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (f.dist[i] > radius) {
      f.root[i] = -1;
      f.pred_arc[i] = -1;
    }
  return f;
}

}  // namespace

UpMclpSolution extract_solution(const Instance& inst, const BuiltModel& bm,
                                const SolveResult& result) {
  if (result.values.empty())
    throw std::invalid_argument("extract_solution: result carries no variable values");
  const Network& net = inst.net;
  const int n = net.node_count();
  const VariableMap& V = bm.vars;

  UpMclpSolution sol;
  sol.delta.resize(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e)
    sol.delta[e] = std::clamp(result.values[V.delta[e]], 0.0, net.edge(e).max_reduction);

  std::vector<double> len(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e) len[e] = net.edge(e).length - sol.delta[e];
  const DistanceMatrix dd = shortest_distances(net, len);

  // facilities: round, then complete/trim deterministically if the relaxed
  // x-values did not land on exactly p ones
  std::vector<int> ones, rest;
  for (int j = 0; j < n; ++j) {
    if (result.values[V.x[j]] >= 0.5) ones.push_back(j);
    else rest.push_back(j);
  }
  if (static_cast<int>(ones.size()) > inst.p) {
    std::stable_sort(ones.begin(), ones.end(), [&](int a, int b) {
      return result.values[V.x[a]] > result.values[V.x[b]];
    });
    ones.resize(inst.p);
    std::sort(ones.begin(), ones.end());
  } else if (static_cast<int>(ones.size()) < inst.p) {
    const int need = inst.p - static_cast<int>(ones.size());
    // exact completion: at desk scale try every completion and keep the one
    // with the best recomputed coverage (ties to the lexicographically first)
    double combos = 1.0;
    for (int t = 0; t < need; ++t) combos = combos * (rest.size() - t) / (t + 1);
    const auto coverage_of = [&](const std::vector<int>& fac) {
      double v = 0.0;
      for (int i = 0; i < n; ++i) {
        double nearest = kInf;
        for (int f : fac) nearest = std::min(nearest, dd(i, f));
        if (nearest <= inst.R + 1e-6) v += inst.demands[i];
      }
      return v;
    };
    if (combos <= 20000.0 && need <= static_cast<int>(rest.size())) {
      std::vector<int> pick(need);
      for (int t = 0; t < need; ++t) pick[t] = t;
      double best = -1.0;
      std::vector<int> best_fac;
      while (true) {
        std::vector<int> fac = ones;
        for (int t : pick) fac.push_back(rest[t]);
        const double v = coverage_of(fac);
        if (v > best + 1e-12) {
          best = v;
          best_fac = fac;
        }
        int t = need - 1;
        while (t >= 0 && pick[t] == static_cast<int>(rest.size()) - need + t) --t;
        if (t < 0) break;
        ++pick[t];
        for (int s = t + 1; s < need; ++s) pick[s] = pick[s - 1] + 1;
      }
      ones = best_fac;
    } else {
      // large models: fill by fractional value, then demand
      std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
        const double xa = result.values[V.x[a]], xb = result.values[V.x[b]];
        if (xa != xb) return xa > xb;
        return inst.demands[a] > inst.demands[b];
      });
      for (int t = 0; t < need; ++t) ones.push_back(rest[t]);
    }
    std::sort(ones.begin(), ones.end());
  }
  sol.facilities = ones;

  sol.objective = 0.0;
  for (int i = 0; i < n; ++i) {
    double nearest = kInf;
    for (int f : sol.facilities) nearest = std::min(nearest, dd(i, f));
    if (nearest <= inst.R + 1e-6) {
      sol.covered.push_back(i);
      sol.objective += inst.demands[i];
    }
  }
  if (std::isfinite(result.objective) &&
      std::abs(sol.objective - result.objective) > 1e-6)
    sol.notes = "recomputed objective " + std::to_string(sol.objective) +
                " differs from solver value " + std::to_string(result.objective);

  sol.stats.wall_seconds = result.wall_seconds;
  sol.stats.gap = result.relative_gap();
  sol.stats.nodes = result.node_count;
  sol.stats.n_constraints = bm.model.num_constraints();
  sol.stats.n_vars = bm.model.num_vars();
  sol.stats.n_binvars = bm.model.num_binary_vars();
  sol.stats.status = to_string(result.status);
  verify_solution(inst, sol);
  return sol;
}

std::vector<double> lift_solution(const Instance& inst, const BuiltModel& bm,
                                  const UpMclpSolution& sol) {
  const Network& net = inst.net;
  const int n = net.node_count();
  const VariableMap& V = bm.vars;
  std::vector<double> x(bm.model.num_vars(), 0.0);

  for (int f : sol.facilities) x[V.x[f]] = 1.0;
  std::vector<double> len(net.edge_count());
  for (int e = 0; e < net.edge_count(); ++e) {
    x[V.delta[e]] = sol.delta[e];
    len[e] = net.edge(e).length - sol.delta[e];
  }

  // assignments must stay strictly within radius for every model row to hold
  const Forest forest = build_forest(net, len, sol.facilities, inst.R + 1e-9);

  std::vector<char> is_fac(n, 0);
  for (int f : sol.facilities) is_fac[f] = 1;

  // pre-upgrade closest assignment keeps the closest-before rows satisfied
  std::vector<int> assign(n, -1);
  const bool pre_closest = bm.spec.vi.count(ViFamily::ClosestBefore) > 0;
  DistanceMatrix d0;
  if (pre_closest) d0 = shortest_distances(net, false);
  for (int i = 0; i < n; ++i) {
    if (is_fac[i]) continue;
    int target = forest.root[i];
    if (pre_closest) {
      double best = kInf;
      int arg = -1;
      for (int f : sol.facilities)
        if (d0(i, f) < best - 1e-12) {
          best = d0(i, f);
          arg = f;
        }
      if (arg >= 0 && best <= inst.R + 1e-9) target = arg;
    }
    assign[i] = target;
  }

  if (bm.spec.kind == FormulationKind::FlowCov) {
    for (int i = 0; i < n; ++i) {
      const int j = assign[i];
      if (j < 0) continue;
      if (V.y_at(i, j) >= 0) x[V.y_at(i, j)] = 1.0;
      const int a = std::min(i, j), b = std::max(i, j);
      if (V.flow.empty()) continue;
      // walk a shortest path from a to b and set the pair's flow
      std::vector<int> arcs;
      if (pre_closest || forest.root[i] != j) {
        // recompute an explicit path under l-delta from a to b
        const std::vector<double> dist_a = single_source_distances(net, len, a);
        int cur = b;
        std::vector<int> rev;
        while (cur != a) {
          int nxt = -1, via = -1;
          for (const auto& [e, v] : net.adjacency(cur)) {
            if (std::abs(dist_a[v] + len[e] - dist_a[cur]) < 1e-9) {
              if (nxt < 0 || v < nxt) {
                nxt = v;
                via = e;
              }
            }
          }
          if (via < 0) break;
          rev.push_back(net.edge(via).k == nxt ? 2 * via : 2 * via + 1);
          cur = nxt;
        }
        arcs.assign(rev.rbegin(), rev.rend());
      } else {
        // forest path i -> root, oriented from min(i,j) to max(i,j)
        std::vector<int> chain;
        for (int cur = i; cur != j;) {
          const int arc = forest.pred_arc[cur];
          chain.push_back(arc);
          cur = net.arc_head(arc);
        }
        if (a == i) arcs = chain;
        else {
          for (auto it = chain.rbegin(); it != chain.rend(); ++it) arcs.push_back(*it ^ 1);
        }
      }
      for (int arc : arcs) {
        const int fv = V.flow_at(a, b, arc);
        if (fv < 0) continue;
        x[fv] = 1.0;
        const int e = Network::arc_edge(arc);
        const int lv = V.flowlen_at(a, b, arc);
        if (lv >= 0)
          x[lv] = bm.spec.flow_variant == FlowVariant::Gamma ? sol.delta[e]
                                                             : net.edge(e).length - sol.delta[e];
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      if (is_fac[i] || forest.root[i] < 0) continue;
      x[V.z[forest.pred_arc[i]]] = 1.0;
      x[V.dvar[i]] = forest.dist[i];
      if (!V.y.empty() && V.y_at(i, forest.root[i]) >= 0) x[V.y_at(i, forest.root[i])] = 1.0;
    }
  }
  return x;
}

// triangle enumeration shared with the separation routines
namespace {
std::vector<std::array<int, 3>> enumerate_triangles(const Network& net, int cap) {
  const int n = net.node_count();
  std::vector<std::vector<int>> edge_of(n, std::vector<int>(n, -1));
  for (int e = 0; e < net.edge_count(); ++e) {
    edge_of[net.edge(e).k][net.edge(e).q] = e;
    edge_of[net.edge(e).q][net.edge(e).k] = e;
  }
  std::vector<std::array<int, 3>> out;
  for (int i = 0; i < n && static_cast<int>(out.size()) < cap; ++i)
    for (int j = i + 1; j < n && static_cast<int>(out.size()) < cap; ++j) {
      if (edge_of[i][j] < 0) continue;
      for (int k = j + 1; k < n && static_cast<int>(out.size()) < cap; ++k) {
        if (edge_of[i][k] < 0 || edge_of[j][k] < 0) continue;
        out.push_back({edge_of[i][j], edge_of[j][k], edge_of[i][k]});
      }
    }
  return out;
}
}  // namespace

}  // namespace upmclp

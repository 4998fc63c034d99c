#include "upmclp/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "upmclp/oracle.hpp"
#include "upmclp/preprocess.hpp"

namespace upmclp {

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

constexpr const char* kHeader =
    "schema,instance,formulation,t_pre,t_total,status,best_obj,best_bound,lp_value,gap_pct,"
    "gap_bs_pct,gap_lp_pct,nodes,constraints,vars,binvars,rc_pct,rv_pct,rbv_pct,cuts,solved,error";

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kHeader << "\n";
  for (const RunRecord& r : records) {
    out << "1," << r.instance_id << ',' << r.formulation << ',' << fmt(r.t_pre) << ','
        << fmt(r.t_total) << ',' << r.status << ',' << fmt(r.best_obj) << ','
        << fmt(r.best_bound) << ',' << fmt(r.lp_value) << ',' << fmt(r.gap_pct) << ','
        << fmt(r.gap_bs_pct) << ',' << fmt(r.gap_lp_pct) << ',' << r.nodes << ','
        << r.n_constraints << ',' << r.n_vars << ',' << r.n_binvars << ',' << fmt(r.rc_pct) << ','
        << fmt(r.rv_pct) << ',' << fmt(r.rbv_pct) << ',' << r.cuts_added << ','
        << (r.solved ? 1 : 0) << ',' << r.error << "\n";
  }
}

std::vector<RunRecord> read_records_csv(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (line.rfind("schema,", 0) != 0)
    throw std::runtime_error("unrecognized results CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cols.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    cols.push_back(cur);
    if (cols.size() < 22) throw std::runtime_error("results CSV row has too few columns");
    RunRecord r;
    r.instance_id = cols[1];
    r.formulation = cols[2];
    r.t_pre = std::stod(cols[3]);
    r.t_total = std::stod(cols[4]);
    r.status = cols[5];
    r.best_obj = cols[6] == "inf" || cols[6] == "-inf" ? 0.0 : std::stod(cols[6]);
    r.best_bound = cols[7] == "inf" || cols[7] == "-inf" ? 0.0 : std::stod(cols[7]);
    r.lp_value = std::stod(cols[8]);
    r.gap_pct = std::stod(cols[9]);
    r.gap_bs_pct = std::stod(cols[10]);
    r.gap_lp_pct = std::stod(cols[11]);
    r.nodes = std::stol(cols[12]);
    r.n_constraints = std::stoi(cols[13]);
    r.n_vars = std::stoi(cols[14]);
    r.n_binvars = std::stoi(cols[15]);
    r.rc_pct = std::stod(cols[16]);
    r.rv_pct = std::stod(cols[17]);
    r.rbv_pct = std::stod(cols[18]);
    r.cuts_added = std::stoi(cols[19]);
    r.solved = cols[20] == "1";
    r.error = cols[21];
    out.push_back(std::move(r));
  }
  return out;
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = line.substr(pos, eq - pos);
    const std::string value = line.substr(eq + 1);
    const auto items = split(value, ',');
    if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& s : items) cfg.seeds.push_back(std::stoull(s));
    } else if (key == "sizes") {
      cfg.sizes.clear();
      for (const auto& s : items) cfg.sizes.push_back(std::stoi(s));
    } else if (key == "budget_fractions") {
      cfg.budget_fractions.clear();
      for (const auto& s : items) cfg.budget_fractions.push_back(std::stod(s));
    } else if (key == "coverage_targets") {
      cfg.coverage_targets.clear();
      for (const auto& s : items) cfg.coverage_targets.push_back(std::stod(s));
    } else if (key == "p_rules") {
      cfg.p_rules.clear();
      for (const auto& s : items) {
        if (s == "1") cfg.p_rules.push_back(PRule::One);
        else if (s == "n10") cfg.p_rules.push_back(PRule::NOver10);
        else if (s == "n20") cfg.p_rules.push_back(PRule::NOver20);
        else throw std::runtime_error("config line " + std::to_string(lineno) + ": bad p rule " + s);
      }
    } else if (key == "formulations") {
      cfg.formulations = items;
    } else if (key == "vi") {
      cfg.vi_extra = items;
    } else if (key == "cuts") {
      cfg.cut_extra = items;
    } else if (key == "time_limit") {
      cfg.time_limit = std::stod(value);
    } else if (key == "no_preprocess") {
      cfg.use_preprocess = std::stoi(value) == 0;
    } else if (key == "size_report") {
      cfg.size_report = std::stoi(value) != 0;
    } else if (key == "jobs") {
      cfg.jobs = std::stoi(value);
    } else {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  return cfg;
}

FormulationSpec spec_for_token(const std::string& token, bool use_preprocess) {
  std::string base = token;
  bool plus_vi = false;
  if (base.size() > 3 && base.substr(base.size() - 3) == "+vi") {
    plus_vi = true;
    base = base.substr(0, base.size() - 3);
  }
  FlowVariant fv = FlowVariant::Gamma;
  const auto kind = parse_formulation(base, &fv);
  if (!kind) throw std::runtime_error("unknown formulation token: " + token);
  FormulationSpec spec = FormulationSpec::defaults(*kind, fv);
  if (*kind != FormulationKind::Path) spec.use_preprocess = use_preprocess;
  if (plus_vi) {
    if (*kind == FormulationKind::Path) {
      spec.vi.insert(ViFamily::ClosestSuccessor);
      spec.cuts.insert(CutFamily::TriangleCycle);
    } else if (*kind == FormulationKind::PathCov) {
      spec.vi.insert(ViFamily::ClosestUpgraded);
      spec.cuts.insert(CutFamily::TriangleCycle);
    } else {
      spec.vi.insert(ViFamily::ClosestUpgraded);
    }
  }
  return spec;
}

namespace {

struct RunTask {
  GeneratorConfig gc;
  std::string instance_id;
  std::string token;
};

RunRecord execute_run(const RunTask& task, const ExperimentConfig& cfg,
                      const SolverConfig& scfg) {
  RunRecord rec;
  rec.instance_id = task.instance_id;
  try {
    const Instance norm = normalize(generate_geometric(task.gc)).first;
    const PreprocessReport report = classify_pairs(norm);
    rec.t_pre = report.elapsed_pre;

    FormulationSpec spec = spec_for_token(task.token, cfg.use_preprocess);
    for (const auto& v : cfg.vi_extra) {
      const auto f = parse_vi_family(v);
      if (!f) throw std::runtime_error("unknown vi family: " + v);
      spec.vi.insert(*f);
    }
    for (const auto& c : cfg.cut_extra) {
      const auto f = parse_cut_family(c);
      if (!f) throw std::runtime_error("unknown cut family: " + c);
      spec.cuts.insert(*f);
    }
    rec.formulation = spec.config_string();

    const auto t0 = std::chrono::steady_clock::now();
    const BuiltModel bm = build_formulation(norm, &report, spec);
    if (cfg.size_report && spec.use_preprocess) {
      FormulationSpec raw_spec = spec;
      raw_spec.use_preprocess = false;
      const BuiltModel raw = build_formulation(norm, &report, raw_spec);
      const ModelSizeReduction red = model_size_report(raw.model, bm.model);
      rec.rc_pct = red.constraints_pct;
      rec.rv_pct = red.vars_pct;
      rec.rbv_pct = red.binvars_pct;
    }
    const SolveResult lp = solve_lp(bm.model, scfg);
    rec.lp_value = lp.objective;
    const auto gens = make_cut_generators(bm, norm);
    const SolveResult mip = solve_mip(bm.model, gens, scfg);
    rec.t_total = report.elapsed_pre +
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.status = to_string(mip.status);
    rec.solved = mip.status == SolveStatus::Optimal;
    rec.best_bound = mip.best_bound;
    rec.nodes = mip.node_count;
    rec.n_constraints = bm.model.num_constraints();
    rec.n_vars = bm.model.num_vars();
    rec.n_binvars = bm.model.num_binary_vars();
    rec.gap_pct = 100.0 * mip.relative_gap();
    for (const auto& [name, cnt] : mip.cut_counts) rec.cuts_added += cnt;
    if (!mip.values.empty()) rec.best_obj = extract_solution(norm, bm, mip).objective;
  } catch (const std::exception& ex) {
    rec.error = ex.what();
    rec.status = rec.status.empty() ? "Error" : rec.status;
  }
  return rec;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  SolverConfig scfg;
  scfg.time_limit = cfg.time_limit;

  std::vector<RunTask> tasks;
  for (int n : cfg.sizes)
    for (double bf : cfg.budget_fractions)
      for (PRule pr : cfg.p_rules)
        for (double ct : cfg.coverage_targets)
          for (std::uint64_t seed : cfg.seeds) {
            GeneratorConfig gc;
            gc.n = n;
            gc.seed = seed;
            gc.budget_fraction = bf;
            gc.coverage_target = ct;
            gc.p_rule = pr;
            std::ostringstream id;
            id << "geo-n" << n << "-b" << bf << "-p"
               << (pr == PRule::One ? "1" : pr == PRule::NOver10 ? "n10" : "n20") << "-c" << ct
               << "-s" << seed;
            for (const std::string& token : cfg.formulations)
              tasks.push_back({gc, id.str(), token});
          }

  // runs are independent; records land in task order no matter who finishes
  // first
  std::vector<RunRecord> records(tasks.size());
  const int workers = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      records[t] = execute_run(tasks[t], cfg, scfg);
      if (progress)
        *progress << records[t].instance_id << " " << tasks[t].token << " -> "
                  << records[t].status << " obj=" << fmt(records[t].best_obj) << " t="
                  << fmt(records[t].t_total) << "\n";
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w)
      threads.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1))
          records[t] = execute_run(tasks[t], cfg, scfg);
      });
    for (auto& th : threads) th.join();
    if (progress)
      for (std::size_t t = 0; t < tasks.size(); ++t)
        *progress << records[t].instance_id << " " << tasks[t].token << " -> "
                  << records[t].status << " obj=" << fmt(records[t].best_obj) << "\n";
  }

  // cross-formulation gap columns per instance group
  for (std::size_t begin = 0; begin < records.size();) {
    std::size_t end = begin;
    while (end < records.size() && records[end].instance_id == records[begin].instance_id) ++end;
    double bst = 0.0;
    for (std::size_t t = begin; t < end; ++t) bst = std::max(bst, records[t].best_obj);
    for (std::size_t t = begin; t < end; ++t)
      if (bst > 0) {
        records[t].gap_bs_pct = 100.0 * (bst - records[t].best_obj) / bst;
        records[t].gap_lp_pct = 100.0 * (records[t].lp_value - bst) / bst;
      }
    begin = end;
  }
  return records;
}

std::vector<GroupSummary> summarize(const std::vector<RunRecord>& records, double time_limit) {
  // group key: everything before the seed suffix
  std::map<std::pair<std::string, std::string>, GroupSummary> groups;
  for (const RunRecord& r : records) {
    std::string g = r.instance_id;
    const auto pos = g.rfind("-s");
    if (pos != std::string::npos) g = g.substr(0, pos);
    auto& s = groups[{g, r.formulation}];
    s.group = g;
    s.formulation = r.formulation;
    ++s.runs;
    if (r.solved) ++s.solved;
    s.avg_t_total += r.solved ? r.t_total : time_limit;
    s.avg_gap_pct += r.gap_pct;
    s.avg_gap_bs_pct += r.gap_bs_pct;
    s.avg_gap_lp_pct += r.gap_lp_pct;
    s.avg_rc_pct += r.rc_pct;
    s.avg_rv_pct += r.rv_pct;
    s.avg_rbv_pct += r.rbv_pct;
  }
  std::vector<GroupSummary> out;
  for (auto& [key, s] : groups) {
    const double k = s.runs;
    s.avg_t_total /= k;
    s.avg_gap_pct /= k;
    s.avg_gap_bs_pct /= k;
    s.avg_gap_lp_pct /= k;
    s.avg_rc_pct /= k;
    s.avg_rv_pct /= k;
    s.avg_rbv_pct /= k;
    out.push_back(s);
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<GroupSummary>& groups) {
  out << "group,formulation,runs,solved,avg_t_total,avg_gap_pct,avg_gap_bs_pct,avg_gap_lp_pct,"
         "avg_rc_pct,avg_rv_pct,avg_rbv_pct\n";
  for (const GroupSummary& g : groups)
    out << g.group << ',' << g.formulation << ',' << g.runs << ',' << g.solved << ','
        << fmt(g.avg_t_total) << ',' << fmt(g.avg_gap_pct) << ',' << fmt(g.avg_gap_bs_pct) << ','
        << fmt(g.avg_gap_lp_pct) << ',' << fmt(g.avg_rc_pct) << ',' << fmt(g.avg_rv_pct) << ','
        << fmt(g.avg_rbv_pct) << "\n";
}

std::map<std::string, std::vector<std::pair<double, int>>> profile_points(
    const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<double>> times;
  for (const RunRecord& r : records)
    if (r.solved) times[r.formulation].push_back(r.t_total);
  std::map<std::string, std::vector<std::pair<double, int>>> out;
  for (auto& [form, ts] : times) {
    std::sort(ts.begin(), ts.end());
    std::vector<std::pair<double, int>> pts;
    for (std::size_t t = 0; t < ts.size(); ++t) {
      // collapse equal times into a single step
      if (!pts.empty() && ts[t] == pts.back().first) pts.back().second = static_cast<int>(t + 1);
      else pts.push_back({ts[t], static_cast<int>(t + 1)});
    }
    out[form] = std::move(pts);
  }
  return out;
}

void write_profile_csv(std::ostream& out,
                       const std::map<std::string, std::vector<std::pair<double, int>>>& pts) {
  out << "formulation,time,solved\n";
  for (const auto& [form, v] : pts)
    for (const auto& [t, c] : v) out << form << ',' << fmt(t) << ',' << c << "\n";
}

}  // namespace upmclp

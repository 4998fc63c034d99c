#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "upmclp/formulations.hpp"
#include "upmclp/metrics.hpp"
#include "upmclp/oracle.hpp"
#include "upmclp/preprocess.hpp"

using namespace upmclp;

namespace {

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  return read_instance(in);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

FormulationSpec spec_from_flags(const std::string& formulation, const std::string& vi,
                                const std::string& cuts, bool no_preprocess) {
  FormulationSpec spec = spec_for_token(formulation, !no_preprocess);
  std::stringstream vs(vi);
  std::string tok;
  while (std::getline(vs, tok, ',')) {
    if (tok.empty()) continue;
    if (tok == "none") {
      spec.vi.clear();
      continue;
    }
    const auto f = parse_vi_family(tok);
    if (!f) throw std::runtime_error("unknown vi family: " + tok);
    spec.vi.insert(*f);
  }
  std::stringstream cs(cuts);
  while (std::getline(cs, tok, ',')) {
    if (tok.empty()) continue;
    const auto c = parse_cut_family(tok);
    if (!c) throw std::runtime_error("unknown cut family: " + tok);
    spec.cuts.insert(*c);
  }
  return spec;
}

void print_solution(const UpMclpSolution& sol) {
  std::cout << "objective " << sol.objective << "\nfacilities";
  for (int f : sol.facilities) std::cout << ' ' << f + 1;
  std::cout << "\ncovered";
  for (int c : sol.covered) std::cout << ' ' << c + 1;
  std::cout << "\nreductions";
  for (std::size_t e = 0; e < sol.delta.size(); ++e)
    if (sol.delta[e] > 1e-9) std::cout << ' ' << e + 1 << ':' << sol.delta[e];
  std::cout << "\nstatus " << sol.stats.status << " nodes " << sol.stats.nodes << " time "
            << sol.stats.wall_seconds << "s";
  if (!sol.notes.empty()) std::cout << "\nnote " << sol.notes;
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Up-MCLP solver toolkit: locate facilities and upgrade edges under a budget"};
  app.require_subcommand(1);

  // shared flags
  std::string instance_path, out_path, formulation = "pathcov", vi_list, cut_list;
  std::string export_lp_path;
  bool no_preprocess = false;
  double time_limit = 300.0;
  std::uint64_t seed = 1;
  int jobs = 1;

  auto* gen = app.add_subcommand("generate", "generate a random instance");
  int gen_n = 20;
  std::string gen_topology = "geometric", gen_prule = "n10", orlib_path;
  double gen_bfrac = 0.01, gen_ctarget = 0.5;
  gen->add_option("--n", gen_n, "node count");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--topology", gen_topology, "geometric | orlib");
  gen->add_option("--orlib-file", orlib_path, "OR-Library p-median file (topology=orlib)");
  gen->add_option("--budget-fraction", gen_bfrac, "budget as a fraction of B_max");
  gen->add_option("--coverage-target", gen_ctarget, "plain-MCLP coverage share fixing R");
  gen->add_option("--p-rule", gen_prule, "1 | n10 | n20");
  gen->add_option("--out", out_path, "output instance file (default stdout)");

  auto* pre = app.add_subcommand("preprocess", "pairwise classification report");
  pre->add_option("--instance", instance_path, "instance file")->required();
  pre->add_option("--out", out_path, "report CSV (default stdout)");
  bool pre_simplex = false, pre_exact = false;
  pre->add_flag("--lp-simplex", pre_simplex, "bound the pair subproblem via the generic simplex");
  pre->add_flag("--exact-subproblem", pre_exact, "exact pairwise subproblem (tiny instances)");

  auto* build = app.add_subcommand("build", "build a formulation and export it");
  build->add_option("--instance", instance_path, "instance file")->required();
  build->add_option("--formulation", formulation,
                    "flowcov-alpha | flowcov-gamma | path | pathcov (optionally +vi)");
  build->add_option("--vi", vi_list, "comma list of extra row families, or 'none'");
  build->add_option("--cuts", cut_list, "comma list of cut families");
  build->add_flag("--no-preprocess", no_preprocess, "skip the pairwise reductions");
  build->add_option("--export-lp", export_lp_path, "write LP-format model here")->required();

  auto* solve = app.add_subcommand("solve", "solve an instance with one formulation");
  solve->add_option("--instance", instance_path, "instance file")->required();
  solve->add_option("--formulation", formulation, "formulation token");
  solve->add_option("--vi", vi_list, "extra row families");
  solve->add_option("--cuts", cut_list, "cut families");
  solve->add_flag("--no-preprocess", no_preprocess, "skip the pairwise reductions");
  solve->add_option("--time-limit", time_limit, "seconds");
  solve->add_option("--export-lp", export_lp_path, "also export the model");

  auto* oracle_cmd = app.add_subcommand("oracle", "exact reference solve (tiny instances)");
  oracle_cmd->add_option("--instance", instance_path, "instance file")->required();
  int oracle_max_nodes = 7;
  oracle_cmd->add_option("--max-nodes", oracle_max_nodes, "node-count guard");

  auto* cal = app.add_subcommand("calibrate-radius", "radius for a plain-MCLP coverage target");
  cal->add_option("--instance", instance_path, "instance file")->required();
  double cal_target = 0.5;
  cal->add_option("--coverage-target", cal_target, "demand share to cover");

  auto* exp = app.add_subcommand("experiment", "batch runs driven by a config file");
  std::string exp_config;
  exp->add_option("--config", exp_config, "key=value config file")->required();
  exp->add_option("--out", out_path, "per-run CSV (default stdout)");
  std::string summary_path;
  exp->add_option("--summary-out", summary_path, "aggregated CSV");
  exp->add_option("--jobs", jobs, "parallel runs (record order stays deterministic)");

  auto* prof = app.add_subcommand("profile", "performance-profile points from a results CSV");
  prof->add_option("--instance", instance_path, "results CSV from 'experiment'")->required();
  prof->add_option("--out", out_path, "profile CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      GeneratorConfig gc;
      gc.n = gen_n;
      gc.seed = seed;
      gc.budget_fraction = gen_bfrac;
      gc.coverage_target = gen_ctarget;
      gc.p_rule = gen_prule == "1" ? PRule::One : gen_prule == "n20" ? PRule::NOver20 : PRule::NOver10;
      // calibration needs an exact plain-MCLP value per candidate radius;
      // enumerate facility sets while that fits, otherwise fall back to the
      // covering MILP
      const MclpValueFn calibrator = [](const Instance& in2, double R) {
        const int n2 = in2.net.node_count();
        double sets = 1.0;
        for (int t = 0; t < in2.p; ++t) sets = sets * (n2 - t) / (t + 1);
        Instance probe = in2;
        probe.R = R;
        if (n2 <= 62 && sets <= 2e6) {
          OracleLimits lim;
          lim.max_cover_subsets = 3000000;
          return solve_mclp_exact(probe, lim).first;
        }
        return mclp_value_via_mip(probe, R);
      };
      Instance inst = gen_topology == "orlib"
                          ? [&] {
                              std::ifstream in(orlib_path);
                              if (!in) throw std::runtime_error("cannot open " + orlib_path);
                              return read_orlibrary(in, gc, calibrator);
                            }()
                          : generate_geometric(gc, calibrator);
      if (out_path.empty()) write_instance(std::cout, inst);
      else {
        auto out = open_out(out_path);
        write_instance(out, inst);
      }
    } else if (pre->parsed()) {
      const Instance inst = normalize(load_instance(instance_path)).first;
      PreprocessOptions opts;
      if (pre_simplex) opts.lp_mode = PreprocessOptions::LpMode::Simplex;
      opts.exact_subproblem = pre_exact;
      const PreprocessReport report = classify_pairs(inst, opts);
      if (out_path.empty()) write_report_csv(report, std::cout);
      else {
        auto out = open_out(out_path);
        write_report_csv(report, out);
      }
      std::cerr << "preprocess time " << report.elapsed_pre << "s\n";
    } else if (build->parsed()) {
      const Instance inst = normalize(load_instance(instance_path)).first;
      const FormulationSpec spec = spec_from_flags(formulation, vi_list, cut_list, no_preprocess);
      const PreprocessReport report = classify_pairs(inst);
      const BuiltModel bm = build_formulation(inst, &report, spec);
      auto out = open_out(export_lp_path);
      export_lp_file(bm.model, out);
      std::cout << "model " << spec.config_string() << ": " << bm.model.num_constraints()
                << " rows, " << bm.model.num_vars() << " cols, " << bm.model.num_binary_vars()
                << " binary\n";
    } else if (solve->parsed()) {
      const Instance inst = normalize(load_instance(instance_path)).first;
      const FormulationSpec spec = spec_from_flags(formulation, vi_list, cut_list, no_preprocess);
      const PreprocessReport report = classify_pairs(inst);
      const BuiltModel bm = build_formulation(inst, &report, spec);
      if (!export_lp_path.empty()) {
        auto out = open_out(export_lp_path);
        export_lp_file(bm.model, out);
      }
      SolverConfig scfg;
      scfg.time_limit = time_limit;
      const auto gens = make_cut_generators(bm, inst);
      const SolveResult res = solve_mip(bm.model, gens, scfg);
      if (res.values.empty()) {
        std::cout << "status " << to_string(res.status) << "\n";
        return res.status == SolveStatus::Infeasible ? 0 : 2;
      }
      print_solution(extract_solution(inst, bm, res));
    } else if (oracle_cmd->parsed()) {
      const Instance inst = normalize(load_instance(instance_path)).first;
      OracleLimits limits;
      limits.max_nodes = oracle_max_nodes;
      print_solution(solve_upmclp_exact(inst, limits));
    } else if (cal->parsed()) {
      const Instance inst = load_instance(instance_path);
      const auto [R, warn] = calibrate_radius(inst, cal_target, {});
      std::cout << "R " << R << (warn ? " (target unreachable, largest distance returned)" : "")
                << "\n";
    } else if (exp->parsed()) {
      std::ifstream in(exp_config);
      if (!in) throw std::runtime_error("cannot open config: " + exp_config);
      ExperimentConfig cfg = ExperimentConfig::parse(in);
      cfg.jobs = jobs;
      const std::vector<RunRecord> records = run_experiment(cfg, &std::cerr);
      if (out_path.empty()) write_records_csv(std::cout, records);
      else {
        auto out = open_out(out_path);
        write_records_csv(out, records);
      }
      if (!summary_path.empty()) {
        auto out = open_out(summary_path);
        write_summary_csv(out, summarize(records, cfg.time_limit));
      }
      for (const RunRecord& r : records)
        if (!r.error.empty()) return 2;
    } else if (prof->parsed()) {
      std::ifstream in(instance_path);
      if (!in) throw std::runtime_error("cannot open results CSV: " + instance_path);
      const auto pts = profile_points(read_records_csv(in));
      if (out_path.empty()) write_profile_csv(std::cout, pts);
      else {
        auto out = open_out(out_path);
        write_profile_csv(out, pts);
      }
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "upmclp/formulations.hpp"
#include "upmclp/instance.hpp"

namespace upmclp {

// One row of the experiment CSV (schema v1).
struct RunRecord {
  std::string instance_id;
  std::string formulation;  // spec echo (key=value)
  double t_pre = 0.0;
  double t_total = 0.0;
  std::string status;
  double best_obj = 0.0;
  double best_bound = 0.0;
  double lp_value = 0.0;
  double gap_pct = 0.0;     // solver relative gap
  double gap_bs_pct = 0.0;  // against the best objective across formulations
  double gap_lp_pct = 0.0;  // LP relaxation against that best objective
  long nodes = 0;
  int n_constraints = 0;
  int n_vars = 0;
  int n_binvars = 0;
  double rc_pct = 0.0;  // preprocessing size reductions; 0 when not applicable
  double rv_pct = 0.0;
  double rbv_pct = 0.0;
  int cuts_added = 0;
  bool solved = false;
  std::string error;
};

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(std::istream& in);

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds = {1};
  std::vector<int> sizes = {10};
  std::vector<double> budget_fractions = {0.01};
  std::vector<double> coverage_targets = {0.5};
  std::vector<PRule> p_rules = {PRule::NOver10};
  std::vector<std::string> formulations = {"flowcov-gamma", "pathcov"};
  std::vector<std::string> vi_extra;    // family tokens added on top of defaults
  std::vector<std::string> cut_extra;   // cut family tokens
  bool use_preprocess = true;
  bool size_report = true;  // also build the unpreprocessed twin for R% columns
  double time_limit = 300.0;
  int jobs = 1;

  static ExperimentConfig parse(std::istream& in);  // key=value lines, '#' comments
};

// Builds the FormulationSpec a CLI token expands to ("flowcov-alpha",
// "flowcov-gamma", "path", "path+vi", "pathcov", "pathcov+vi").
FormulationSpec spec_for_token(const std::string& token, bool use_preprocess);

// Runs every (instance, formulation) pair in deterministic config order,
// fills the cross-formulation gap columns per instance group, and returns
// the records. Failures land in the record's error field.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, std::ostream* progress);

// Table-style aggregation: groups over seeds, averaging times (limit hits
// count at the limit), gaps and reduction percentages.
struct GroupSummary {
  std::string group;        // size/budget/p/target key
  std::string formulation;
  int runs = 0;
  int solved = 0;
  double avg_t_total = 0.0;
  double avg_gap_pct = 0.0;
  double avg_gap_bs_pct = 0.0;
  double avg_gap_lp_pct = 0.0;
  double avg_rc_pct = 0.0;
  double avg_rv_pct = 0.0;
  double avg_rbv_pct = 0.0;
};
std::vector<GroupSummary> summarize(const std::vector<RunRecord>& records, double time_limit);
void write_summary_csv(std::ostream& out, const std::vector<GroupSummary>& groups);

// Performance profile: per formulation, step points (time, #solved by then).
std::map<std::string, std::vector<std::pair<double, int>>> profile_points(
    const std::vector<RunRecord>& records);
void write_profile_csv(std::ostream& out,
                       const std::map<std::string, std::vector<std::pair<double, int>>>& pts);

}  // namespace upmclp

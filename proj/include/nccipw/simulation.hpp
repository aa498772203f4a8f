#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nccipw/analysis.hpp"
#include "nccipw/cohort.hpp"
#include "nccipw/perturbation.hpp"
#include "nccipw/sampling.hpp"

namespace ncc {

struct SimConfig {
  std::size_t n_cohort = 10000;
  double pi1 = 0.5;
  int m = 3;
  bool matching = false;
  std::vector<double> match_tol{0.0, 1.0};
  double t0 = 1.0;
  ModelKind model = ModelKind::Cox;
  Link link = Link::Logit;
  std::size_t n_reps = 1000;
  std::size_t n_perturb = 1000;
  double fpr_target = 0.05;
  double level = 0.95;
  CutoffMode cutoff_mode = CutoffMode::Frozen;
  std::uint64_t master_seed = 20240101;

  /// Throws InputError naming the offending key.
  void validate() const;
  AnalysisConfig analysis() const;
  NccDesign design() const;
};

/// Generated cohort with the latent times kept for the truth oracle.
struct SimCohort {
  Cohort cohort;
  std::vector<double> event_time;    // T†
  std::vector<double> censor_time;   // C
};

double standard_normal_cdf(double x);

SimCohort generate_cohort(std::size_t n, std::uint64_t seed);

/// Truth per parameter in parameter_names order (fpr is the target itself).
/// Cached per (model, link, t0, fpr_target).
std::vector<double> true_values(const SimConfig& config);

std::vector<std::string> sim_parameter_names();

/// Parameters shown in the report tables: everything except fpr.
std::vector<std::size_t> report_parameter_indices();

struct SchemeResult {
  std::vector<std::optional<double>> values;
  FitStatus status = FitStatus::MaxIterations;
  bool converged() const { return status == FitStatus::Converged; }
};

struct ReplicationRecord {
  std::size_t rep_id = 0;
  SchemeResult full, samuelsen, ipw_new;
  std::optional<PerturbationResult> perturbation;  // new weight only
  double pi1_realized = 0.0;
  std::size_t n_cases = 0;
  std::size_t n_selected = 0;
};

/// Seeds: cohort derive(master, {rep, 0}); sample derive(master, {rep, 1});
/// perturbations derive(master, {rep, 2}).
ReplicationRecord run_replication(const SimConfig& config, std::size_t rep_id, unsigned perturb_threads = 1);

struct AggregateRow {
  std::string parameter;
  double truth = 0.0;
  std::optional<double> bias_full, bias_samuelsen, esd_samuelsen, bias_new, esd_new, pase, coverage;
  std::size_t nonconv_samuelsen = 0;
  std::size_t nonconv_new = 0;
  std::size_t coverage_excluded = 0;
};

struct AggregateReport {
  std::vector<AggregateRow> rows;
  std::size_t n_records = 0;
};

AggregateReport aggregate(const std::vector<ReplicationRecord>& records, const std::vector<double>& truths,
                          const std::vector<std::string>& names, const std::vector<std::size_t>& which);

struct SimulationResult {
  std::vector<ReplicationRecord> records;
  std::vector<double> truths;
  AggregateReport report;
};

SimulationResult run_simulation(const SimConfig& config, unsigned threads);

}  // namespace ncc

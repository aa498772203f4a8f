// nccipw: NCC sampling, IPW estimation, perturbation inference, and the simulation study.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nccipw/analysis.hpp"
#include "nccipw/error.hpp"
#include "nccipw/io.hpp"
#include "nccipw/perturbation.hpp"
#include "nccipw/rng.hpp"
#include "nccipw/sampling.hpp"
#include "nccipw/simulation.hpp"
#include "nccipw/weights.hpp"

namespace fs = std::filesystem;
using ncc::io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

using Clock = std::chrono::steady_clock;

std::optional<std::vector<double>> parse_match(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return ncc::io::parse_double_list(text, "--match");
}

void write_manifest(const fs::path& dir, const std::string& command, Json config, Json inputs, Json outputs,
                    std::uint64_t seed, Clock::time_point start) {
  Json m;
  m["command"] = command;
  m["version"] = std::string(ncc::io::version());
  m["config"] = std::move(config);
  m["inputs"] = std::move(inputs);
  m["outputs"] = std::move(outputs);
  m["master_seed"] = seed;
  m["duration_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  ncc::io::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  unsigned threads = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto start = Clock::now();
  const ncc::io::SimGrid grid = ncc::io::read_sim_config(a.config);
  const fs::path out = a.out;
  fs::create_directories(out);

  Json cells = Json::array();
  Json outputs = Json::array();
  for (const ncc::SimConfig& cell : grid.cells()) {
    const std::string name = ncc::io::cell_name(cell);
    std::fprintf(stderr, "simulate: %s (%zu replications, B=%zu)\n", name.c_str(), cell.n_reps, cell.n_perturb);
    const ncc::SimulationResult res = ncc::run_simulation(cell, a.threads);

    std::string lines;
    for (const auto& r : res.records) lines += ncc::io::record_to_json(cell, r, res.truths).dump() + "\n";
    const fs::path report = out / (name + "_report.csv");
    const fs::path records = out / (name + "_records.jsonl");
    ncc::io::write_text(report, ncc::io::report_csv(res.report));
    ncc::io::write_text(records, lines);
    cells.push_back(ncc::io::config_to_json(cell));
    outputs.push_back(report.string());
    outputs.push_back(records.string());
  }
  Json config;
  config["config_file"] = a.config;
  config["threads"] = a.threads;
  config["cells"] = cells;
  write_manifest(out, "simulate", config, Json::array({a.config}), outputs, grid.base.master_seed, start);
  return kExitOk;
}

// ---- sample ---------------------------------------------------------------

struct SampleArgs {
  std::string cohort;
  double pi1 = 1.0;
  int m = 1;
  std::string match;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  const auto start = Clock::now();
  const ncc::io::CohortFile cf = ncc::io::read_cohort_csv(a.cohort);
  ncc::NccDesign design;
  design.pi1 = a.pi1;
  design.m = a.m;
  design.match_tol = parse_match(a.match);
  design.validate();

  ncc::Rng rng(ncc::derive_seed(a.seed, {1}));
  const ncc::NccSample s = ncc::sample(cf.cohort, design, rng);
  const fs::path out = a.out;
  ncc::io::write_sample(out, s);

  Json config;
  config["pi1"] = a.pi1;
  config["m"] = a.m;
  config["match"] = design.match_tol ? Json(*design.match_tol) : Json(nullptr);
  config["pi1_realized"] = s.pi1_realized;
  config["n_cases"] = s.n_cases();
  write_manifest(out, "sample", config, Json::array({a.cohort}),
                 Json::array({(out / "sample.csv").string(), (out / "pairs.csv").string()}), a.seed, start);
  return kExitOk;
}

// ---- estimate -------------------------------------------------------------

struct EstimateArgs {
  std::string cohort;
  std::string sample;
  std::string model = "cox";
  std::string link = "logit";
  double t0 = 1.0;
  std::string weight = "new";
  std::optional<double> pi1;
  std::string match;
  std::size_t B = 0;
  double fpr_target = 0.05;
  double level = 0.95;
  std::string cutoff_mode = "frozen";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
};

Json named(const std::vector<std::string>& names, const std::vector<std::optional<double>>& v) {
  Json j;
  for (std::size_t k = 0; k < names.size(); ++k) j[names[k]] = ncc::io::optional_json(v[k]);
  return j;
}

int cmd_estimate(const EstimateArgs& a) {
  const auto start = Clock::now();
  const ncc::io::CohortFile cf = ncc::io::read_cohort_csv(a.cohort);
  const ncc::Cohort& cohort = cf.cohort;
  const auto match_tol = parse_match(a.match);
  const ncc::NccSample s = ncc::io::read_sample(a.sample, cohort, match_tol);
  const ncc::RiskSets risk(cohort, match_tol);

  ncc::AnalysisConfig ac;
  ac.model = ncc::parse_model(a.model);
  ac.link = ncc::parse_link(a.link);
  ac.t0 = a.t0;
  ac.fpr_target = a.fpr_target;
  ac.cutoff_mode = ncc::parse_cutoff_mode(a.cutoff_mode);
  ac.validate();
  const ncc::WeightScheme scheme = ncc::parse_weight_scheme(a.weight);
  if (a.pi1 && !(*a.pi1 > 0.0 && *a.pi1 <= 1.0)) throw ncc::InputError("--pi1 must lie in (0, 1]");

  const ncc::SamplingWeights w = ncc::make_weights(scheme, s, cohort, a.pi1);
  const ncc::StepSurvival G = ncc::km_censoring_survival(cohort);
  const ncc::Estimates est = ncc::estimate(cohort, w.values, G, ac);
  const auto names = ncc::parameter_names(cf.marker_names);
  const auto values = est.values();

  Json r;
  r["model"] = std::string(ncc::to_string(ac.model));
  r["link"] = std::string(ncc::to_string(est.fit.link));
  r["t0"] = ac.t0;
  r["weight"] = std::string(ncc::to_string(scheme));
  r["pi1"] = a.pi1 ? *a.pi1 : s.pi1_realized;
  r["alpha"] = ncc::io::optional_json(est.fit.alpha);
  Json beta = Json::array();
  for (Eigen::Index k = 0; k < est.fit.beta.size(); ++k) beta.push_back(ncc::io::optional_json(est.fit.beta[k]));
  r["beta"] = beta;
  r["converged"] = est.fit.converged();
  r["status"] = std::string(ncc::to_string(est.fit.status));
  r["iterations"] = est.fit.iterations;
  r["score_norm"] = est.fit.score_norm;
  r["censoring_clamped"] = est.censoring_clamped;
  Json acc;
  acc["t0"] = ac.t0;
  acc["cutoff"] = ncc::io::optional_json(est.accuracy.cutoff);
  acc["cutoff_at_maximum"] = est.accuracy.cutoff_at_maximum;
  acc["tpr"] = ncc::io::optional_json(est.accuracy.tpr);
  acc["fpr"] = ncc::io::optional_json(est.accuracy.fpr);
  acc["ppv"] = ncc::io::optional_json(est.accuracy.ppv);
  acc["npv"] = ncc::io::optional_json(est.accuracy.npv);
  acc["auc"] = ncc::io::optional_json(est.accuracy.auc);
  r["accuracy"] = acc;
  r["estimates"] = named(names, values);

  if (a.B > 0) {
    ncc::PerturbationSettings ps;
    ps.B = a.B;
    ps.seed = ncc::derive_seed(a.seed, {2});
    ps.threads = a.threads;
    ps.level = a.level;
    const ncc::PerturbationResult p = ncc::run_perturbation(cohort, s, risk, scheme, ac, est, ps, a.pi1);
    Json pj;
    pj["B"] = p.b_total;
    pj["b_used"] = p.b_used;
    pj["level"] = a.level;
    pj["cutoff_mode"] = std::string(ncc::to_string(ac.cutoff_mode));
    pj["se"] = named(names, p.se);
    pj["ci_lower"] = named(names, p.ci_lower);
    pj["ci_upper"] = named(names, p.ci_upper);
    r["perturbation"] = pj;
  }

  const fs::path out = a.out;
  ncc::io::write_text(out / "result.json", r.dump(2) + "\n");
  std::string wcsv = "id,w\n";
  for (std::size_t j = 0; j < w.size(); ++j) wcsv += std::to_string(j) + "," + ncc::io::format_double(w[j]) + "\n";
  ncc::io::write_text(out / "weights.csv", wcsv);

  Json config;
  config["model"] = a.model;
  config["link"] = a.link;
  config["t0"] = a.t0;
  config["weight"] = a.weight;
  config["pi1"] = a.pi1 ? Json(*a.pi1) : Json(nullptr);
  config["match"] = match_tol ? Json(*match_tol) : Json(nullptr);
  config["B"] = a.B;
  config["fpr_target"] = a.fpr_target;
  config["level"] = a.level;
  config["cutoff_mode"] = a.cutoff_mode;
  config["threads"] = a.threads;
  write_manifest(out, "estimate", config, Json::array({a.cohort, a.sample}),
                 Json::array({(out / "result.json").string(), (out / "weights.csv").string()}), a.seed, start);
  return kExitOk;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> files;
  std::string out;
};

int cmd_report(const ReportArgs& a) {
  const auto start = Clock::now();
  if (a.files.empty()) throw ncc::InputError("report needs at least one record file");
  std::optional<Json> config;
  std::vector<double> truths;
  std::vector<ncc::ReplicationRecord> records;
  for (const auto& f : a.files) {
    const std::string text = ncc::io::read_text(f);
    std::size_t pos = 0, lineno = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      const std::string line = text.substr(pos, end - pos);
      pos = end + 1;
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::parse_error&) {
        throw ncc::InputError(f + ":" + std::to_string(lineno) + ": not a JSON record");
      }
      if (!j.contains("config") || !j.contains("truth"))
        throw ncc::InputError(f + ":" + std::to_string(lineno) + ": not a replication record");
      if (!config) {
        config = j.at("config");
        truths = j.at("truth").get<std::vector<double>>();
      } else if (*config != j.at("config")) {
        throw ncc::InputError(f + ":" + std::to_string(lineno) + ": record comes from a different configuration");
      }
      records.push_back(ncc::io::record_from_json(j));
    }
  }
  if (records.empty()) throw ncc::InputError("no records found");
  std::sort(records.begin(), records.end(), [](const auto& x, const auto& y) { return x.rep_id < y.rep_id; });

  const auto report =
      ncc::aggregate(records, truths, ncc::sim_parameter_names(), ncc::report_parameter_indices());
  const fs::path out = a.out;
  ncc::io::write_text(out / "report.csv", ncc::io::report_csv(report));
  Json files = Json::array();
  for (const auto& f : a.files) files.push_back(f);
  Json cfg;
  cfg["records"] = records.size();
  cfg["cell"] = *config;
  write_manifest(out, "report", cfg, files, Json::array({(out / "report.csv").string()}),
                 config->at("master_seed").get<std::uint64_t>(), start);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse-probability-weighted estimation for nested case-control studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ncc::io::version()));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the simulation study for every configured cell");
  simulate->add_option("--config", sim.config, "key=value configuration file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "Draw an NCC sample from a cohort CSV");
  sample->add_option("--cohort", smp.cohort, "Cohort CSV")->required()->check(CLI::ExistingFile);
  sample->add_option("--pi1", smp.pi1, "Fraction of events sampled as cases")->required();
  sample->add_option("--m", smp.m, "Controls per case")->required();
  sample->add_option("--match", smp.match, "Matching tolerances, comma separated");
  sample->add_option("--seed", smp.seed, "Master seed");
  sample->add_option("--out", smp.out, "Output directory")->required();

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Fit a model and accuracy measures with perturbation inference");
  estimate->add_option("--cohort", est.cohort, "Cohort CSV")->required()->check(CLI::ExistingFile);
  estimate->add_option("--sample", est.sample, "Directory holding sample.csv and pairs.csv")->required();
  estimate->add_option("--model", est.model, "cox or glm")->check(CLI::IsMember({"cox", "glm"}));
  estimate->add_option("--link", est.link, "GLM link: logit or cloglog")->check(CLI::IsMember({"logit", "cloglog"}));
  estimate->add_option("--t0", est.t0, "Prediction horizon");
  estimate->add_option("--weight", est.weight, "new, samuelsen, or full")
      ->check(CLI::IsMember({"new", "samuelsen", "full"}));
  estimate->add_option("--pi1", est.pi1, "Case fraction used in the new weight (default: realized)");
  estimate->add_option("--match", est.match, "Matching tolerances used when sampling");
  estimate->add_option("--B", est.B, "Perturbation replicates (0 = point estimates only)");
  estimate->add_option("--fpr-target", est.fpr_target, "FPR defining the classification cutoff");
  estimate->add_option("--level", est.level, "Confidence level");
  estimate->add_option("--cutoff-mode", est.cutoff_mode, "frozen or resolve")
      ->check(CLI::IsMember({"frozen", "resolve"}));
  estimate->add_option("--seed", est.seed, "Master seed");
  estimate->add_option("--threads", est.threads, "Worker threads (0 = all cores)");
  estimate->add_option("--out", est.out, "Output directory")->required();

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Aggregate replication records into a report table");
  report->add_option("files", rep.files, "Record files (JSON lines)")->required()->check(CLI::ExistingFile);
  report->add_option("--out", rep.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*sample) return cmd_sample(smp);
    if (*estimate) return cmd_estimate(est);
    if (*report) return cmd_report(rep);
  } catch (const ncc::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: malformed record: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}

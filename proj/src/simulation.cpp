#include "nccipw/simulation.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

#include "nccipw/error.hpp"
#include "nccipw/parallel.hpp"
#include "nccipw/rng.hpp"

namespace ncc {

void SimConfig::validate() const {
  if (n_cohort < 2) throw InputError("n_cohort must be at least 2");
  if (!(pi1 > 0.0 && pi1 <= 1.0)) throw InputError("pi1 must lie in (0, 1]");
  if (m < 1) throw InputError("m must be at least 1");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw InputError("t0 must be positive");
  if (n_reps < 1) throw InputError("n_reps must be at least 1");
  if (!(fpr_target > 0.0 && fpr_target < 1.0)) throw InputError("fpr_target must lie in (0, 1)");
  if (!(level > 0.0 && level < 1.0)) throw InputError("level must lie in (0, 1)");
  if (match_tol.size() != 2) throw InputError("match_tol must have 2 entries (M1, M2)");
  for (double a : match_tol)
    if (!(a >= 0.0)) throw InputError("match_tol entries must be nonnegative");
}

AnalysisConfig SimConfig::analysis() const {
  AnalysisConfig a;
  a.model = model;
  a.link = link;
  a.t0 = t0;
  a.fpr_target = fpr_target;
  a.cutoff_mode = cutoff_mode;
  return a;
}

NccDesign SimConfig::design() const {
  NccDesign d;
  d.pi1 = pi1;
  d.m = m;
  if (matching) d.match_tol = match_tol;
  return d;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

SimCohort generate_cohort(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::gamma_distribution<double> gamma(2.0, 0.5);
  std::uniform_real_distribution<double> unif_c(0.5, 2.0);

  std::vector<double> time(n), t_true(n), c_time(n);
  std::vector<std::uint8_t> delta(n);
  RowMatrix z(static_cast<Eigen::Index>(n), 2);
  RowMatrix mv(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = normal(rng);
    const double eb = normal(rng);
    double u = unif(rng);
    while (u == 0.0) u = unif(rng);
    const double c1 = gamma(rng);
    const double c2 = unif_c(rng);
    const double e1 = normal(rng);
    const double e2 = normal(rng);

    const double bi = zi + eb;
    const double eps = std::log(-std::log1p(-u));
    const double tt = std::exp(1.5 - 0.25 * zi - 0.25 * bi + 0.5 * eps);
    const double ct = std::min(0.1 + c1, c2);
    const auto r = static_cast<Eigen::Index>(i);
    z(r, 0) = zi;
    z(r, 1) = bi;
    mv(r, 0) = standard_normal_cdf(zi + e1) > 0.5 ? 1.0 : 0.0;
    mv(r, 1) = std::floor(5.0 * standard_normal_cdf(bi + e2) + 0.5);
    t_true[i] = tt;
    c_time[i] = ct;
    time[i] = std::min(tt, ct);
    delta[i] = tt <= ct ? 1 : 0;
  }
  return SimCohort{Cohort(std::move(time), std::move(delta), std::move(z), std::move(mv)), std::move(t_true),
                   std::move(c_time)};
}

std::vector<std::string> sim_parameter_names() {
  const std::vector<std::string> markers{"Z", "B"};
  return parameter_names(markers);
}

std::vector<std::size_t> report_parameter_indices() {
  const auto names = sim_parameter_names();
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] != "fpr") out.push_back(k);
  return out;
}

namespace {

constexpr std::uint64_t kTruthSeed = 0x7472757468ULL;
constexpr std::size_t kTruthDraws = 1000000;

std::vector<double> compute_truth(const SimConfig& config) {
  const SimCohort sc = generate_cohort(kTruthDraws, kTruthSeed);
  std::vector<double> ones(kTruthDraws, 1.0);
  std::vector<std::uint8_t> all_events(kTruthDraws, 1);
  RowMatrix z = sc.cohort.markers();
  const Cohort complete(sc.event_time, all_events, std::move(z));

  ModelFit fit;
  if (config.model == ModelKind::Cox) {
    fit.model = ModelKind::Cox;
    fit.link = Link::Cloglog;
    fit.alpha = 2.0 * std::log(config.t0) - 3.0;
    fit.beta = Eigen::Vector2d(0.5, 0.5);
    fit.status = FitStatus::Converged;
  } else {
    NewtonOptions opt;
    opt.score_tol = 1e-6;
    fit = fit_glm(complete, ones, ones, config.t0, config.link, opt);
    if (!fit.converged()) throw NumericalError("truth oracle GLM fit did not converge");
  }

  const std::vector<double> scores = predict_risk(fit, complete);
  const ClassedScores cs(scores, complete, ones, config.t0);
  const auto area = auc_step_area(cs);
  const auto cut = cutoff_for_fpr(cs, config.fpr_target);
  if (!area || !cut) throw NumericalError("truth oracle produced an empty outcome class");
  const ClassificationRates rates = accuracy_at_cutoff(cs, cut->cutoff);

  std::vector<double> truth{fit.alpha};
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) truth.push_back(fit.beta[k]);
  truth.push_back(*area);
  truth.push_back(rates.tpr.value());
  truth.push_back(rates.npv.value());
  truth.push_back(rates.ppv.value());
  truth.push_back(rates.fpr.value());
  return truth;
}

}  // namespace

std::vector<double> true_values(const SimConfig& config) {
  using Key = std::tuple<int, int, double, double>;
  static std::mutex mu;
  static std::map<Key, std::vector<double>> cache;
  const Key key{static_cast<int>(config.model), config.model == ModelKind::Glm ? static_cast<int>(config.link) : -1,
                config.t0, config.fpr_target};
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  std::vector<double> truth = compute_truth(config);
  std::lock_guard lock(mu);
  return cache.emplace(key, std::move(truth)).first->second;
}

ReplicationRecord run_replication(const SimConfig& config, std::size_t rep_id, unsigned perturb_threads) {
  const SimCohort sc = generate_cohort(config.n_cohort, derive_seed(config.master_seed, {rep_id, 0}));
  const Cohort& cohort = sc.cohort;
  const NccDesign design = config.design();
  Rng rng = make_rng(config.master_seed, {rep_id, 1});
  const NccSample s = sample(cohort, design, rng);
  const RiskSets risk(cohort, design.match_tol);
  const StepSurvival G = km_censoring_survival(cohort);
  const AnalysisConfig ac = config.analysis();

  ReplicationRecord rec;
  rec.rep_id = rep_id;
  rec.pi1_realized = s.pi1_realized;
  rec.n_cases = s.n_cases();
  for (auto v : s.selected) rec.n_selected += v;

  auto run = [&](const SamplingWeights& w) {
    Estimates e = estimate(cohort, w.values, G, ac);
    return std::pair{SchemeResult{e.values(), e.fit.status}, std::move(e)};
  };
  rec.full = run(full_cohort_weight(cohort)).first;
  rec.samuelsen = run(samuelsen_weight(s, cohort)).first;
  auto [res_new, est_new] = run(new_weight(s, cohort));
  rec.ipw_new = std::move(res_new);

  if (config.n_perturb > 0) {
    PerturbationSettings ps;
    ps.B = config.n_perturb;
    ps.seed = derive_seed(config.master_seed, {rep_id, 2});
    ps.threads = perturb_threads;
    ps.level = config.level;
    rec.perturbation = run_perturbation(cohort, s, risk, WeightScheme::New, ac, est_new, ps);
  }
  return rec;
}

namespace {

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  m.n = x.size();
  if (x.empty()) return m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  if (x.size() >= 2) {
    double ss = 0.0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  }
  return m;
}

}  // namespace

AggregateReport aggregate(const std::vector<ReplicationRecord>& records, const std::vector<double>& truths,
                          const std::vector<std::string>& names, const std::vector<std::size_t>& which) {
  AggregateReport rep;
  rep.n_records = records.size();
  for (std::size_t k : which) {
    if (k >= truths.size() || k >= names.size()) throw InputError("parameter index out of range");
    AggregateRow row;
    row.parameter = names[k];
    row.truth = truths[k];

    std::vector<double> full, sam, nw, se;
    std::size_t covered = 0, eligible = 0;
    for (const ReplicationRecord& r : records) {
      auto get = [&](const SchemeResult& s) -> std::optional<double> {
        return k < s.values.size() ? s.values[k] : std::nullopt;
      };
      if (auto v = get(r.full)) full.push_back(*v);
      if (auto v = get(r.samuelsen)) sam.push_back(*v);
      if (auto v = get(r.ipw_new)) nw.push_back(*v);
      if (!r.samuelsen.converged()) ++row.nonconv_samuelsen;
      if (!r.ipw_new.converged()) ++row.nonconv_new;
      if (r.perturbation && k < r.perturbation->se.size() && r.perturbation->se[k]) {
        se.push_back(*r.perturbation->se[k]);
        if (r.perturbation->ci_lower[k] && r.perturbation->ci_upper[k]) {
          ++eligible;
          if (*r.perturbation->ci_lower[k] <= row.truth && row.truth <= *r.perturbation->ci_upper[k]) ++covered;
        }
      }
    }
    const Moments mf = moments(full), ms = moments(sam), mn = moments(nw), mse = moments(se);
    if (mf.n) row.bias_full = mf.mean - row.truth;
    if (ms.n) row.bias_samuelsen = ms.mean - row.truth;
    row.esd_samuelsen = ms.sd;
    if (mn.n) row.bias_new = mn.mean - row.truth;
    row.esd_new = mn.sd;
    if (mse.n) row.pase = mse.mean;
    if (eligible) row.coverage = static_cast<double>(covered) / static_cast<double>(eligible);
    row.coverage_excluded = records.size() - eligible;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

SimulationResult run_simulation(const SimConfig& config, unsigned threads) {
  config.validate();
  SimulationResult out;
  out.truths = true_values(config);
  out.records.resize(config.n_reps);
  const unsigned workers = resolve_threads(threads);
  if (config.n_perturb > 0 && config.n_reps < workers) {
    for (std::size_t r = 0; r < config.n_reps; ++r) out.records[r] = run_replication(config, r, workers);
  } else {
    parallel_for(config.n_reps, workers, [&](std::size_t r) { out.records[r] = run_replication(config, r, 1); });
  }
  out.report = aggregate(out.records, out.truths, sim_parameter_names(), report_parameter_indices());
  return out;
}

}  // namespace ncc

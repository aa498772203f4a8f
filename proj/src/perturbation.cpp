#include "nccipw/perturbation.hpp"

#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "nccipw/error.hpp"
#include "nccipw/parallel.hpp"

namespace ncc {

MultiplierDraw draw_multipliers(const NccSample& sample, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  MultiplierDraw d;
  d.diag.resize(sample.size());
  for (double& v : d.diag) v = expo(rng);
  d.pair.resize(sample.assignments.size());
  for (std::size_t s = 0; s < sample.assignments.size(); ++s) {
    d.pair[s].resize(sample.assignments[s].controls.size());
    for (double& v : d.pair[s]) v = expo(rng);
  }
  return d;
}

MultiplierDraw unit_multipliers(const NccSample& sample) {
  MultiplierDraw d;
  d.diag.assign(sample.size(), 1.0);
  d.pair.resize(sample.assignments.size());
  for (std::size_t s = 0; s < sample.assignments.size(); ++s) d.pair[s].assign(sample.assignments[s].controls.size(), 1.0);
  return d;
}

PerturbedDesign perturb_design(const NccSample& sample, const Cohort& cohort, const MultiplierDraw& draw,
                               const RiskSets& risk) {
  const std::size_t n = cohort.size();
  if (sample.size() != n || draw.diag.size() != n || draw.pair.size() != sample.assignments.size())
    throw InputError("multiplier draw does not match the sample");

  PerturbedDesign p;
  p.v1.resize(n);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    p.v1[j] = sample.v1[j] * draw.diag[j];
    if (cohort.is_event(j)) {
      num += draw.diag[j] * sample.v1[j];
      den += draw.diag[j];
    }
  }
  p.pi1 = num / den;

  std::vector<double> keep(n, 1.0);
  std::vector<double> case_mass(sample.assignments.size());
  for (std::size_t s = 0; s < sample.assignments.size(); ++s) {
    const auto& controls = sample.assignments[s].controls;
    if (draw.pair[s].size() != controls.size()) throw InputError("multiplier draw does not match the sample");
    double acc = 0.0;
    for (std::size_t c = 0; c < controls.size(); ++c) {
      keep[controls[c]] *= 1.0 - draw.pair[s][c];
      acc += draw.pair[s][c];
    }
    case_mass[s] = acc;
  }
  p.v0.resize(n);
  for (std::size_t j = 0; j < n; ++j) p.v0[j] = 1.0 - keep[j];
  p.p0 = inclusion_from_case_mass(cohort, sample.assignments, case_mass, risk);
  return p;
}

SamplingWeights perturb_sampling_weights(const NccSample& sample, const Cohort& cohort, const MultiplierDraw& draw,
                                         const RiskSets& risk, WeightScheme scheme, std::optional<double> pi1) {
  if (scheme == WeightScheme::FullCohort) return {draw.diag, scheme};
  const PerturbedDesign p = perturb_design(sample, cohort, draw, risk);
  if (scheme == WeightScheme::New) return {new_weight_values(cohort, p.v1, pi1.value_or(p.pi1), p.v0, p.p0), scheme};
  return {samuelsen_weight_values(cohort, sample.v1, p.v1, p.v0, p.p0), scheme};
}

Estimates perturbed_estimate(const Cohort& cohort, const NccSample& sample, const MultiplierDraw& draw,
                             const RiskSets& risk, WeightScheme scheme, const AnalysisConfig& config,
                             std::optional<double> frozen_cutoff, std::optional<double> pi1) {
  const SamplingWeights w = perturb_sampling_weights(sample, cohort, draw, risk, scheme, pi1);
  const StepSurvival G = km_censoring_survival(cohort, draw.diag);
  return estimate(cohort, w.values, G, config, frozen_cutoff);
}

namespace {

double normal_quantile(double level) {
  if (!(level >= 0.0 && level < 1.0)) throw InputError("confidence level must lie in [0, 1)");
  if (level == 0.0) return 0.0;
  return boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
}

double sample_sd(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

ScalarInterval se_ci(double point, std::span<const double> replicates, double level) {
  if (replicates.size() < 2) throw NumericalError("at least 2 usable replicates are needed for a standard error");
  const double z = normal_quantile(level);
  const double se = sample_sd(replicates);
  return {se, point - z * se, point + z * se};
}

PerturbationResult se_ci(std::span<const std::optional<double>> point,
                         std::span<const std::vector<std::optional<double>>> replicates, double level) {
  const double z = normal_quantile(level);
  const std::size_t k = point.size();
  PerturbationResult r;
  r.point.assign(point.begin(), point.end());
  r.se.resize(k);
  r.ci_lower.resize(k);
  r.ci_upper.resize(k);
  r.n_used.assign(k, 0);
  r.b_total = replicates.size();
  std::vector<double> col;
  for (std::size_t p = 0; p < k; ++p) {
    col.clear();
    for (const auto& rep : replicates) {
      if (rep.size() != k) throw InputError("replicate has the wrong number of parameters");
      if (rep[p] && std::isfinite(*rep[p])) col.push_back(*rep[p]);
    }
    r.n_used[p] = col.size();
    if (col.size() < 2) continue;
    const double se = sample_sd(col);
    r.se[p] = se;
    if (point[p]) {
      r.ci_lower[p] = *point[p] - z * se;
      r.ci_upper[p] = *point[p] + z * se;
    }
  }
  return r;
}

PerturbationResult run_perturbation(const Cohort& cohort, const NccSample& sample, const RiskSets& risk,
                                    WeightScheme scheme, const AnalysisConfig& config, const Estimates& base,
                                    const PerturbationSettings& settings, std::optional<double> pi1) {
  std::optional<double> frozen;
  if (config.cutoff_mode == CutoffMode::Frozen) frozen = base.accuracy.cutoff;

  std::vector<std::vector<std::optional<double>>> reps(settings.B);
  std::vector<std::uint8_t> converged(settings.B, 0);
  parallel_for(settings.B, settings.threads, [&](std::size_t b) {
    Rng rng(derive_seed(settings.seed, {b}));
    const MultiplierDraw draw = draw_multipliers(sample, rng);
    const Estimates e = perturbed_estimate(cohort, sample, draw, risk, scheme, config, frozen, pi1);
    converged[b] = e.fit.converged() ? 1 : 0;
    reps[b] = e.values();
  });

  PerturbationResult r = se_ci(base.values(), reps, settings.level);
  for (std::uint8_t c : converged) r.b_used += c;
  return r;
}

}  // namespace ncc

#include "nccipw/analysis.hpp"

#include <cmath>

#include "nccipw/error.hpp"

namespace ncc {

std::string_view to_string(CutoffMode m) { return m == CutoffMode::Frozen ? "frozen" : "resolve"; }

CutoffMode parse_cutoff_mode(std::string_view s) {
  if (s == "frozen") return CutoffMode::Frozen;
  if (s == "resolve") return CutoffMode::Resolve;
  throw InputError("unknown cutoff mode '" + std::string(s) + "'");
}

void AnalysisConfig::validate() const {
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw InputError("t0 must be positive");
  if (!(fpr_target > 0.0 && fpr_target < 1.0)) throw InputError("fpr_target must lie in (0, 1)");
}

std::vector<std::string> default_marker_names(std::size_t p) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < p; ++k) out.push_back("z" + std::to_string(k + 1));
  return out;
}

std::vector<std::string> parameter_names(std::span<const std::string> marker_names) {
  std::vector<std::string> out{"alpha"};
  for (const auto& m : marker_names) out.push_back("beta_" + m);
  for (const char* a : {"auc", "tpr", "npv", "ppv", "fpr"}) out.emplace_back(a);
  return out;
}

std::vector<std::optional<double>> Estimates::values() const {
  std::vector<std::optional<double>> v;
  const bool ok = fit.converged();
  v.push_back(ok ? std::optional<double>(fit.alpha) : std::nullopt);
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) v.push_back(ok ? std::optional<double>(fit.beta[k]) : std::nullopt);
  for (const auto& a : {accuracy.auc, accuracy.tpr, accuracy.npv, accuracy.ppv, accuracy.fpr})
    v.push_back(ok ? a : std::nullopt);
  return v;
}

Estimates estimate(const Cohort& cohort, std::span<const double> w, const StepSurvival& G, const AnalysisConfig& config,
                   std::optional<double> cutoff) {
  if (w.size() != cohort.size()) throw InputError("weight vector length does not match cohort size");
  Estimates est;
  est.censoring_clamped = G.clamped();
  est.accuracy.t0 = config.t0;

  const auto omega = censoring_weights(cohort, config.t0, G);
  if (config.model == ModelKind::Cox) {
    est.fit = fit_cox(cohort, w, config.t0, config.newton);
  } else {
    est.fit = fit_glm(cohort, w, omega, config.t0, config.link, config.newton);
  }
  if (!est.fit.converged()) return est;

  const auto mass = double_ipw_mass(w, omega);
  std::vector<double> scores(cohort.size(), 0.0);
  for (std::size_t i = 0; i < cohort.size(); ++i)
    if (mass[i] != 0.0) scores[i] = predict_risk(est.fit, cohort.marker_row(i));
  est.accuracy = summarize_accuracy(scores, cohort, mass, config.t0, config.fpr_target, cutoff);
  return est;
}

}  // namespace ncc

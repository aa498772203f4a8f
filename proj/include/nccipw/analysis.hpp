#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nccipw/accuracy.hpp"
#include "nccipw/cohort.hpp"
#include "nccipw/estimators.hpp"

namespace ncc {

/// How perturbed replicates choose the classification cutoff.
enum class CutoffMode {
  Frozen,   // reuse the unperturbed cutoff
  Resolve,  // re-solve FPR = target within each replicate
};

std::string_view to_string(CutoffMode m);
CutoffMode parse_cutoff_mode(std::string_view s);

struct AnalysisConfig {
  ModelKind model = ModelKind::Cox;
  Link link = Link::Logit;  // GLM only; Cox always uses cloglog
  double t0 = 1.0;
  double fpr_target = 0.05;
  CutoffMode cutoff_mode = CutoffMode::Frozen;
  NewtonOptions newton;

  void validate() const;
};

/// Parameter layout: alpha, one beta per marker, auc, tpr, npv, ppv, fpr.
std::vector<std::string> parameter_names(std::span<const std::string> marker_names);
std::vector<std::string> default_marker_names(std::size_t p);
inline constexpr std::size_t kAccuracyParams = 5;

struct Estimates {
  ModelFit fit;
  AccuracySummary accuracy;
  bool censoring_clamped = false;

  /// Values in parameter_names order; absent when the fit failed or a ratio is undefined.
  std::vector<std::optional<double>> values() const;
};

/// Fits the model under sampling weights `w` and censoring survival `G`, then
/// evaluates accuracy with masses w·ω at `cutoff` (or the FPR-target cutoff).
Estimates estimate(const Cohort& cohort, std::span<const double> w, const StepSurvival& G, const AnalysisConfig& config,
                   std::optional<double> cutoff = std::nullopt);

}  // namespace ncc

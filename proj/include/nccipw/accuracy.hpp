#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nccipw/cohort.hpp"
#include "nccipw/weights.hpp"

namespace ncc {

/// Per-subject double-IPW mass ŵ_i ω̂_{t0,i}.
std::vector<double> double_ipw_mass(std::span<const double> w, std::span<const double> omega);
std::vector<double> double_ipw_mass(const Cohort& cohort, const SamplingWeights& w, const StepSurvival& G, double t0);

/// Scores and masses split into the event class (T <= t0) and the non-event
/// class (T > t0). Subjects with zero mass are dropped.
struct ClassedScores {
  std::vector<double> event_score, event_mass;
  std::vector<double> nonevent_score, nonevent_mass;
  double event_total = 0.0;
  double nonevent_total = 0.0;

  ClassedScores(std::span<const double> scores, const Cohort& cohort, std::span<const double> mass, double t0);
};

/// Undefined ratios (empty conditioning set) are nullopt.
struct ClassificationRates {
  std::optional<double> tpr, fpr, ppv, npv;
};

/// High-risk group is score > c.
ClassificationRates accuracy_at_cutoff(const ClassedScores& cs, double c);
ClassificationRates accuracy_at_cutoff(std::span<const double> scores, const Cohort& cohort,
                                       std::span<const double> mass, double t0, double c);

/// Weighted concordance with strict inequality; ties add nothing.
std::optional<double> auc(const ClassedScores& cs);
std::optional<double> auc(std::span<const double> scores, const Cohort& cohort, std::span<const double> mass,
                          double t0);

/// Same functional as auc, computed as the area under the (FPR, TPR) step
/// curve by a sorted sweep in O(n log n).
std::optional<double> auc_step_area(const ClassedScores& cs);

struct CutoffChoice {
  double cutoff = 0.0;
  double achieved_fpr = 0.0;
  bool at_maximum = false;  // only the largest non-event score attains the target
};

/// Smallest candidate c (non-event scores, plus a value just below the
/// smallest score) with FPR(c) <= target.
std::optional<CutoffChoice> cutoff_for_fpr(const ClassedScores& cs, double target);
std::optional<CutoffChoice> cutoff_for_fpr(std::span<const double> scores, const Cohort& cohort,
                                           std::span<const double> mass, double t0, double target);

struct AccuracySummary {
  double t0 = 0.0;
  std::optional<double> cutoff;
  bool cutoff_at_maximum = false;
  std::optional<double> tpr, fpr, ppv, npv, auc;
};

/// AUC plus the four rates at either `frozen_cutoff` or the cutoff solving FPR = fpr_target.
AccuracySummary summarize_accuracy(std::span<const double> scores, const Cohort& cohort, std::span<const double> mass,
                                   double t0, double fpr_target, std::optional<double> frozen_cutoff = std::nullopt);

}  // namespace ncc

#include "nccipw/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nccipw/error.hpp"
#include "nccipw/kernels.hpp"

namespace ncc {

std::vector<double> double_ipw_mass(std::span<const double> w, std::span<const double> omega) {
  if (w.size() != omega.size()) throw InputError("weight and censoring-weight lengths differ");
  std::vector<double> m(w.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = w[i] * omega[i];
  return m;
}

std::vector<double> double_ipw_mass(const Cohort& cohort, const SamplingWeights& w, const StepSurvival& G, double t0) {
  return double_ipw_mass(w.values, censoring_weights(cohort, t0, G));
}

ClassedScores::ClassedScores(std::span<const double> scores, const Cohort& cohort, std::span<const double> mass,
                             double t0) {
  if (scores.size() != cohort.size() || mass.size() != cohort.size())
    throw InputError("score and mass vectors must match the cohort size");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mass[i] == 0.0) continue;
    if (cohort.time(i) <= t0) {
      event_score.push_back(scores[i]);
      event_mass.push_back(mass[i]);
      event_total += mass[i];
    } else {
      nonevent_score.push_back(scores[i]);
      nonevent_mass.push_back(mass[i]);
      nonevent_total += mass[i];
    }
  }
}

namespace {

std::optional<double> safe_ratio(double num, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

}  // namespace

ClassificationRates accuracy_at_cutoff(const ClassedScores& cs, double c) {
  const double tp = kernels::mass_above(cs.event_score, cs.event_mass, c);
  const double fp = kernels::mass_above(cs.nonevent_score, cs.nonevent_mass, c);
  const double tn = cs.nonevent_total - fp;
  const double fn = cs.event_total - tp;
  ClassificationRates r;
  r.tpr = safe_ratio(tp, cs.event_total);
  r.fpr = safe_ratio(fp, cs.nonevent_total);
  r.ppv = safe_ratio(tp, tp + fp);
  r.npv = safe_ratio(tn, tn + fn);
  return r;
}

ClassificationRates accuracy_at_cutoff(std::span<const double> scores, const Cohort& cohort,
                                       std::span<const double> mass, double t0, double c) {
  return accuracy_at_cutoff(ClassedScores(scores, cohort, mass, t0), c);
}

std::optional<double> auc(const ClassedScores& cs) {
  if (!(cs.event_total > 0.0) || !(cs.nonevent_total > 0.0)) return std::nullopt;
  const double num = kernels::pair_greater_sum(cs.event_score, cs.event_mass, cs.nonevent_score, cs.nonevent_mass);
  return num / (cs.event_total * cs.nonevent_total);
}

std::optional<double> auc(std::span<const double> scores, const Cohort& cohort, std::span<const double> mass,
                          double t0) {
  return auc(ClassedScores(scores, cohort, mass, t0));
}

std::optional<double> auc_step_area(const ClassedScores& cs) {
  if (!(cs.event_total > 0.0) || !(cs.nonevent_total > 0.0)) return std::nullopt;
  const std::size_t k = cs.nonevent_score.size();
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return cs.nonevent_score[a] < cs.nonevent_score[b]; });
  std::vector<double> sorted(k);
  std::vector<double> below(k + 1, 0.0);  // below[r] = mass of the r lowest non-events
  for (std::size_t r = 0; r < k; ++r) {
    sorted[r] = cs.nonevent_score[idx[r]];
    below[r + 1] = below[r] + cs.nonevent_mass[idx[r]];
  }
  // Each event contributes a vertical strip of height a_i/A over the FPR
  // interval occupied by non-events scoring strictly lower.
  double area = 0.0;
  for (std::size_t i = 0; i < cs.event_score.size(); ++i) {
    const auto r = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), cs.event_score[i]) - sorted.begin());
    area += cs.event_mass[i] * below[r];
  }
  return area / (cs.event_total * cs.nonevent_total);
}

std::optional<CutoffChoice> cutoff_for_fpr(const ClassedScores& cs, double target) {
  if (!(target > 0.0 && target <= 1.0)) throw InputError("FPR target must lie in (0, 1]");
  if (!(cs.nonevent_total > 0.0)) return std::nullopt;
  constexpr double kTol = 1e-12;

  const std::size_t k = cs.nonevent_score.size();
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return cs.nonevent_score[a] < cs.nonevent_score[b]; });

  double lowest = cs.nonevent_score[idx[0]];
  for (double s : cs.event_score) lowest = std::min(lowest, s);
  const double below_all = std::nextafter(lowest, -std::numeric_limits<double>::infinity());
  const double max_score = cs.nonevent_score[idx[k - 1]];

  // above[r] = mass of non-events at sorted positions >= r.
  std::vector<double> above(k + 1, 0.0);
  for (std::size_t r = k; r-- > 0;) above[r] = above[r + 1] + cs.nonevent_mass[idx[r]];

  const double fpr_all = above[0] / cs.nonevent_total;
  if (fpr_all <= target + kTol) return CutoffChoice{below_all, fpr_all, false};

  for (std::size_t r = 0; r < k;) {
    const double c = cs.nonevent_score[idx[r]];
    std::size_t end = r;
    while (end < k && cs.nonevent_score[idx[end]] == c) ++end;
    const double fpr = above[end] / cs.nonevent_total;
    if (fpr <= target + kTol) return CutoffChoice{c, fpr, c == max_score};
    r = end;
  }
  return CutoffChoice{max_score, 0.0, true};
}

std::optional<CutoffChoice> cutoff_for_fpr(std::span<const double> scores, const Cohort& cohort,
                                           std::span<const double> mass, double t0, double target) {
  return cutoff_for_fpr(ClassedScores(scores, cohort, mass, t0), target);
}

AccuracySummary summarize_accuracy(std::span<const double> scores, const Cohort& cohort, std::span<const double> mass,
                                   double t0, double fpr_target, std::optional<double> frozen_cutoff) {
  const ClassedScores cs(scores, cohort, mass, t0);
  AccuracySummary s;
  s.t0 = t0;
  s.auc = auc(cs);
  if (frozen_cutoff) {
    s.cutoff = frozen_cutoff;
  } else if (const auto choice = cutoff_for_fpr(cs, fpr_target)) {
    s.cutoff = choice->cutoff;
    s.cutoff_at_maximum = choice->at_maximum;
  }
  if (s.cutoff) {
    const ClassificationRates r = accuracy_at_cutoff(cs, *s.cutoff);
    s.tpr = r.tpr;
    s.fpr = r.fpr;
    s.ppv = r.ppv;
    s.npv = r.npv;
  }
  return s;
}

}  // namespace ncc

#include "nccipw/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nccipw/error.hpp"

namespace ncc {

Cohort::Cohort(std::vector<double> time, std::vector<std::uint8_t> delta, RowMatrix markers, RowMatrix match_vars)
    : time_(std::move(time)), delta_(std::move(delta)), markers_(std::move(markers)), match_(std::move(match_vars)) {
  const std::size_t n = time_.size();
  if (n < 2) throw InputError("cohort needs at least 2 subjects");
  if (delta_.size() != n) throw InputError("delta length does not match time length");
  if (static_cast<std::size_t>(markers_.rows()) != n) throw InputError("marker matrix row count does not match cohort size");
  if (match_.size() == 0) match_.resize(static_cast<Eigen::Index>(n), 0);
  if (static_cast<std::size_t>(match_.rows()) != n) throw InputError("match matrix row count does not match cohort size");

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(time_[i]) || time_[i] <= 0.0)
      throw InputError("subject " + std::to_string(i) + ": time must be positive and finite");
    if (delta_[i] > 1) throw InputError("subject " + std::to_string(i) + ": delta must be 0 or 1");
    n_events_ += delta_[i];
  }
  if (!markers_.allFinite()) throw InputError("markers must be finite");
  if (!match_.allFinite()) throw InputError("matching variables must be finite");

  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return time_[a] < time_[b]; });
}

Cohort Cohort::from_subjects(std::span<const Subject> subjects) {
  const std::size_t n = subjects.size();
  if (n < 2) throw InputError("cohort needs at least 2 subjects");
  const std::size_t p = subjects[0].markers.size();
  const std::size_t q = subjects[0].match_vars.size();
  std::vector<double> t(n);
  std::vector<std::uint8_t> d(n);
  RowMatrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  RowMatrix mv(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < n; ++i) {
    const Subject& s = subjects[i];
    if (s.id != i) throw InputError("subject ids must be 0..n-1 in order");
    if (s.markers.size() != p || s.match_vars.size() != q)
      throw InputError("subject " + std::to_string(i) + ": inconsistent marker or match dimension");
    if (s.delta != 0 && s.delta != 1) throw InputError("subject " + std::to_string(i) + ": delta must be 0 or 1");
    t[i] = s.time;
    d[i] = static_cast<std::uint8_t>(s.delta);
    for (std::size_t k = 0; k < p; ++k) z(i, k) = s.markers[k];
    for (std::size_t k = 0; k < q; ++k) mv(i, k) = s.match_vars[k];
  }
  return Cohort(std::move(t), std::move(d), std::move(z), std::move(mv));
}

Subject Cohort::subject(std::size_t i) const {
  Subject s;
  s.id = i;
  s.time = time_[i];
  s.delta = delta_[i];
  s.markers.assign(markers_.row(i).data(), markers_.row(i).data() + markers_.cols());
  s.match_vars.resize(n_match_vars());
  for (std::size_t k = 0; k < n_match_vars(); ++k) s.match_vars[k] = match_(i, k);
  return s;
}

RiskSets::RiskSets(const Cohort& cohort, std::optional<std::vector<double>> match_tol)
    : cohort_(&cohort), tol_(std::move(match_tol)) {
  if (tol_) {
    if (tol_->size() != cohort.n_match_vars())
      throw InputError("match tolerance has " + std::to_string(tol_->size()) + " entries but cohort has " +
                       std::to_string(cohort.n_match_vars()) + " matching variables");
    for (double a : *tol_)
      if (!(a >= 0.0) || !std::isfinite(a)) throw InputError("match tolerance entries must be nonnegative");
  }
  const auto order = cohort.time_order();
  const std::size_t n = cohort.size();
  first_at_risk_.resize(n);
  std::size_t start = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (pos > 0 && cohort.time(order[pos]) != cohort.time(order[pos - 1])) start = pos;
    first_at_risk_[order[pos]] = start;
  }
}

bool RiskSets::matches(std::size_t i, std::size_t k) const {
  if (!tol_) return true;
  const RowMatrix& mv = cohort_->match_vars();
  for (std::size_t c = 0; c < tol_->size(); ++c)
    if (std::abs(mv(k, c) - mv(i, c)) > (*tol_)[c]) return false;
  return true;
}

bool RiskSets::contains(std::size_t i, std::size_t k) const {
  return cohort_->time(k) >= cohort_->time(i) && matches(i, k);
}

std::vector<std::size_t> RiskSets::members(std::size_t i) const {
  const auto order = cohort_->time_order();
  std::vector<std::size_t> out;
  out.reserve(order.size() - first_at_risk_[i]);
  for (std::size_t pos = first_at_risk_[i]; pos < order.size(); ++pos)
    if (matches(i, order[pos])) out.push_back(order[pos]);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t RiskSets::size(std::size_t i) const {
  const auto order = cohort_->time_order();
  if (!tol_) return order.size() - first_at_risk_[i];
  std::size_t count = 0;
  for (std::size_t pos = first_at_risk_[i]; pos < order.size(); ++pos) count += matches(i, order[pos]) ? 1 : 0;
  return count;
}

std::vector<std::size_t> risk_set(const Cohort& cohort, std::size_t i, const std::optional<std::vector<double>>& match_tol) {
  if (i >= cohort.size()) throw InputError("subject index out of range");
  return RiskSets(cohort, match_tol).members(i);
}

StepSurvival::StepSurvival(std::vector<double> jump_times, std::vector<double> values, bool clamped)
    : jumps_(std::move(jump_times)), values_(std::move(values)), clamped_(clamped) {
  if (jumps_.size() != values_.size()) throw InputError("step function needs one value per jump");
}

double StepSurvival::operator()(double t) const {
  const auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t);
  if (it == jumps_.begin()) return 1.0;
  return values_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

StepSurvival km_censoring_survival(const Cohort& cohort, std::span<const double> multipliers) {
  const std::size_t n = cohort.size();
  if (!multipliers.empty()) {
    if (multipliers.size() != n) throw InputError("multiplier vector length does not match cohort size");
    for (double v : multipliers)
      if (!std::isfinite(v) || v < 0.0) throw InputError("KM multipliers must be finite and nonnegative");
  }
  auto mult = [&](std::size_t i) { return multipliers.empty() ? 1.0 : multipliers[i]; };

  const auto order = cohort.time_order();

  // Tie groups in ascending time with their total and censored mass.
  struct Group {
    double time;
    double total;
    double censored;
  };
  std::vector<Group> groups;
  for (std::size_t pos = 0; pos < n;) {
    const double t = cohort.time(order[pos]);
    Group g{t, 0.0, 0.0};
    for (; pos < n && cohort.time(order[pos]) == t; ++pos) {
      const std::size_t i = order[pos];
      g.total += mult(i);
      if (!cohort.is_event(i)) g.censored += mult(i);
    }
    groups.push_back(g);
  }

  // Mass strictly after each group, accumulated from the tail.
  std::vector<double> after(groups.size(), 0.0);
  double acc = 0.0;
  for (std::size_t g = groups.size(); g-- > 0;) {
    after[g] = acc;
    acc += groups[g].total;
  }

  std::vector<double> jumps;
  std::vector<double> values;
  double surv = 1.0;
  bool clamped = false;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].censored <= 0.0) continue;
    const double at_risk = after[g] + groups[g].censored;
    double next = surv * (1.0 - groups[g].censored / at_risk);
    if (!(next > 0.0)) {
      next = surv;
      clamped = true;
    }
    surv = next;
    jumps.push_back(groups[g].time);
    values.push_back(surv);
  }
  return StepSurvival(std::move(jumps), std::move(values), clamped);
}

double censoring_weight(const Cohort& cohort, std::size_t i, double t0, const StepSurvival& G) {
  const double t = cohort.time(i);
  if (t <= t0) {
    if (!cohort.is_event(i)) return 0.0;
    const double g = G(t);
    if (!(g > 0.0)) throw NumericalError("censoring survival is zero at an event time");
    return 1.0 / g;
  }
  const double g = G(t0);
  if (!(g > 0.0)) throw NumericalError("censoring survival is zero at t0");
  return 1.0 / g;
}

std::vector<double> censoring_weights(const Cohort& cohort, double t0, const StepSurvival& G) {
  std::vector<double> out(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) out[i] = censoring_weight(cohort, i, t0, G);
  return out;
}

}  // namespace ncc

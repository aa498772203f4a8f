#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ncc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One member of the full cohort as seen by the analyst.
struct Subject {
  std::size_t id = 0;
  double time = 0.0;  // observed min(event time, censoring time)
  int delta = 0;      // 1 = event observed
  std::vector<double> markers;
  std::vector<double> match_vars;
};

/// Full-cohort data in struct-of-arrays layout. Immutable after construction.
class Cohort {
 public:
  /// Validates every invariant: n >= 2, times positive and finite, delta in
  /// {0,1}, markers finite, consistent dimensions. Throws InputError.
  Cohort(std::vector<double> time, std::vector<std::uint8_t> delta, RowMatrix markers,
         RowMatrix match_vars = RowMatrix(0, 0));

  static Cohort from_subjects(std::span<const Subject> subjects);

  std::size_t size() const { return time_.size(); }
  std::size_t n_markers() const { return static_cast<std::size_t>(markers_.cols()); }
  std::size_t n_match_vars() const { return static_cast<std::size_t>(match_.cols()); }
  std::size_t n_events() const { return n_events_; }

  double time(std::size_t i) const { return time_[i]; }
  bool is_event(std::size_t i) const { return delta_[i] != 0; }
  std::span<const double> times() const { return time_; }
  std::span<const std::uint8_t> deltas() const { return delta_; }

  const RowMatrix& markers() const { return markers_; }
  const RowMatrix& match_vars() const { return match_; }
  std::span<const double> marker_row(std::size_t i) const {
    return {markers_.data() + i * n_markers(), n_markers()};
  }

  Subject subject(std::size_t i) const;

  /// Subject indices sorted by ascending time, ties by ascending index.
  std::span<const std::size_t> time_order() const { return order_; }

 private:
  std::vector<double> time_;
  std::vector<std::uint8_t> delta_;
  RowMatrix markers_;
  RowMatrix match_;
  std::vector<std::size_t> order_;
  std::size_t n_events_ = 0;
};

/// Risk-set membership k ∈ R_i = {k : T_k >= T_i, |M_k - M_i| <= a0}.
/// Borrows the cohort; the cohort must outlive this object.
class RiskSets {
 public:
  RiskSets(const Cohort& cohort, std::optional<std::vector<double>> match_tol = std::nullopt);

  bool contains(std::size_t i, std::size_t k) const;
  /// Members of R_i (including i) in ascending index order.
  std::vector<std::size_t> members(std::size_t i) const;
  /// |R_i|, counting i itself.
  std::size_t size(std::size_t i) const;

  bool matched() const { return tol_.has_value(); }
  const Cohort& cohort() const { return *cohort_; }

 private:
  bool matches(std::size_t i, std::size_t k) const;

  const Cohort* cohort_;
  std::optional<std::vector<double>> tol_;
  std::vector<std::size_t> first_at_risk_;  // position in time_order of first k with T_k >= T_i
};

std::vector<std::size_t> risk_set(const Cohort& cohort, std::size_t i,
                                  const std::optional<std::vector<double>>& match_tol = std::nullopt);

/// Right-continuous-in-jumps step function evaluated as P(C >= t): the
/// product of factors at jump times strictly below t.
class StepSurvival {
 public:
  StepSurvival() = default;  // identically 1
  StepSurvival(std::vector<double> jump_times, std::vector<double> values, bool clamped);

  double operator()(double t) const;

  std::span<const double> jump_times() const { return jumps_; }
  std::span<const double> values() const { return values_; }
  /// True when the raw estimate reached 0 and the tail was held at the
  /// smallest positive fitted value.
  bool clamped() const { return clamped_; }

 private:
  std::vector<double> jumps_;
  std::vector<double> values_;
  bool clamped_ = false;
};

/// Kaplan-Meier estimate of the censoring survival G(t) = P(C >= t).
/// Censorings are the "events"; at tied times observed events leave the risk
/// set before censorings are counted. Optional nonnegative multipliers scale
/// each subject's contribution (the perturbed estimate).
StepSurvival km_censoring_survival(const Cohort& cohort, std::span<const double> multipliers = {});

/// ω_{t0,i} = δ_i 1(T_i <= t0)/G(T_i) + 1(T_i > t0)/G(t0).
double censoring_weight(const Cohort& cohort, std::size_t i, double t0, const StepSurvival& G);

std::vector<double> censoring_weights(const Cohort& cohort, double t0, const StepSurvival& G);

}  // namespace ncc

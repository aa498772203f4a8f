#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nccipw/cohort.hpp"
#include "nccipw/rng.hpp"

namespace ncc {

struct NccDesign {
  double pi1 = 1.0;
  int m = 1;
  std::optional<std::vector<double>> match_tol;

  void validate() const;
};

/// Controls drawn for one case, in ascending index order.
struct CaseStratum {
  std::size_t case_index = 0;
  std::size_t risk_set_size = 0;  // 𝔫_i, counting the case itself
  std::vector<std::size_t> controls;
};

/// One stratum per case, ordered by case index.
using ControlAssignments = std::vector<CaseStratum>;

struct NccSample {
  std::vector<std::uint8_t> v1;
  std::vector<std::uint8_t> v0;
  std::vector<std::uint8_t> selected;
  ControlAssignments assignments;
  std::vector<double> p0;
  double pi1_realized = 0.0;

  std::size_t size() const { return v1.size(); }
  std::size_t n_cases() const { return assignments.size(); }
};

/// Fixed-size simple random sample of round_half_up(pi1 * D) events, at least one.
std::vector<std::uint8_t> draw_cases(const Cohort& cohort, const NccDesign& design, Rng& rng);

/// For each case, min(m, 𝔫_i - 1) controls drawn uniformly without replacement
/// from R_i \ {i}, independently across cases.
ControlAssignments draw_controls(const Cohort& cohort, std::span<const std::uint8_t> v1, const NccDesign& design,
                                 Rng& rng);

/// p0_j = 1 - prod over cases i != j with j in R_i of (1 - m_i/(𝔫_i - 1)).
std::vector<double> control_inclusion_prob(const Cohort& cohort, std::span<const std::uint8_t> v1,
                                           const ControlAssignments& assignments, const RiskSets& risk);

/// Generalized form shared with the perturbation: each case contributes the
/// factor 1 - case_mass[s]/(𝔫_i - 1), where s indexes `assignments`.
std::vector<double> inclusion_from_case_mass(const Cohort& cohort, const ControlAssignments& assignments,
                                             std::span<const double> case_mass, const RiskSets& risk);

NccSample sample(const Cohort& cohort, const NccDesign& design, Rng& rng);

/// Builds a sample from an externally supplied case vector and assignments,
/// recomputing v0, selected, p0, and the realized pi1.
NccSample assemble_sample(const Cohort& cohort, std::vector<std::uint8_t> v1, ControlAssignments assignments,
                          const std::optional<std::vector<double>>& match_tol);

/// Checks every invariant of a sample against its cohort; throws InputError.
void check_sample(const Cohort& cohort, const NccSample& s, const std::optional<std::vector<double>>& match_tol);

}  // namespace ncc

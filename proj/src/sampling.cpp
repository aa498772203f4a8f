#include "nccipw/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nccipw/error.hpp"

namespace ncc {

void NccDesign::validate() const {
  if (!(pi1 > 0.0 && pi1 <= 1.0)) throw InputError("pi1 must lie in (0, 1]");
  if (m < 1) throw InputError("m must be at least 1");
  if (match_tol)
    for (double a : *match_tol)
      if (!(a >= 0.0) || !std::isfinite(a)) throw InputError("match tolerance entries must be nonnegative");
}

namespace {

// Floyd's algorithm: k distinct values from [0, n), returned ascending.
std::vector<std::size_t> floyd_sample(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    auto it = std::lower_bound(chosen.begin(), chosen.end(), t);
    if (it != chosen.end() && *it == t) {
      chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), j), j);
    } else {
      chosen.insert(it, t);
    }
  }
  return chosen;
}

}  // namespace

std::vector<std::uint8_t> draw_cases(const Cohort& cohort, const NccDesign& design, Rng& rng) {
  design.validate();
  const std::size_t d = cohort.n_events();
  if (d == 0) throw InputError("cohort has no events to sample as cases");
  std::vector<std::size_t> events;
  events.reserve(d);
  for (std::size_t i = 0; i < cohort.size(); ++i)
    if (cohort.is_event(i)) events.push_back(i);

  auto k = static_cast<std::size_t>(std::floor(design.pi1 * static_cast<double>(d) + 0.5));
  k = std::clamp<std::size_t>(k, 1, d);

  std::vector<std::uint8_t> v1(cohort.size(), 0);
  for (std::size_t r : floyd_sample(d, k, rng)) v1[events[r]] = 1;
  return v1;
}

ControlAssignments draw_controls(const Cohort& cohort, std::span<const std::uint8_t> v1, const NccDesign& design,
                                 Rng& rng) {
  design.validate();
  if (v1.size() != cohort.size()) throw InputError("case vector length does not match cohort size");
  const RiskSets risk(cohort, design.match_tol);
  const auto order = cohort.time_order();
  const std::size_t n = cohort.size();
  std::vector<std::size_t> pos_of(n);
  for (std::size_t p = 0; p < n; ++p) pos_of[order[p]] = p;

  ControlAssignments out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!v1[i]) continue;
    if (!cohort.is_event(i)) throw InputError("case vector marks a non-event as a case");
    CaseStratum s;
    s.case_index = i;
    if (!risk.matched()) {
      // R_i is the suffix of time_order starting at the first subject tied with i.
      const std::size_t first = n - risk.size(i);
      s.risk_set_size = n - first;
      const std::size_t eligible = s.risk_set_size - 1;
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(design.m), eligible);
      for (std::size_t r : floyd_sample(eligible, k, rng)) {
        std::size_t p = first + r;
        if (p >= pos_of[i]) ++p;
        s.controls.push_back(order[p]);
      }
    } else {
      std::vector<std::size_t> eligible = risk.members(i);
      s.risk_set_size = eligible.size();
      eligible.erase(std::find(eligible.begin(), eligible.end(), i));
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(design.m), eligible.size());
      for (std::size_t r : floyd_sample(eligible.size(), k, rng)) s.controls.push_back(eligible[r]);
    }
    std::sort(s.controls.begin(), s.controls.end());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> inclusion_from_case_mass(const Cohort& cohort, const ControlAssignments& assignments,
                                             std::span<const double> case_mass, const RiskSets& risk) {
  const std::size_t n = cohort.size();
  if (case_mass.size() != assignments.size()) throw InputError("one case mass per stratum is required");

  std::vector<double> factor(assignments.size());
  for (std::size_t s = 0; s < assignments.size(); ++s) {
    const std::size_t ni = assignments[s].risk_set_size;
    if (ni <= 1) {
      if (case_mass[s] != 0.0)
        throw InputError("case " + std::to_string(assignments[s].case_index) + " has controls but an empty risk set");
      factor[s] = 1.0;
    } else {
      factor[s] = 1.0 - case_mass[s] / static_cast<double>(ni - 1);
    }
  }

  std::vector<double> prod(n, 1.0);
  if (!risk.matched()) {
    std::vector<std::size_t> stratum_of(n, assignments.size());
    for (std::size_t s = 0; s < assignments.size(); ++s) stratum_of[assignments[s].case_index] = s;
    const auto order = cohort.time_order();
    double before = 1.0;
    for (std::size_t pos = 0; pos < n;) {
      std::size_t end = pos;
      while (end < n && cohort.time(order[end]) == cohort.time(order[pos])) ++end;
      for (std::size_t a = pos; a < end; ++a) {
        double p = before;
        for (std::size_t b = pos; b < end; ++b) {
          const std::size_t s = stratum_of[order[b]];
          if (b != a && s < assignments.size()) p *= factor[s];
        }
        prod[order[a]] = p;
      }
      for (std::size_t b = pos; b < end; ++b) {
        const std::size_t s = stratum_of[order[b]];
        if (s < assignments.size()) before *= factor[s];
      }
      pos = end;
    }
  } else {
    for (std::size_t s = 0; s < assignments.size(); ++s) {
      const std::size_t i = assignments[s].case_index;
      for (std::size_t j : risk.members(i))
        if (j != i) prod[j] *= factor[s];
    }
  }

  std::vector<double> p0(n);
  for (std::size_t j = 0; j < n; ++j) p0[j] = 1.0 - prod[j];
  return p0;
}

std::vector<double> control_inclusion_prob(const Cohort& cohort, std::span<const std::uint8_t> v1,
                                           const ControlAssignments& assignments, const RiskSets& risk) {
  if (v1.size() != cohort.size()) throw InputError("case vector length does not match cohort size");
  std::vector<double> mass(assignments.size());
  for (std::size_t s = 0; s < assignments.size(); ++s) {
    if (!v1[assignments[s].case_index]) throw InputError("assignment stratum belongs to a non-case");
    double acc = 0.0;
    for (std::size_t c = 0; c < assignments[s].controls.size(); ++c) acc += 1.0;
    mass[s] = acc;
  }
  return inclusion_from_case_mass(cohort, assignments, mass, risk);
}

namespace {

NccSample finish(const Cohort& cohort, std::vector<std::uint8_t> v1, ControlAssignments assignments,
                 const RiskSets& risk) {
  NccSample s;
  const std::size_t n = cohort.size();
  s.p0 = control_inclusion_prob(cohort, v1, assignments, risk);
  s.v0.assign(n, 0);
  for (const CaseStratum& st : assignments)
    for (std::size_t l : st.controls) s.v0[l] = 1;
  s.selected.resize(n);
  std::size_t cases = 0;
  for (std::size_t j = 0; j < n; ++j) {
    s.selected[j] = (v1[j] || s.v0[j]) ? 1 : 0;
    cases += v1[j];
  }
  s.pi1_realized = static_cast<double>(cases) / static_cast<double>(cohort.n_events());
  s.v1 = std::move(v1);
  s.assignments = std::move(assignments);
  return s;
}

}  // namespace

NccSample sample(const Cohort& cohort, const NccDesign& design, Rng& rng) {
  auto v1 = draw_cases(cohort, design, rng);
  auto assignments = draw_controls(cohort, v1, design, rng);
  const RiskSets risk(cohort, design.match_tol);
  return finish(cohort, std::move(v1), std::move(assignments), risk);
}

NccSample assemble_sample(const Cohort& cohort, std::vector<std::uint8_t> v1, ControlAssignments assignments,
                          const std::optional<std::vector<double>>& match_tol) {
  const std::size_t n = cohort.size();
  if (v1.size() != n) throw InputError("case vector length does not match cohort size");
  if (cohort.n_events() == 0) throw InputError("cohort has no events");
  const RiskSets risk(cohort, match_tol);

  std::vector<std::size_t> slot(n, n);
  ControlAssignments strata;
  for (std::size_t i = 0; i < n; ++i) {
    if (!v1[i]) continue;
    if (v1[i] != 1 || !cohort.is_event(i)) throw InputError("subject " + std::to_string(i) + " is a case but not an event");
    slot[i] = strata.size();
    CaseStratum st;
    st.case_index = i;
    st.risk_set_size = risk.size(i);
    strata.push_back(std::move(st));
  }
  for (const CaseStratum& in : assignments) {
    if (in.case_index >= n || slot[in.case_index] == n)
      throw InputError("control assignment references subject " + std::to_string(in.case_index) +
                       ", which is not a case");
    auto& dst = strata[slot[in.case_index]].controls;
    dst.insert(dst.end(), in.controls.begin(), in.controls.end());
  }
  for (CaseStratum& st : strata) {
    std::sort(st.controls.begin(), st.controls.end());
    if (std::adjacent_find(st.controls.begin(), st.controls.end()) != st.controls.end())
      throw InputError("case " + std::to_string(st.case_index) + " lists a control twice");
    for (std::size_t l : st.controls)
      if (l >= n || l == st.case_index || !risk.contains(st.case_index, l))
        throw InputError("control " + std::to_string(l) + " is not in the risk set of case " +
                         std::to_string(st.case_index));
  }
  return finish(cohort, std::move(v1), std::move(strata), risk);
}

void check_sample(const Cohort& cohort, const NccSample& s, const std::optional<std::vector<double>>& match_tol) {
  const std::size_t n = cohort.size();
  if (s.v1.size() != n || s.v0.size() != n || s.selected.size() != n || s.p0.size() != n)
    throw InputError("sample vectors do not match cohort size");
  const RiskSets risk(cohort, match_tol);
  std::vector<std::uint8_t> v0(n, 0);
  for (const CaseStratum& st : s.assignments) {
    if (!s.v1[st.case_index]) throw InputError("stratum for a non-case");
    for (std::size_t l : st.controls) {
      if (l == st.case_index || !risk.contains(st.case_index, l)) throw InputError("control outside risk set");
      v0[l] = 1;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (s.v1[j] && !cohort.is_event(j)) throw InputError("case that is not an event");
    if (v0[j] != s.v0[j]) throw InputError("v0 inconsistent with assignments");
    if (s.selected[j] != ((s.v1[j] || s.v0[j]) ? 1 : 0)) throw InputError("selected flag inconsistent");
    if (!(s.p0[j] >= 0.0 && s.p0[j] <= 1.0)) throw InputError("p0 outside [0, 1]");
    if (s.v0[j] && !(s.p0[j] > 0.0)) throw InputError("selected control with zero inclusion probability");
  }
}

}  // namespace ncc

#include "nccipw/weights.hpp"

#include <string>

#include "nccipw/error.hpp"

namespace ncc {

std::string_view to_string(WeightScheme s) {
  switch (s) {
    case WeightScheme::New: return "new";
    case WeightScheme::Samuelsen: return "samuelsen";
    case WeightScheme::FullCohort: return "full";
  }
  return "?";
}

WeightScheme parse_weight_scheme(std::string_view s) {
  if (s == "new") return WeightScheme::New;
  if (s == "samuelsen") return WeightScheme::Samuelsen;
  if (s == "full") return WeightScheme::FullCohort;
  throw InputError("unknown weight scheme '" + std::string(s) + "'");
}

namespace {

// num/den with 0/0 = 0.
double ratio(double num, double den, std::size_t j) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) throw NumericalError("subject " + std::to_string(j) + " is a control with zero inclusion probability");
  return num / den;
}

std::vector<double> as_real(std::span<const std::uint8_t> v) { return {v.begin(), v.end()}; }

void check_lengths(const Cohort& cohort, const NccSample& s) {
  if (s.size() != cohort.size()) throw InputError("sample and cohort sizes differ");
}

}  // namespace

std::vector<double> new_weight_values(const Cohort& cohort, std::span<const double> v1, double pi1,
                                      std::span<const double> v0, std::span<const double> p0) {
  if (!(pi1 > 0.0)) throw NumericalError("realized case fraction must be positive");
  std::vector<double> w(cohort.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    w[j] = cohort.is_event(j) ? v1[j] / pi1 : ratio(v0[j], p0[j], j);
  return w;
}

std::vector<double> samuelsen_weight_values(const Cohort& cohort, std::span<const std::uint8_t> v1_base,
                                            std::span<const double> v1, std::span<const double> v0,
                                            std::span<const double> p0) {
  std::vector<double> w(cohort.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const bool event_case = cohort.is_event(j) && v1_base[j];
    w[j] = event_case ? v1[j] : ratio(v0[j], p0[j], j);
  }
  return w;
}

SamplingWeights new_weight(const NccSample& sample, const Cohort& cohort, std::optional<double> pi1) {
  check_lengths(cohort, sample);
  const auto v1 = as_real(sample.v1);
  const auto v0 = as_real(sample.v0);
  return {new_weight_values(cohort, v1, pi1.value_or(sample.pi1_realized), v0, sample.p0), WeightScheme::New};
}

SamplingWeights samuelsen_weight(const NccSample& sample, const Cohort& cohort) {
  check_lengths(cohort, sample);
  const auto v1 = as_real(sample.v1);
  const auto v0 = as_real(sample.v0);
  return {samuelsen_weight_values(cohort, sample.v1, v1, v0, sample.p0), WeightScheme::Samuelsen};
}

SamplingWeights full_cohort_weight(const Cohort& cohort) {
  return {std::vector<double>(cohort.size(), 1.0), WeightScheme::FullCohort};
}

SamplingWeights make_weights(WeightScheme scheme, const NccSample& sample, const Cohort& cohort,
                             std::optional<double> pi1) {
  switch (scheme) {
    case WeightScheme::New: return new_weight(sample, cohort, pi1);
    case WeightScheme::Samuelsen: return samuelsen_weight(sample, cohort);
    case WeightScheme::FullCohort: return full_cohort_weight(cohort);
  }
  throw InputError("unknown weight scheme");
}

}  // namespace ncc

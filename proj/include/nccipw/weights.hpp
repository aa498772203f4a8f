#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nccipw/cohort.hpp"
#include "nccipw/sampling.hpp"

namespace ncc {

enum class WeightScheme { New, Samuelsen, FullCohort };

std::string_view to_string(WeightScheme s);
WeightScheme parse_weight_scheme(std::string_view s);

struct SamplingWeights {
  std::vector<double> values;
  WeightScheme scheme = WeightScheme::New;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// ŵ_j = δ_j V1_j/π1 + (1-δ_j) V0_j/p0_j. `pi1` overrides the realized fraction.
SamplingWeights new_weight(const NccSample& sample, const Cohort& cohort, std::optional<double> pi1 = std::nullopt);

/// w̆_j = δ_j V1_j + (1 - δ_j V1_j) V0_j/p0_j.
SamplingWeights samuelsen_weight(const NccSample& sample, const Cohort& cohort);

SamplingWeights full_cohort_weight(const Cohort& cohort);

SamplingWeights make_weights(WeightScheme scheme, const NccSample& sample, const Cohort& cohort,
                             std::optional<double> pi1 = std::nullopt);

/// Weight kernels over real-valued (possibly perturbed) indicators. The base
/// weights route through these with unit multipliers, so an identity
/// perturbation reproduces them bit for bit.
std::vector<double> new_weight_values(const Cohort& cohort, std::span<const double> v1, double pi1,
                                      std::span<const double> v0, std::span<const double> p0);
std::vector<double> samuelsen_weight_values(const Cohort& cohort, std::span<const std::uint8_t> v1_base,
                                            std::span<const double> v1, std::span<const double> v0,
                                            std::span<const double> p0);

}  // namespace ncc

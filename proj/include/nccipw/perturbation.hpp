#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nccipw/analysis.hpp"
#include "nccipw/cohort.hpp"
#include "nccipw/rng.hpp"
#include "nccipw/sampling.hpp"
#include "nccipw/weights.hpp"

namespace ncc {

/// Sparse realization of the N×N multiplier array: the diagonal I_jj plus
/// I_il for each (case, selected control) edge. pair[s][c] belongs to
/// sample.assignments[s].controls[c].
struct MultiplierDraw {
  std::vector<double> diag;
  std::vector<std::vector<double>> pair;
};

/// Exp(1) draws: diagonal first, then pairs in stratum order.
MultiplierDraw draw_multipliers(const NccSample& sample, Rng& rng);
MultiplierDraw unit_multipliers(const NccSample& sample);

/// Perturbed indicators and probabilities.
struct PerturbedDesign {
  std::vector<double> v1;  // V1_j I_jj
  std::vector<double> v0;  // 1 - Π (1 - V1_i V0^i_j I_ij)
  std::vector<double> p0;  // 1 - Π {1 - Σ_l V0^i_l I_il / (𝔫_i - 1)}
  double pi1 = 0.0;        // Σ I_ii δ_i V1_i / Σ I_ii δ_i
};

PerturbedDesign perturb_design(const NccSample& sample, const Cohort& cohort, const MultiplierDraw& draw,
                               const RiskSets& risk);

/// ŵ* (or the Samuelsen analog). `pi1` replaces the perturbed case fraction when given.
SamplingWeights perturb_sampling_weights(const NccSample& sample, const Cohort& cohort, const MultiplierDraw& draw,
                                         const RiskSets& risk, WeightScheme scheme = WeightScheme::New,
                                         std::optional<double> pi1 = std::nullopt);

/// Full re-estimation: perturbed KM, ω*, weights, fit, scores, and accuracy.
Estimates perturbed_estimate(const Cohort& cohort, const NccSample& sample, const MultiplierDraw& draw,
                             const RiskSets& risk, WeightScheme scheme, const AnalysisConfig& config,
                             std::optional<double> frozen_cutoff, std::optional<double> pi1 = std::nullopt);

struct PerturbationResult {
  std::vector<std::optional<double>> point;
  std::vector<std::optional<double>> se;
  std::vector<std::optional<double>> ci_lower;
  std::vector<std::optional<double>> ci_upper;
  std::vector<std::size_t> n_used;  // usable replicates per parameter
  std::size_t b_used = 0;           // replicates whose fit converged
  std::size_t b_total = 0;
};

/// SE = sample SD of the usable replicates; CI = point ± z_{(1+level)/2} SE.
/// A parameter with fewer than 2 usable replicates has no SE.
PerturbationResult se_ci(std::span<const std::optional<double>> point,
                         std::span<const std::vector<std::optional<double>>> replicates, double level);

/// Scalar convenience form; throws NumericalError with fewer than 2 replicates.
struct ScalarInterval {
  double se, lower, upper;
};
ScalarInterval se_ci(double point, std::span<const double> replicates, double level);

struct PerturbationSettings {
  std::size_t B = 0;
  std::uint64_t seed = 0;  // replicate b uses derive_seed(seed, {b})
  unsigned threads = 1;
  double level = 0.95;
};

/// Runs B replicates around `base` (the unperturbed estimates under the same scheme).
PerturbationResult run_perturbation(const Cohort& cohort, const NccSample& sample, const RiskSets& risk,
                                    WeightScheme scheme, const AnalysisConfig& config, const Estimates& base,
                                    const PerturbationSettings& settings, std::optional<double> pi1 = std::nullopt);

}  // namespace ncc

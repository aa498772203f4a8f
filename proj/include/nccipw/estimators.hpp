#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nccipw/cohort.hpp"
#include "nccipw/newton.hpp"
#include "nccipw/weights.hpp"

namespace ncc {

enum class Link { Logit, Cloglog };
enum class ModelKind { Cox, Glm };

std::string_view to_string(Link l);
std::string_view to_string(ModelKind m);
Link parse_link(std::string_view s);
ModelKind parse_model(std::string_view s);

/// g(u): logit 1/(1+e^-u), cloglog 1 - exp(-e^u).
double link_inverse(Link link, double eta);
/// g^{-1}(p).
double link_function(Link link, double p);

struct ModelFit {
  ModelKind model = ModelKind::Cox;
  Link link = Link::Cloglog;
  double t0 = 0.0;
  double alpha = 0.0;
  Eigen::VectorXd beta;
  FitStatus status = FitStatus::MaxIterations;
  int iterations = 0;
  double score_norm = 0.0;

  bool converged() const { return status == FitStatus::Converged; }
};

/// Weighted Breslow log partial likelihood in β over subjects with nonzero weight.
class CoxProblem {
 public:
  CoxProblem(const Cohort& cohort, std::span<const double> weights);

  std::size_t dim() const { return static_cast<std::size_t>(z_.cols()); }
  bool has_weighted_event() const;
  NewtonEval evaluate(const Eigen::VectorXd& beta) const;
  /// log Λ0(t0) = log Σ_{T_i <= t0} w_i δ_i / S0(T_i; β); nullopt when the sum is not positive.
  std::optional<double> log_baseline_hazard(const Eigen::VectorXd& beta, double t0) const;

 private:
  RowMatrix z_;  // rows sorted by descending time
  std::vector<double> time_;
  std::vector<double> w_;
  std::vector<std::uint8_t> delta_;
  std::vector<std::size_t> group_end_;  // exclusive end of each tie group
};

/// Double-weighted GLM for 1(T <= t0): maximizes Σ m_i [y_i η_i - G(η_i)]
/// with G' = g, whose gradient is the estimating equation.
class GlmProblem {
 public:
  GlmProblem(const Cohort& cohort, std::span<const double> weights, std::span<const double> omega, double t0,
             Link link);

  std::size_t dim() const { return static_cast<std::size_t>(x_.cols()); }
  NewtonEval evaluate(const Eigen::VectorXd& theta) const;
  /// Σ m y / Σ m; nullopt when the total mass is not positive.
  std::optional<double> prevalence() const;

 private:
  RowMatrix x_;  // leading column of ones
  std::vector<double> mass_;
  std::vector<double> y_;
  Link link_;
};

ModelFit fit_cox(const Cohort& cohort, std::span<const double> weights, double t0, const NewtonOptions& opt = {});
ModelFit fit_cox(const Cohort& cohort, const SamplingWeights& weights, double t0, const NewtonOptions& opt = {});

ModelFit fit_glm(const Cohort& cohort, std::span<const double> weights, std::span<const double> omega, double t0,
                 Link link, const NewtonOptions& opt = {});
ModelFit fit_glm(const Cohort& cohort, const SamplingWeights& weights, const StepSurvival& G, double t0, Link link,
                 const NewtonOptions& opt = {});

double predict_risk(const ModelFit& fit, std::span<const double> z);
std::vector<double> predict_risk(const ModelFit& fit, const Cohort& cohort);

}  // namespace ncc

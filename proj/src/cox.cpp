#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nccipw/error.hpp"
#include "nccipw/estimators.hpp"

namespace ncc {

CoxProblem::CoxProblem(const Cohort& cohort, std::span<const double> weights) {
  if (weights.size() != cohort.size()) throw InputError("weight vector length does not match cohort size");
  const auto order = cohort.time_order();
  std::vector<std::size_t> keep;
  for (std::size_t pos = order.size(); pos-- > 0;)
    if (weights[order[pos]] != 0.0) keep.push_back(order[pos]);

  const std::size_t n = keep.size();
  const std::size_t p = cohort.n_markers();
  z_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  time_.resize(n);
  w_.resize(n);
  delta_.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = keep[r];
    z_.row(static_cast<Eigen::Index>(r)) = cohort.markers().row(static_cast<Eigen::Index>(i));
    time_[r] = cohort.time(i);
    w_[r] = weights[i];
    delta_[r] = cohort.is_event(i) ? 1 : 0;
  }
  for (std::size_t r = 0; r < n; ++r)
    if (r + 1 == n || time_[r + 1] != time_[r]) group_end_.push_back(r + 1);
}

bool CoxProblem::has_weighted_event() const {
  for (std::size_t r = 0; r < w_.size(); ++r)
    if (delta_[r] && w_[r] > 0.0) return true;
  return false;
}

NewtonEval CoxProblem::evaluate(const Eigen::VectorXd& beta) const {
  const auto n = static_cast<Eigen::Index>(w_.size());
  const auto p = static_cast<Eigen::Index>(dim());
  NewtonEval e;
  e.grad = Eigen::VectorXd::Zero(p);
  e.hess = Eigen::MatrixXd::Zero(p, p);
  if (n == 0) return e;

  const Eigen::VectorXd eta = z_ * beta;
  const double shift = eta.maxCoeff();
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  double s0 = 0.0;

  Eigen::Index start = 0;
  for (std::size_t end_u : group_end_) {
    const auto end = static_cast<Eigen::Index>(end_u);
    for (Eigen::Index r = start; r < end; ++r) {
      const double we = w_[r] * std::exp(eta[r] - shift);
      const auto zr = z_.row(r).transpose();
      s0 += we;
      s1.noalias() += we * zr;
      s2.noalias() += we * zr * zr.transpose();
    }
    for (Eigen::Index r = start; r < end; ++r) {
      if (!delta_[r]) continue;
      const double wd = w_[r];
      if (!(s0 > 0.0)) {
        e.value = std::numeric_limits<double>::quiet_NaN();
        return e;
      }
      const Eigen::VectorXd mean = s1 / s0;
      e.value += wd * (eta[r] - shift - std::log(s0));
      e.grad.noalias() += wd * (z_.row(r).transpose() - mean);
      e.hess.noalias() -= wd * (s2 / s0 - mean * mean.transpose());
    }
    start = end;
  }
  return e;
}

std::optional<double> CoxProblem::log_baseline_hazard(const Eigen::VectorXd& beta, double t0) const {
  const auto n = static_cast<Eigen::Index>(w_.size());
  if (n == 0) return std::nullopt;
  const Eigen::VectorXd eta = z_ * beta;
  const double shift = eta.maxCoeff();
  double s0 = 0.0;
  double sum = 0.0;
  Eigen::Index start = 0;
  for (std::size_t end_u : group_end_) {
    const auto end = static_cast<Eigen::Index>(end_u);
    for (Eigen::Index r = start; r < end; ++r) s0 += w_[r] * std::exp(eta[r] - shift);
    for (Eigen::Index r = start; r < end; ++r)
      if (delta_[r] && time_[r] <= t0) sum += w_[r] / s0;
    start = end;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) return std::nullopt;
  return std::log(sum) - shift;
}

ModelFit fit_cox(const Cohort& cohort, std::span<const double> weights, double t0, const NewtonOptions& opt) {
  if (!(t0 > 0.0)) throw InputError("t0 must be positive");
  const CoxProblem prob(cohort, weights);
  ModelFit fit;
  fit.model = ModelKind::Cox;
  fit.link = Link::Cloglog;
  fit.t0 = t0;
  fit.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prob.dim()));
  fit.alpha = std::numeric_limits<double>::quiet_NaN();
  if (!prob.has_weighted_event()) {
    fit.status = FitStatus::Degenerate;
    return fit;
  }

  const NewtonResult r = newton_maximize([&](const Eigen::VectorXd& b) { return prob.evaluate(b); }, fit.beta, opt);
  fit.beta = r.x;
  fit.status = r.status;
  fit.iterations = r.iterations;
  fit.score_norm = r.score_norm;
  if (const auto a = prob.log_baseline_hazard(fit.beta, t0)) {
    fit.alpha = *a;
  } else if (fit.status == FitStatus::Converged) {
    fit.status = FitStatus::Degenerate;
  }
  return fit;
}

ModelFit fit_cox(const Cohort& cohort, const SamplingWeights& weights, double t0, const NewtonOptions& opt) {
  return fit_cox(cohort, weights.values, t0, opt);
}

}  // namespace ncc

#include <cmath>
#include <limits>
#include <string>

#include "nccipw/error.hpp"
#include "nccipw/estimators.hpp"

namespace ncc {

std::string_view to_string(Link l) { return l == Link::Logit ? "logit" : "cloglog"; }
std::string_view to_string(ModelKind m) { return m == ModelKind::Cox ? "cox" : "glm"; }

Link parse_link(std::string_view s) {
  if (s == "logit") return Link::Logit;
  if (s == "cloglog") return Link::Cloglog;
  throw InputError("unknown link '" + std::string(s) + "'");
}

ModelKind parse_model(std::string_view s) {
  if (s == "cox") return ModelKind::Cox;
  if (s == "glm") return ModelKind::Glm;
  throw InputError("unknown model '" + std::string(s) + "'");
}

double link_inverse(Link link, double eta) {
  if (link == Link::Logit) return 1.0 / (1.0 + std::exp(-eta));
  return -std::expm1(-std::exp(eta));
}

double link_function(Link link, double p) {
  if (link == Link::Logit) return std::log(p / (1.0 - p));
  return std::log(-std::log1p(-p));
}

namespace {

struct LinkTerms {
  double g;      // mean
  double dg;     // derivative of the mean
  double prim;   // antiderivative of the mean
};

LinkTerms link_terms(Link link, double eta) {
  if (link == Link::Logit) {
    const double g = 1.0 / (1.0 + std::exp(-eta));
    const double softplus = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    return {g, g * (1.0 - g), softplus};
  }
  const double u = std::exp(eta);
  const double g = -std::expm1(-u);
  // E1(u) = -Ei(-u); it underflows harmlessly for large u.
  const double e1 = u > 700.0 ? 0.0 : -std::expint(-u);
  return {g, u * std::exp(-u), eta + e1};
}

}  // namespace

GlmProblem::GlmProblem(const Cohort& cohort, std::span<const double> weights, std::span<const double> omega, double t0,
                       Link link)
    : link_(link) {
  if (weights.size() != cohort.size() || omega.size() != cohort.size())
    throw InputError("weight vector length does not match cohort size");
  if (!(t0 > 0.0)) throw InputError("t0 must be positive");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const double m = weights[i] * omega[i];
    if (m != 0.0) {
      keep.push_back(i);
      mass_.push_back(m);
      y_.push_back(cohort.time(i) <= t0 ? 1.0 : 0.0);
    }
  }
  const std::size_t p = cohort.n_markers();
  x_.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(p + 1));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    x_(static_cast<Eigen::Index>(r), 0) = 1.0;
    x_.row(static_cast<Eigen::Index>(r)).tail(static_cast<Eigen::Index>(p)) =
        cohort.markers().row(static_cast<Eigen::Index>(keep[r]));
  }
}

std::optional<double> GlmProblem::prevalence() const {
  double total = 0.0;
  double pos = 0.0;
  for (std::size_t r = 0; r < mass_.size(); ++r) {
    total += mass_[r];
    pos += mass_[r] * y_[r];
  }
  if (!(total > 0.0)) return std::nullopt;
  return pos / total;
}

NewtonEval GlmProblem::evaluate(const Eigen::VectorXd& theta) const {
  const auto k = static_cast<Eigen::Index>(dim());
  NewtonEval e;
  e.grad = Eigen::VectorXd::Zero(k);
  e.hess = Eigen::MatrixXd::Zero(k, k);
  const Eigen::VectorXd eta = x_ * theta;
  for (Eigen::Index r = 0; r < x_.rows(); ++r) {
    const LinkTerms t = link_terms(link_, eta[r]);
    const double m = mass_[static_cast<std::size_t>(r)];
    const double y = y_[static_cast<std::size_t>(r)];
    const auto xr = x_.row(r).transpose();
    e.value += m * (y * eta[r] - t.prim);
    e.grad.noalias() += (m * (y - t.g)) * xr;
    e.hess.noalias() -= (m * t.dg) * xr * xr.transpose();
  }
  return e;
}

ModelFit fit_glm(const Cohort& cohort, std::span<const double> weights, std::span<const double> omega, double t0,
                 Link link, const NewtonOptions& opt) {
  const GlmProblem prob(cohort, weights, omega, t0, link);
  ModelFit fit;
  fit.model = ModelKind::Glm;
  fit.link = link;
  fit.t0 = t0;
  fit.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cohort.n_markers()));
  fit.alpha = std::numeric_limits<double>::quiet_NaN();

  const auto prev = prob.prevalence();
  if (!prev || !(*prev > 0.0 && *prev < 1.0)) {
    fit.status = FitStatus::Degenerate;
    return fit;
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prob.dim()));
  theta[0] = link_function(link, *prev);

  const NewtonResult r = newton_maximize([&](const Eigen::VectorXd& th) { return prob.evaluate(th); }, theta, opt);
  fit.alpha = r.x[0];
  fit.beta = r.x.tail(r.x.size() - 1);
  fit.status = r.status;
  fit.iterations = r.iterations;
  fit.score_norm = r.score_norm;
  return fit;
}

ModelFit fit_glm(const Cohort& cohort, const SamplingWeights& weights, const StepSurvival& G, double t0, Link link,
                 const NewtonOptions& opt) {
  const auto omega = censoring_weights(cohort, t0, G);
  return fit_glm(cohort, weights.values, omega, t0, link, opt);
}

double predict_risk(const ModelFit& fit, std::span<const double> z) {
  if (z.size() != static_cast<std::size_t>(fit.beta.size())) throw InputError("marker dimension does not match fit");
  double eta = fit.alpha;
  for (std::size_t k = 0; k < z.size(); ++k) eta += fit.beta[static_cast<Eigen::Index>(k)] * z[k];
  return link_inverse(fit.link, eta);
}

std::vector<double> predict_risk(const ModelFit& fit, const Cohort& cohort) {
  std::vector<double> out(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) out[i] = predict_risk(fit, cohort.marker_row(i));
  return out;
}

}  // namespace ncc

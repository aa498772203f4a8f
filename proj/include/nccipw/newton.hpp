#pragma once

#include <functional>
#include <string_view>

#include <Eigen/Core>

namespace ncc {

enum class FitStatus { Converged, MaxIterations, Diverged, NonFinite, RankDeficient, Degenerate, StepFailure };

std::string_view to_string(FitStatus s);

struct NewtonOptions {
  double score_tol = 1e-8;   // sup-norm of the score
  double step_tol = 1e-6;    // sup-norm of the final Newton step
  int max_iter = 50;
  int max_halvings = 20;
  double divergence_bound = 50.0;  // sup-norm of the parameter vector
};

/// Objective value, gradient, and Hessian at one parameter point.
struct NewtonEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

struct NewtonResult {
  Eigen::VectorXd x;
  FitStatus status = FitStatus::MaxIterations;
  int iterations = 0;
  double score_norm = 0.0;
};

/// Damped Newton ascent for a concave objective. Converged requires both a
/// small score and a small Newton step, so a likelihood that keeps rising
/// toward infinity is reported as divergence rather than as convergence.
NewtonResult newton_maximize(const std::function<NewtonEval(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                             const NewtonOptions& opt = {});

}  // namespace ncc

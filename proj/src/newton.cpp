#include "nccipw/newton.hpp"

#include <cmath>
#include <vector>

#include <Eigen/QR>

namespace ncc {

std::string_view to_string(FitStatus s) {
  switch (s) {
    case FitStatus::Converged: return "converged";
    case FitStatus::MaxIterations: return "max_iterations";
    case FitStatus::Diverged: return "diverged";
    case FitStatus::NonFinite: return "non_finite";
    case FitStatus::RankDeficient: return "rank_deficient";
    case FitStatus::Degenerate: return "degenerate";
    case FitStatus::StepFailure: return "step_failure";
  }
  return "?";
}

namespace {

bool finite_eval(const NewtonEval& e) {
  return std::isfinite(e.value) && e.grad.allFinite() && e.hess.allFinite();
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

NewtonResult newton_maximize(const std::function<NewtonEval(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                             const NewtonOptions& opt) {
  NewtonResult r;
  r.x = std::move(x0);
  NewtonEval cur = f(r.x);
  if (!finite_eval(cur)) {
    r.status = FitStatus::NonFinite;
    r.score_norm = sup_norm(cur.grad);
    return r;
  }

  for (int iter = 0;; ++iter) {
    r.iterations = iter;
    r.score_norm = sup_norm(cur.grad);

    // Coordinates with no curvature and an exactly zero score are held fixed.
    std::vector<Eigen::Index> active;
    for (Eigen::Index k = 0; k < cur.grad.size(); ++k)
      if (cur.grad[k] != 0.0 || !cur.hess.row(k).isZero(0.0)) active.push_back(k);
    const auto na = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd neg_h(na, na);
    Eigen::VectorXd g(na);
    for (Eigen::Index a = 0; a < na; ++a) {
      g[a] = cur.grad[active[a]];
      for (Eigen::Index b = 0; b < na; ++b) neg_h(a, b) = -cur.hess(active[a], active[b]);
    }
    Eigen::VectorXd step = Eigen::VectorXd::Zero(cur.grad.size());
    if (na > 0) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(neg_h);
      if (cod.rank() < na) {
        r.status = FitStatus::RankDeficient;
        return r;
      }
      const Eigen::VectorXd s = cod.solve(g);
      for (Eigen::Index a = 0; a < na; ++a) step[active[a]] = s[a];
    }
    if (!step.allFinite()) {
      r.status = FitStatus::NonFinite;
      return r;
    }
    if (r.score_norm < opt.score_tol && sup_norm(step) < opt.step_tol) {
      r.status = FitStatus::Converged;
      return r;
    }
    if (iter >= opt.max_iter) {
      r.status = FitStatus::MaxIterations;
      return r;
    }

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    NewtonEval next;
    const double slack = 1e-12 * (1.0 + std::abs(cur.value));
    for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      trial = r.x + t * step;
      next = f(trial);
      if (finite_eval(next) && next.value >= cur.value - slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      r.status = FitStatus::StepFailure;
      return r;
    }
    r.x = std::move(trial);
    cur = std::move(next);
    if (sup_norm(r.x) > opt.divergence_bound) {
      r.iterations = iter + 1;
      r.score_norm = sup_norm(cur.grad);
      r.status = FitStatus::Diverged;
      return r;
    }
  }
}

}  // namespace ncc

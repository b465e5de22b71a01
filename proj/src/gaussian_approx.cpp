#include "stamp/gaussian_approx.hpp"

#include "stamp/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace stamp {

namespace {

struct CoreEval {
  double value;
  bool overflow;
};

// f(x) = 1/2 x^T Q x - sum [ y eta - E exp(eta) ], value only.
CoreEval value_only(const Eigen::VectorXd& x, const ObservationBlock& obs,
                    const Eigen::SparseMatrix<double>& q) {
  Eigen::VectorXd eta = obs.design * x;
  if (eta.size() > 0 && eta.maxCoeff() > kEtaOverflow)
    return {0.0, true};
  double lik = 0.0;
  for (Eigen::Index c = 0; c < eta.size(); ++c)
    lik += obs.counts[c] * eta[c] - obs.exposures[c] * std::exp(eta[c]);
  double quad = 0.5 * x.dot(q * x);
  return {quad - lik, false};
}

PosteriorEval eval_nothrow(const Eigen::VectorXd& x, const ObservationBlock& obs,
                           const Eigen::SparseMatrix<double>& q_prior) {
  Eigen::VectorXd eta = obs.design * x;
  PosteriorEval out;
  if (eta.size() > 0 && eta.maxCoeff() > kEtaOverflow) {
    out.overflow = true;
    return out;
  }
  Eigen::VectorXd mu = (obs.log_exposures + eta).array().exp();
  double lik = 0.0;
  for (Eigen::Index c = 0; c < eta.size(); ++c)
    lik += obs.counts[c] * eta[c] - mu[c];
  Eigen::VectorXd qx = q_prior * x;
  out.value = 0.5 * x.dot(qx) - lik;
  out.gradient = qx - obs.design.transpose() * (obs.counts - mu);
  out.curvature = std::move(mu);
  return out;
}

} // namespace

PosteriorEval neg_log_posterior(const Eigen::VectorXd& x, const ObservationBlock& obs,
                                const Eigen::SparseMatrix<double>& q_prior) {
  PosteriorEval out = eval_nothrow(x, obs, q_prior);
  if (out.overflow)
    throw OverflowGuard("linear predictor exceeds " + std::to_string(kEtaOverflow));
  return out;
}

// ---------------------------------------------------------------------------
// KrigingProjector
// ---------------------------------------------------------------------------

KrigingProjector::KrigingProjector(const Eigen::SparseMatrix<double>& a,
                                   Eigen::MatrixXd hinv_at)
    : a_(&a), hinv_at_(std::move(hinv_at)), rows_(static_cast<int>(a.rows())) {
  if (rows_ == 0)
    return;
  Eigen::MatrixXd schur = a * hinv_at_;
  schur_llt_.compute(schur);
  if (schur_llt_.info() != Eigen::Success)
    throw FactorizationFailure("constraint Schur complement is not SPD");
  logdet_ = 2.0 * schur_llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::VectorXd KrigingProjector::project(const Eigen::VectorXd& x) const {
  if (rows_ == 0)
    return x;
  Eigen::VectorXd ax = (*a_) * x;
  return x - hinv_at_ * schur_llt_.solve(ax);
}

double KrigingProjector::quadratic(const Eigen::VectorXd& x) const {
  if (rows_ == 0)
    return 0.0;
  Eigen::VectorXd ax = (*a_) * x;
  return ax.dot(schur_llt_.solve(ax));
}

Eigen::VectorXd sample_from_factor(
    const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& factor,
    const Eigen::VectorXd& z) {
  Eigen::VectorXd w = factor.vectorD().cwiseSqrt().cwiseInverse().cwiseProduct(z);
  Eigen::VectorXd v = factor.matrixU().solve(w);
  return factor.permutationPinv() * v;
}

// ---------------------------------------------------------------------------
// NewtonWorkspace
// ---------------------------------------------------------------------------

namespace {

using SparseLDLT = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

void check_spd(const SparseLDLT& f) {
  if (f.info() != Eigen::Success || f.vectorD().minCoeff() <= 0.0)
    throw FactorizationFailure("posterior Hessian lost positive definiteness");
}

} // namespace

struct NewtonWorkspace::Impl {
  SparseLDLT llt;
};

NewtonWorkspace::NewtonWorkspace(const ObservationBlock& obs,
                                 const ConstraintSet& constraints)
    : obs_(&obs), cons_(&constraints) {
  design_cm_ = obs.design;
  design_t_ = obs.design.transpose();
  at_dense_ = Eigen::MatrixXd(constraints.A.transpose());
  impl_ = std::make_shared<Impl>();
}

Eigen::SparseMatrix<double>
NewtonWorkspace::hessian(const Eigen::SparseMatrix<double>& q,
                         const Eigen::VectorXd& mu) const {
  Eigen::SparseMatrix<double> btdb = design_t_ * mu.asDiagonal() * design_cm_;
  Eigen::SparseMatrix<double> h = q + btdb;
  h.makeCompressed();
  return h;
}

GaussianApprox NewtonWorkspace::solve(const PriorPrecision& prior,
                                      const Eigen::VectorXd* start) {
  const Eigen::Index n = prior.Q.rows();
  Eigen::VectorXd x;
  if (start)
    x = *start;
  else if (warm_.size() == n)
    x = warm_;
  else
    x = Eigen::VectorXd::Zero(n);
  if (value_only(x, *obs_, prior.Q).overflow)
    x = Eigen::VectorXd::Zero(n);

  // Tolerance is anchored at the canonical zero start; a warm start near
  // the mode would otherwise demand a gradient below the rounding floor.
  const double g_ref =
      eval_nothrow(Eigen::VectorXd::Zero(n), *obs_, prior.Q).gradient.cwiseAbs().maxCoeff();
  const double tol = 1e-8 * (1.0 + g_ref);

  PosteriorEval ev = eval_nothrow(x, *obs_, prior.Q);

  SparseLDLT& llt = impl_->llt;
  int iter = 0;
  double gnorm = ev.gradient.cwiseAbs().maxCoeff();

  for (; iter < 100 && gnorm > tol; ++iter) {
    Eigen::SparseMatrix<double> h = hessian(prior.Q, ev.curvature);
    if (!analyzed_) {
      llt.analyzePattern(h);
      analyzed_ = true;
    }
    llt.factorize(h);
    check_spd(llt);
    Eigen::VectorXd delta = -llt.solve(ev.gradient);

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    for (int halving = 0; halving <= 50; ++halving) {
      x_new = x + t * delta;
      CoreEval f_new = value_only(x_new, *obs_, prior.Q);
      if (!f_new.overflow && f_new.value <= ev.value) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw NonConvergence("line search failed after 50 halvings; |grad| = " +
                           std::to_string(gnorm));
    x = x_new;
    ev = eval_nothrow(x, *obs_, prior.Q);
    gnorm = ev.gradient.cwiseAbs().maxCoeff();
  }
  if (gnorm > tol)
    throw NonConvergence("Newton iteration cap reached; |grad| = " +
                         std::to_string(gnorm));

  warm_ = x;

  GaussianApprox approx;
  approx.x_hat = std::move(x);
  approx.iterations = iter;
  approx.grad_norm = gnorm;
  approx.mu_hat =
      (obs_->log_exposures + (obs_->design * approx.x_hat)).array().exp();

  Eigen::SparseMatrix<double> h = hessian(prior.Q, approx.mu_hat);
  if (!analyzed_) {
    llt.analyzePattern(h);
    analyzed_ = true;
  }
  llt.factorize(h);
  check_spd(llt);
  approx.logdet_h = llt.vectorD().array().log().sum();
  if (cons_->rows() > 0) {
    Eigen::MatrixXd hinv_at = llt.solve(at_dense_);
    approx.projector = KrigingProjector(cons_->A, std::move(hinv_at));
  }
  approx.x_star = approx.projector.project(approx.x_hat);
  return approx;
}

GaussianApprox NewtonWorkspace::rebuild(const PriorPrecision& prior,
                                        const Eigen::VectorXd& x_hat) {
  GaussianApprox approx;
  approx.x_hat = x_hat;
  approx.mu_hat = (obs_->log_exposures + (obs_->design * x_hat)).array().exp();
  Eigen::SparseMatrix<double> h = hessian(prior.Q, approx.mu_hat);
  approx.factor = std::make_shared<SparseLDLT>();
  approx.factor->compute(h);
  check_spd(*approx.factor);
  approx.logdet_h = approx.factor->vectorD().array().log().sum();
  if (cons_->rows() > 0) {
    Eigen::MatrixXd hinv_at = approx.factor->solve(at_dense_);
    approx.projector = KrigingProjector(cons_->A, std::move(hinv_at));
  }
  approx.x_star = approx.projector.project(approx.x_hat);
  return approx;
}

} // namespace stamp

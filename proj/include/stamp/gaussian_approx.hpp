#pragma once

#include "stamp/design.hpp"
#include "stamp/layout.hpp"
#include "stamp/prior_precision.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>

namespace stamp {

/// Linear predictor is capped here; a cell rate above e^30 flags a
/// diverging step, which the line search rejects.
constexpr double kEtaOverflow = 30.0;

/// Value/gradient/curvature of the unconstrained negative log posterior
///   f(x) = 1/2 x^T Q x - sum_c [ y_c eta_c - E_c exp(eta_c) ].
/// curvature holds the per-observation Poisson weight E_c exp(eta_c).
struct PosteriorEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::VectorXd curvature;
  bool overflow = false;
};

/// Full evaluation; throws OverflowGuard if any eta exceeds the cap.
PosteriorEval neg_log_posterior(const Eigen::VectorXd& x, const ObservationBlock& obs,
                                const Eigen::SparseMatrix<double>& q_prior);

/// Exact correction of a mode or sample onto the constraint surface
/// A x = 0, using the posterior precision H:
///   x <- x - H^{-1} A^T (A H^{-1} A^T)^{-1} A x.
class KrigingProjector {
public:
  KrigingProjector() = default;
  /// hinv_at = H^{-1} A^T (n x k); A the constraint matrix.
  KrigingProjector(const Eigen::SparseMatrix<double>& a, Eigen::MatrixXd hinv_at);

  bool empty() const { return rows_ == 0; }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  /// log det (A H^{-1} A^T); 0 for an empty constraint set.
  double logdet_schur() const { return logdet_; }
  /// (A x)^T (A H^{-1} A^T)^{-1} (A x)
  double quadratic(const Eigen::VectorXd& x) const;

private:
  const Eigen::SparseMatrix<double>* a_ = nullptr;
  Eigen::MatrixXd hinv_at_;
  Eigen::LLT<Eigen::MatrixXd> schur_llt_;
  double logdet_ = 0.0;
  int rows_ = 0;
};

/// Constrained Gaussian approximation at one hyperparameter point: the
/// unconstrained mode of the Poisson log posterior, its sparse Hessian
/// factorization, and the constraint-corrected mode.
struct GaussianApprox {
  Eigen::VectorXd x_hat;   // unconstrained mode
  Eigen::VectorXd x_star;  // constraint-corrected mode
  Eigen::VectorXd mu_hat;  // Poisson means at x_hat (curvature diagonal)
  double logdet_h = 0.0;   // log det H, H = Q_prior + B^T diag(mu) B
  KrigingProjector projector;
  int iterations = 0;
  double grad_norm = 0.0;
  // Factorization of H, reusable for sampling.
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> factor;
};

/// Draw with covariance H^{-1} from the factorization P H P^T = L D L^T:
/// v = P^T L^{-T} D^{-1/2} z for z ~ N(0, I).
Eigen::VectorXd sample_from_factor(
    const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& factor,
    const Eigen::VectorXd& z);

/// Sparse Newton solver with the symbolic analysis cached across calls
/// (the Hessian pattern is identical for every hyperparameter value).
class NewtonWorkspace {
public:
  NewtonWorkspace(const ObservationBlock& obs, const ConstraintSet& constraints);

  /// Damped Newton with step halving to gradient tolerance
  /// 1e-8 * (1 + |grad at start|_inf), at most 100 iterations and 50
  /// halvings per step, then one kriging projection. Throws NonConvergence
  /// or FactorizationFailure.
  GaussianApprox solve(const PriorPrecision& prior, const Eigen::VectorXd* start = nullptr);

  const Eigen::VectorXd& warm_start() const { return warm_; }
  void set_warm_start(const Eigen::VectorXd& x) { warm_ = x; }

  /// Rebuilds H = Q + B^T diag(mu) B and its factorization (used when
  /// re-materializing an exploration point for sampling).
  GaussianApprox rebuild(const PriorPrecision& prior, const Eigen::VectorXd& x_hat);

private:
  struct Impl;
  Eigen::SparseMatrix<double> hessian(const Eigen::SparseMatrix<double>& q,
                                      const Eigen::VectorXd& mu) const;

  const ObservationBlock* obs_;
  const ConstraintSet* cons_;
  Eigen::SparseMatrix<double> design_cm_;   // column-major design
  Eigen::SparseMatrix<double> design_t_;    // transpose
  Eigen::MatrixXd at_dense_;                // A^T as dense rhs block
  std::shared_ptr<Impl> impl_;              // cached symbolic factorization
  bool analyzed_ = false;
  Eigen::VectorXd warm_;
};

} // namespace stamp

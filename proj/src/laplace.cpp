#include "stamp/laplace.hpp"

#include "stamp/errors.hpp"

#include <cmath>

namespace stamp {

double poisson_loglik(const Eigen::VectorXd& x, const ObservationBlock& obs) {
  Eigen::VectorXd eta = obs.design * x;
  double lik = obs.loglik_const;
  for (Eigen::Index c = 0; c < eta.size(); ++c)
    lik += obs.counts[c] * eta[c] - obs.exposures[c] * std::exp(eta[c]);
  return lik;
}

double laplace_log_marginal(const ObservationBlock& obs, const ConstraintSet& cons,
                            const PriorPrecision& prior,
                            const GaussianApprox& approx) {
  double loglik = poisson_loglik(approx.x_star, obs);
  double quad = approx.x_star.dot(prior.Q * approx.x_star);

  double logdet_sq = 0.0;
  if (cons.rows() > 0) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> prior_llt(prior.Q);
    if (prior_llt.info() != Eigen::Success || prior_llt.vectorD().minCoeff() <= 0.0)
      throw FactorizationFailure("prior precision is not SPD");
    Eigen::MatrixXd at = Eigen::MatrixXd(cons.A.transpose());
    Eigen::MatrixXd qinv_at = prior_llt.solve(at);
    Eigen::MatrixXd schur = cons.A * qinv_at;
    Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
    if (schur_llt.info() != Eigen::Success)
      throw FactorizationFailure("prior constraint Schur complement is not SPD");
    logdet_sq = 2.0 * schur_llt.matrixLLT().diagonal().array().log().sum();
  }

  return loglik - 0.5 * quad + 0.5 * (prior.logdet + logdet_sq) -
         0.5 * (approx.logdet_h + approx.projector.logdet_schur());
}

} // namespace stamp

#pragma once

#include "stamp/gaussian_approx.hpp"

namespace stamp {

/// Poisson log likelihood at the latent point x (all constants included).
double poisson_loglik(const Eigen::VectorXd& x, const ObservationBlock& obs);

/// Laplace approximation of log pi(y | theta) at the constrained mode:
///
///   log pi(y | x*) + log pi_c(x* | theta) - log pi_G,c(x* | y, theta)
///
/// where the subscript c denotes densities conditioned on A x = 0 (the
/// standard +-1/2 log det(A Sigma A^T) corrections; the constraint-mean
/// quadratics of the prior and approximation cancel against each other at
/// the corrected mode). Expanded:
///
///   loglik(x*) - 1/2 x*^T Q x*
///   + 1/2 [ log det Q + log det(A Q^{-1} A^T) ]
///   - 1/2 [ log det H + log det(A H^{-1} A^T) ].
double laplace_log_marginal(const ObservationBlock& obs, const ConstraintSet& cons,
                            const PriorPrecision& prior, const GaussianApprox& approx);

} // namespace stamp

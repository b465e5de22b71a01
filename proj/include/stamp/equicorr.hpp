#pragma once

#include <Eigen/Dense>

namespace stamp {

/// Validity region of the S x S equicorrelation matrix R_S(rho): rho must
/// lie in (-1/(S-1), 1) for S >= 2; any rho is accepted for S = 1.
double equicorr_lower_bound(int S);
bool equicorr_valid(int S, double rho);

/// R_S(rho)^{-1} in closed form a*I + b*J with
///   a = 1/(1-rho),  b = -rho / ((1-rho) * (1 + (S-1) rho)).
/// Throws SingularCorrelation outside the validity region.
Eigen::MatrixXd equicorr_precision(int S, double rho);

/// log det R_S(rho) = (S-1) log(1-rho) + log(1 + (S-1) rho).
double equicorr_logdet(int S, double rho);

/// Lower Cholesky factor of R_S(rho) (for sampling correlated blocks).
Eigen::MatrixXd equicorr_cholesky(int S, double rho);

} // namespace stamp

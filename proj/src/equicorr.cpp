#include "stamp/equicorr.hpp"

#include "stamp/errors.hpp"

#include <cmath>
#include <string>

namespace stamp {

double equicorr_lower_bound(int S) {
  if (S < 1)
    throw DomainError("equicorrelation: S must be >= 1");
  if (S == 1)
    return -std::numeric_limits<double>::infinity();
  return -1.0 / (S - 1);
}

bool equicorr_valid(int S, double rho) {
  if (S == 1)
    return true;
  return rho > equicorr_lower_bound(S) && rho < 1.0;
}

Eigen::MatrixXd equicorr_precision(int S, double rho) {
  if (S == 1)
    return Eigen::MatrixXd::Identity(1, 1);
  if (!equicorr_valid(S, rho))
    throw SingularCorrelation("equicorrelation rho=" + std::to_string(rho) +
                              " outside validity region for S=" + std::to_string(S));
  double a = 1.0 / (1.0 - rho);
  double b = -rho / ((1.0 - rho) * (1.0 + (S - 1) * rho));
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(S, S, b);
  out.diagonal().array() += a;
  return out;
}

double equicorr_logdet(int S, double rho) {
  if (S == 1)
    return 0.0;
  if (!equicorr_valid(S, rho))
    throw SingularCorrelation("equicorrelation rho=" + std::to_string(rho) +
                              " outside validity region for S=" + std::to_string(S));
  return (S - 1) * std::log(1.0 - rho) + std::log(1.0 + (S - 1) * rho);
}

Eigen::MatrixXd equicorr_cholesky(int S, double rho) {
  if (S == 1)
    return Eigen::MatrixXd::Identity(1, 1);
  if (!equicorr_valid(S, rho))
    throw SingularCorrelation("equicorrelation rho=" + std::to_string(rho) +
                              " outside validity region for S=" + std::to_string(S));
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(S, S, rho);
  r.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success)
    throw SingularCorrelation("equicorrelation Cholesky failed at rho=" +
                              std::to_string(rho));
  return llt.matrixL();
}

} // namespace stamp

#pragma once

#include "stamp/rng.hpp"

namespace stamp {

// ---------------------------------------------------------------------------
// PC prior for a precision, expressed on the standard-deviation scale:
// sigma ~ Exponential(lambda) with lambda chosen so P(sigma > U) = alpha.
// ---------------------------------------------------------------------------

/// lambda = -ln(alpha) / U
double pc_prec_rate(double u, double alpha);

/// log density of sigma: ln(lambda) - lambda * sigma. Throws DomainError for
/// sigma <= 0, U <= 0 or alpha outside (0, 1).
double pc_prec_logpdf(double sigma, double u, double alpha);

/// Same prior on the internal log-precision scale (tau = sigma^-2), Jacobian
/// included: ln(lambda) - lambda*sigma + ln(sigma/2) with sigma = e^{-t/2}.
double pc_prec_logpdf_logtau(double log_tau, double u, double alpha);

// ---------------------------------------------------------------------------
// Internal parametrization of the equicorrelation rho: a logit-style
// bijection of the real line onto the validity region (-1/(S-1), 1).
// ---------------------------------------------------------------------------

double rho_to_theta(double rho, int S);
double theta_to_rho(double theta, int S);
/// d rho / d theta, for Jacobian corrections.
double drho_dtheta(double theta, int S);

// ---------------------------------------------------------------------------
// PC prior for the equicorrelation parameter with base model rho = 0.
//
// Distance d(rho) = sqrt(2 KLD(N(0, R_S(rho)) || N(0, I_S)))
//                 = sqrt(-log det R_S(rho)),
// exponential in the distance with rate lambda solved numerically from
// P(|rho| > V) = alpha; mass splits evenly between the two branches.
// ---------------------------------------------------------------------------

class PcCorPrior {
public:
  /// Calibrates (and caches) the rate for (V, alpha, S). S must be >= 2.
  PcCorPrior(double v, double alpha, int S);

  double rate() const { return lambda_; }
  int seasons() const { return S_; }

  /// KLD distance from the base model; d(0) = 0.
  double distance(double rho) const;

  /// log density in rho, Jacobian |dd/drho| included.
  double logpdf(double rho) const;

  /// log density on the internal theta scale (adds the bijection Jacobian).
  double logpdf_theta(double theta) const;

  /// Prior draw by inverse CDF: branch, then exponential distance inverted
  /// back to rho (clamped to the representable part of the region).
  double sample(Rng& rng) const;

  /// P(rho <= r), used by tests to check the calibration.
  double cdf(double rho) const;

private:
  double invert_distance(double target, bool positive_branch) const;
  double v_, alpha_, lambda_;
  int S_;
};

} // namespace stamp

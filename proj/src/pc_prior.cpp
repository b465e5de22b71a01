#include "stamp/pc_prior.hpp"

#include "stamp/equicorr.hpp"
#include "stamp/errors.hpp"
#include "stamp/numeric.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace stamp {

double pc_prec_rate(double u, double alpha) {
  if (u <= 0.0)
    throw DomainError("pc_prec: U must be positive");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw DomainError("pc_prec: alpha must lie in (0, 1)");
  return -std::log(alpha) / u;
}

double pc_prec_logpdf(double sigma, double u, double alpha) {
  if (sigma <= 0.0)
    throw DomainError("pc_prec: sigma must be positive");
  double lambda = pc_prec_rate(u, alpha);
  return std::log(lambda) - lambda * sigma;
}

double pc_prec_logpdf_logtau(double log_tau, double u, double alpha) {
  double sigma = std::exp(-0.5 * log_tau);
  double lambda = pc_prec_rate(u, alpha);
  return std::log(lambda) - lambda * sigma + std::log(0.5 * sigma);
}

// ---------------------------------------------------------------------------
// rho <-> theta bijection
// ---------------------------------------------------------------------------

namespace {
double sigmoid(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}
} // namespace

double rho_to_theta(double rho, int S) {
  double lo = equicorr_lower_bound(S);
  if (!(rho > lo && rho < 1.0))
    throw DomainError("rho outside validity region");
  double t = (rho - lo) / (1.0 - lo);
  return std::log(t) - std::log1p(-t);
}

double theta_to_rho(double theta, int S) {
  double lo = equicorr_lower_bound(S);
  return lo + (1.0 - lo) * sigmoid(theta);
}

double drho_dtheta(double theta, int S) {
  double lo = equicorr_lower_bound(S);
  double s = sigmoid(theta);
  return (1.0 - lo) * s * (1.0 - s);
}

// ---------------------------------------------------------------------------
// PC correlation prior
// ---------------------------------------------------------------------------

namespace {

double cor_distance(double rho, int S) {
  return std::sqrt(-equicorr_logdet(S, rho));
}

// |d d / d rho|; finite limit sqrt(S(S-1)/2) at rho -> 0.
double cor_distance_jacobian(double rho, int S) {
  if (std::abs(rho) < 1e-8)
    return std::sqrt(0.5 * S * (S - 1));
  double d = cor_distance(rho, S);
  double num = static_cast<double>(S) * (S - 1) * rho;
  double den = 2.0 * d * (1.0 - rho) * (1.0 + (S - 1) * rho);
  return std::abs(num / den);
}

double calibrate_rate(double v, double alpha, int S) {
  if (S < 2)
    throw DomainError("pc_cor prior requires S >= 2");
  if (v <= 0.0 || v >= 1.0 || alpha <= 0.0 || alpha >= 1.0)
    throw DomainError("pc_cor: V and alpha must lie in (0, 1)");
  double lo = equicorr_lower_bound(S);
  bool neg_branch = (-v > lo);
  double d_pos = cor_distance(v, S);
  double d_neg = neg_branch ? cor_distance(-v, S) : 0.0;
  auto tail = [&](double lambda) {
    double p = 0.5 * std::exp(-lambda * d_pos);
    if (neg_branch)
      p += 0.5 * std::exp(-lambda * d_neg);
    return p - alpha;
  };
  if (tail(0.0) < 0.0)
    throw DomainError("pc_cor: P(|rho|>V)=alpha unattainable for this (V, alpha, S)");
  double hi = 1.0;
  while (tail(hi) > 0.0 && hi < 1e8)
    hi *= 2.0;
  return bisect(tail, 0.0, hi, 1e-14);
}

std::map<std::tuple<double, double, int>, double>& rate_cache() {
  static std::map<std::tuple<double, double, int>, double> cache;
  return cache;
}
std::mutex& rate_cache_mutex() {
  static std::mutex m;
  return m;
}

} // namespace

PcCorPrior::PcCorPrior(double v, double alpha, int S) : v_(v), alpha_(alpha), S_(S) {
  std::lock_guard<std::mutex> lock(rate_cache_mutex());
  auto key = std::make_tuple(v, alpha, S);
  auto it = rate_cache().find(key);
  if (it != rate_cache().end()) {
    lambda_ = it->second;
  } else {
    lambda_ = calibrate_rate(v, alpha, S);
    rate_cache().emplace(key, lambda_);
  }
}

double PcCorPrior::distance(double rho) const { return cor_distance(rho, S_); }

double PcCorPrior::logpdf(double rho) const {
  if (!equicorr_valid(S_, rho))
    throw DomainError("pc_cor: rho outside validity region");
  double d = cor_distance(rho, S_);
  double jac = cor_distance_jacobian(rho, S_);
  return std::log(0.5 * lambda_) - lambda_ * d + std::log(jac);
}

double PcCorPrior::logpdf_theta(double theta) const {
  double rho = theta_to_rho(theta, S_);
  return logpdf(rho) + std::log(drho_dtheta(theta, S_));
}

double PcCorPrior::invert_distance(double target, bool positive_branch) const {
  double lo = equicorr_lower_bound(S_);
  double edge = positive_branch ? 1.0 - 1e-15 : lo + 1e-15 * (1.0 - lo);
  if (cor_distance(edge, S_) <= target)
    return edge;
  auto f = [&](double rho) { return cor_distance(rho, S_) - target; };
  if (positive_branch)
    return bisect(f, 0.0, edge, 1e-15);
  return -bisect([&](double r) { return f(-r); }, 0.0, -edge, 1e-15);
}

double PcCorPrior::sample(Rng& rng) const {
  bool positive = rng.uniform() < 0.5;
  double d = rng.exponential(lambda_);
  return invert_distance(d, positive);
}

double PcCorPrior::cdf(double rho) const {
  if (rho <= equicorr_lower_bound(S_))
    return 0.0;
  if (rho >= 1.0)
    return 1.0;
  double d = cor_distance(rho, S_);
  if (rho >= 0.0)
    return 1.0 - 0.5 * std::exp(-lambda_ * d);
  return 0.5 * std::exp(-lambda_ * d);
}

} // namespace stamp

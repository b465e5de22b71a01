#pragma once

#include "stamp/gaussian_approx.hpp"
#include "stamp/hyper.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stamp {

struct IsMarginal {
  double estimate = 0.0;  // log pi(y | theta)
  double std_error = 0.0; // delta-method MC standard error of the estimate
  double ess = 0.0;
  long draws = 0;
};

/// Brute-force importance-sampling estimate of the constrained log
/// marginal likelihood, with the constrained Gaussian approximation as the
/// proposal. Unbiased for any proposal; the Gaussian choice only controls
/// variance. Throws EffectiveSampleSizeTooLow below min_ess.
IsMarginal oracle_is_marginal(const ObservationBlock& obs, const ConstraintSet& cons,
                              const PriorPrecision& prior, long n_draws,
                              std::uint64_t seed, double min_ess = 1000.0);

struct McmcOptions {
  int chains = 4;
  long burn = 20000;
  long keep = 60000;
  int thin = 5;
  std::uint64_t seed = 1;
  double rhat_limit = 1.05;
};

struct McmcScalar {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double mcse = 0.0; // batch-means standard error of the mean
  double rhat = 0.0; // split-Rhat over chains
};

struct McmcSummary {
  McmcScalar beta0;
  std::vector<McmcScalar> sigma; // one per variance hyperparameter
  double max_rhat = 0.0;
  long kept_per_chain = 0;
  int chains = 0;
};

/// Adaptive random-walk Metropolis on (x, theta) jointly, with proposals
/// projected onto the constraint surface. The prior terms are computed
/// from per-block closed forms, independent of the sparse-matrix path used
/// by the engine. Requires n_latent <= 200 and the paper's (non-strict)
/// constraint layout. Throws NotConverged when split-Rhat exceeds the
/// limit.
McmcSummary oracle_mcmc_means(const ObservationBlock& obs, const ConstraintSet& cons,
                              const LatentLayout& layout, const HyperDesc& hyper,
                              const McmcOptions& opts = {});

} // namespace stamp

#pragma once

#include "stamp/hyper.hpp"
#include "stamp/layout.hpp"

#include <Eigen/Sparse>

namespace stamp {

/// Block-diagonal prior precision of the latent field at given
/// hyperparameter values, with its exact log determinant.
///
/// Fixed effects: 1/fixed_effect_sd^2 + 1/ridge_sd^2 on the diagonal.
/// u, v, z and extended slopes: tau * I. Seasonally correlated blocks
/// (w, jump/step slopes): tau * R_S(rho)^{-1} per (team, area) group.
struct PriorPrecision {
  Eigen::SparseMatrix<double> Q;
  double logdet = 0.0;
};

PriorPrecision build_prior_precision(const LatentLayout& layout,
                                     const HyperValues& values);

} // namespace stamp

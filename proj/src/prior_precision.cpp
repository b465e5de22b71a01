#include "stamp/prior_precision.hpp"

#include "stamp/equicorr.hpp"

#include <cmath>
#include <vector>

namespace stamp {

PriorPrecision build_prior_precision(const LatentLayout& layout,
                                     const HyperValues& values) {
  const int I = layout.num_teams;
  const int S = layout.num_seasons;
  const int A = kNumAreas;
  const int D = kNumSides;
  const ModelConfig& cfg = layout.config;

  std::vector<Eigen::Triplet<double>> trips;
  double logdet = 0.0;

  double prec_fixed = 1.0 / (cfg.fixed_effect_sd * cfg.fixed_effect_sd) +
                      1.0 / (cfg.ridge_sd * cfg.ridge_sd);
  for (int j = 0; j < layout.n_fixed; ++j)
    trips.emplace_back(layout.fixed_offset + j, layout.fixed_offset + j, prec_fixed);
  logdet += layout.n_fixed * std::log(prec_fixed);

  for (int i = 0; i < I; ++i)
    trips.emplace_back(layout.u(i), layout.u(i), values.tau_team);
  logdet += I * std::log(values.tau_team);

  for (int a = 0; a < A; ++a)
    trips.emplace_back(layout.v(a), layout.v(a), values.tau_area);
  logdet += A * std::log(values.tau_area);

  // Full S x S blocks are inserted even when rho = 0 so the sparsity
  // pattern is identical for every hyperparameter value (the symbolic
  // factorization is reused across evaluations).
  auto add_correlated_groups = [&](int offset, int groups, double tau, double rho) {
    Eigen::MatrixXd block = tau * equicorr_precision(S, rho);
    for (int g = 0; g < groups; ++g) {
      int base = offset + g * S;
      for (int r = 0; r < S; ++r)
        for (int c = 0; c < S; ++c)
          trips.emplace_back(base + r, base + c, block(r, c));
    }
    logdet += groups * (S * std::log(tau) - equicorr_logdet(S, rho));
  };

  if (cfg.use_ta)
    add_correlated_groups(layout.w_offset, I * A, values.tau_ta, values.rho_ta);

  if (cfg.use_ts) {
    for (int j = 0; j < I * D * S; ++j)
      trips.emplace_back(layout.z_offset + j, layout.z_offset + j, values.tau_ts);
    logdet += I * D * S * std::log(values.tau_ts);
  }

  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (!layout.has_slope(kind))
      continue;
    int off = layout.slope_offset[m];
    if (slope_is_team_area(kind)) {
      add_correlated_groups(off, I * A, values.tau_slope[static_cast<std::size_t>(m)],
                            values.rho_slope[static_cast<std::size_t>(m)]);
    } else {
      double tau = values.tau_slope[static_cast<std::size_t>(m)];
      for (int j = 0; j < I * S; ++j)
        trips.emplace_back(off + j, off + j, tau);
      logdet += I * S * std::log(tau);
    }
  }

  PriorPrecision out;
  out.Q.resize(layout.n_latent, layout.n_latent);
  out.Q.setFromTriplets(trips.begin(), trips.end());
  out.Q.makeCompressed();
  out.logdet = logdet;
  return out;
}

} // namespace stamp

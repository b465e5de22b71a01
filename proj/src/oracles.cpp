#include "stamp/oracles.hpp"

#include "stamp/equicorr.hpp"
#include "stamp/errors.hpp"
#include "stamp/laplace.hpp"
#include "stamp/numeric.hpp"
#include "stamp/parallel.hpp"
#include "stamp/pc_prior.hpp"
#include "stamp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stamp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

// ---------------------------------------------------------------------------
// Importance-sampling marginal likelihood
// ---------------------------------------------------------------------------

IsMarginal oracle_is_marginal(const ObservationBlock& obs, const ConstraintSet& cons,
                              const PriorPrecision& prior, long n_draws,
                              std::uint64_t seed, double min_ess) {
  const int n = static_cast<int>(prior.Q.rows());
  if (n > 30)
    throw DomainError("IS oracle is restricted to n_latent <= 30");
  const int k = cons.rows();

  NewtonWorkspace ws(obs, cons);
  GaussianApprox mode = ws.solve(prior);
  GaussianApprox ga = ws.rebuild(prior, mode.x_hat);
  const auto& factor = *ga.factor;

  // Prior-side constraint corrections.
  double logdet_sq = 0.0;
  if (k > 0) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> q_llt(prior.Q);
    if (q_llt.info() != Eigen::Success)
      throw FactorizationFailure("prior precision is not SPD");
    Eigen::MatrixXd at = Eigen::MatrixXd(cons.A.transpose());
    Eigen::MatrixXd schur = cons.A * q_llt.solve(at);
    Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
    logdet_sq = 2.0 * schur_llt.matrixLLT().diagonal().array().log().sum();
  }
  const double ahat_quad = ga.projector.quadratic(ga.x_hat);

  // log pi_c(x) - log q_c(x) for x on the surface:
  //   1/2 (logdet Q - logdet H) + 1/2 (logdet S_Q ... sign below)
  const double const_terms = 0.5 * (prior.logdet - ga.logdet_h) +
                             0.5 * (logdet_sq - ga.projector.logdet_schur()) -
                             0.5 * ahat_quad;

  std::vector<double> logw(static_cast<std::size_t>(n_draws));
  parallel_for(n_draws, [&](std::int64_t d) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(d));
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i)
      z[i] = rng.normal();
    Eigen::VectorXd v = sample_from_factor(factor, z);
    Eigen::VectorXd x = ga.projector.project(ga.x_hat + v);

    double loglik = poisson_loglik(x, obs);
    double quad_prior = x.dot(prior.Q * x);
    // diff^T H diff with H = Q + B^T diag(mu) B, without materializing H.
    Eigen::VectorXd diff = x - ga.x_hat;
    double quad_approx = diff.dot(prior.Q * diff);
    Eigen::VectorXd bdiff = obs.design * diff;
    quad_approx += bdiff.dot(ga.mu_hat.cwiseProduct(bdiff));

    logw[static_cast<std::size_t>(d)] =
        loglik - 0.5 * quad_prior + 0.5 * quad_approx + const_terms;
  });

  double max_lw = *std::max_element(logw.begin(), logw.end());
  double sum_u = 0.0, sum_u2 = 0.0;
  for (double lw : logw) {
    double u = std::exp(lw - max_lw);
    sum_u += u;
    sum_u2 += u * u;
  }
  const double nn = static_cast<double>(n_draws);
  double mean_u = sum_u / nn;
  double var_u = std::max(0.0, sum_u2 / nn - mean_u * mean_u);

  IsMarginal out;
  out.estimate = max_lw + std::log(mean_u);
  out.std_error = std::sqrt(var_u / nn) / mean_u;
  out.ess = sum_u * sum_u / sum_u2;
  out.draws = n_draws;
  if (out.ess < min_ess)
    throw EffectiveSampleSizeTooLow("IS oracle ESS " + std::to_string(out.ess) +
                                    " below " + std::to_string(min_ess));
  return out;
}

// ---------------------------------------------------------------------------
// Random-walk Metropolis oracle
// ---------------------------------------------------------------------------

namespace {

// Prior log density of the latent field from per-block closed forms
// (independent of the sparse assembly used by the engine). Constraint
// normalization handled separately.
double block_log_prior(const Eigen::VectorXd& x, const LatentLayout& lay,
                       const HyperValues& hv) {
  const int I = lay.num_teams;
  const int S = lay.num_seasons;
  const int A = kNumAreas;
  const int D = kNumSides;
  const ModelConfig& cfg = lay.config;
  double lp = 0.0;

  double prec_f = 1.0 / (cfg.fixed_effect_sd * cfg.fixed_effect_sd) +
                  1.0 / (cfg.ridge_sd * cfg.ridge_sd);
  for (int j = 0; j < lay.n_fixed; ++j) {
    double xf = x[lay.fixed_offset + j];
    lp += 0.5 * (std::log(prec_f) - kLog2Pi) - 0.5 * prec_f * xf * xf;
  }
  auto iid = [&](int off, int len, double sigma) {
    double tau = 1.0 / (sigma * sigma);
    for (int j = 0; j < len; ++j) {
      double v = x[off + j];
      lp += 0.5 * (std::log(tau) - kLog2Pi) - 0.5 * tau * v * v;
    }
  };
  iid(lay.u_offset, I, 1.0 / std::sqrt(hv.tau_team));
  iid(lay.v_offset, A, 1.0 / std::sqrt(hv.tau_area));

  auto correlated = [&](int off, int groups, double tau, double rho) {
    Eigen::MatrixXd rinv = equicorr_precision(S, rho);
    double logdet_r = equicorr_logdet(S, rho);
    for (int g = 0; g < groups; ++g) {
      Eigen::VectorXd w = x.segment(off + g * S, S);
      lp += -0.5 * S * kLog2Pi + 0.5 * (S * std::log(tau) - logdet_r) -
            0.5 * tau * w.dot(rinv * w);
    }
  };
  if (cfg.use_ta)
    correlated(lay.w_offset, I * A, hv.tau_ta, hv.rho_ta);
  if (cfg.use_ts)
    iid(lay.z_offset, I * D * S, 1.0 / std::sqrt(hv.tau_ts));
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (!lay.has_slope(kind))
      continue;
    if (slope_is_team_area(kind))
      correlated(lay.slope_offset[m], I * A,
                 hv.tau_slope[static_cast<std::size_t>(m)],
                 hv.rho_slope[static_cast<std::size_t>(m)]);
    else
      iid(lay.slope_offset[m], I * S,
          1.0 / std::sqrt(hv.tau_slope[static_cast<std::size_t>(m)]));
  }
  return lp;
}

// log det(A Q^{-1} A^T) in closed form; rows touch disjoint blocks so the
// Schur complement is diagonal. Valid for the global-w constraint layout.
double closed_logdet_sq(const LatentLayout& lay, const HyperValues& hv) {
  const double I = lay.num_teams;
  const double S = lay.num_seasons;
  const double A = kNumAreas;
  const double D = kNumSides;
  const ModelConfig& cfg = lay.config;
  double ld = 0.0;
  ld += std::log(I / hv.tau_team);
  ld += std::log(A / hv.tau_area);
  if (cfg.use_ta)
    ld += std::log(I * A * S * (1.0 + (S - 1.0) * hv.rho_ta) / hv.tau_ta);
  if (cfg.use_ts)
    ld += I * S * std::log(D / hv.tau_ts);
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (!lay.has_slope(kind))
      continue;
    double tau = hv.tau_slope[static_cast<std::size_t>(m)];
    if (slope_is_team_area(kind))
      ld += std::log(I * A * S * (1.0 + (S - 1.0) * hv.rho_slope[static_cast<std::size_t>(m)]) / tau);
    else
      ld += std::log(I * S / tau);
  }
  return ld;
}

struct ChainDiag {
  std::vector<std::vector<double>> series; // per chain
};

double split_rhat(const ChainDiag& d) {
  std::vector<double> means, vars;
  for (const auto& chain : d.series) {
    std::size_t half = chain.size() / 2;
    for (int part = 0; part < 2; ++part) {
      auto begin = chain.begin() + (part == 0 ? 0 : static_cast<long>(half));
      auto end = part == 0 ? chain.begin() + static_cast<long>(half) : chain.end();
      double n = static_cast<double>(end - begin);
      double m = std::accumulate(begin, end, 0.0) / n;
      double v = 0.0;
      for (auto it = begin; it != end; ++it)
        v += (*it - m) * (*it - m);
      v /= (n - 1.0);
      means.push_back(m);
      vars.push_back(v);
    }
  }
  double n = static_cast<double>(d.series.front().size() / 2);
  double w = std::accumulate(vars.begin(), vars.end(), 0.0) / vars.size();
  double grand = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
  double b_over_n = 0.0;
  for (double m : means)
    b_over_n += (m - grand) * (m - grand);
  b_over_n /= (means.size() - 1.0);
  double var_plus = (n - 1.0) / n * w + b_over_n;
  if (w <= 0.0)
    return 1.0;
  return std::sqrt(var_plus / w);
}

McmcScalar summarize(const std::string& name, const ChainDiag& d) {
  McmcScalar s;
  s.name = name;
  std::vector<double> all;
  std::vector<double> chain_mcse2;
  for (const auto& chain : d.series) {
    all.insert(all.end(), chain.begin(), chain.end());
    const int n_batches = 20;
    std::size_t bs = chain.size() / n_batches;
    std::vector<double> bm;
    for (int b = 0; b < n_batches; ++b) {
      double m = 0.0;
      for (std::size_t i = 0; i < bs; ++i)
        m += chain[static_cast<std::size_t>(b) * bs + i];
      bm.push_back(m / static_cast<double>(bs));
    }
    double mmean = std::accumulate(bm.begin(), bm.end(), 0.0) / bm.size();
    double v = 0.0;
    for (double m : bm)
      v += (m - mmean) * (m - mmean);
    v /= (bm.size() - 1.0);
    chain_mcse2.push_back(v / static_cast<double>(bm.size()));
  }
  double mean = std::accumulate(all.begin(), all.end(), 0.0) / all.size();
  double var = 0.0;
  for (double v : all)
    var += (v - mean) * (v - mean);
  var /= (all.size() - 1.0);
  s.mean = mean;
  s.sd = std::sqrt(var);
  double mcse2 = 0.0;
  for (double v : chain_mcse2)
    mcse2 += v;
  s.mcse = std::sqrt(mcse2) / static_cast<double>(d.series.size());
  s.rhat = split_rhat(d);
  return s;
}

} // namespace

McmcSummary oracle_mcmc_means(const ObservationBlock& obs, const ConstraintSet& cons,
                              const LatentLayout& layout, const HyperDesc& hyper,
                              const McmcOptions& opts) {
  const int n = layout.n_latent;
  if (n > 200)
    throw DomainError("MCMC oracle is restricted to n_latent <= 200");
  if (layout.config.strict_w_constraints)
    throw DomainError("MCMC oracle supports the global-w constraint layout only");
  const int p = hyper.dim();

  // Orthogonal projector onto null(A) for symmetric on-surface proposals.
  Eigen::MatrixXd a = Eigen::MatrixXd(cons.A);
  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n);
  if (cons.rows() > 0) {
    Eigen::MatrixXd aat = a * a.transpose();
    proj -= a.transpose() * aat.llt().solve(a);
  }

  auto log_target_x = [&](const Eigen::VectorXd& x, const HyperValues& hv) {
    return poisson_loglik(x, obs) + block_log_prior(x, layout, hv);
  };

  const long tracked = 1 + p;
  std::vector<ChainDiag> diags(static_cast<std::size_t>(tracked));
  for (auto& d : diags)
    d.series.resize(static_cast<std::size_t>(opts.chains));

  for (int chain = 0; chain < opts.chains; ++chain) {
    Rng rng = Rng::derive(opts.seed, static_cast<std::uint64_t>(chain));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd theta = hyper.start();
    // overdispersed chain starts
    for (int j = 0; j < p; ++j)
      theta[j] += 0.5 * rng.normal();

    HyperValues hv = hyper.unpack(theta);
    double lt_x = log_target_x(x, hv);
    double lt_theta = 0.5 * closed_logdet_sq(layout, hv) + hyper.log_prior(theta);

    double sx = 0.4 / std::sqrt(static_cast<double>(n));
    double st = 0.4 / std::sqrt(static_cast<double>(p));
    int acc_x = 0, acc_t = 0;
    const long total = opts.burn + opts.keep;
    Eigen::VectorXd xi(n), zeta(p);

    for (long it = 0; it < total; ++it) {
      // latent move
      for (int i = 0; i < n; ++i)
        xi[i] = rng.normal();
      Eigen::VectorXd x_new = x + sx * (proj * xi);
      double lt_new = log_target_x(x_new, hv);
      if (std::log(rng.uniform()) < lt_new - lt_x) {
        x = x_new;
        lt_x = lt_new;
        ++acc_x;
      }
      // hyperparameter move
      for (int j = 0; j < p; ++j)
        zeta[j] = rng.normal();
      Eigen::VectorXd theta_new = theta + st * zeta;
      bool ok = true;
      HyperValues hv_new;
      double ltx_new = 0.0, ltt_new = 0.0;
      try {
        hv_new = hyper.unpack(theta_new);
        ltx_new = log_target_x(x, hv_new);
        ltt_new = 0.5 * closed_logdet_sq(layout, hv_new) + hyper.log_prior(theta_new);
      } catch (const StampError&) {
        ok = false;
      }
      if (ok && std::log(rng.uniform()) <
                    (ltx_new + ltt_new) - (lt_x + lt_theta)) {
        theta = theta_new;
        hv = hv_new;
        lt_x = ltx_new;
        lt_theta = ltt_new;
        ++acc_t;
      }

      if (it < opts.burn) {
        if ((it + 1) % 200 == 0) {
          double rx = acc_x / 200.0, rt = acc_t / 200.0;
          sx *= std::exp(0.6 * (rx - 0.234));
          st *= std::exp(0.6 * (rt - 0.234));
          sx = std::clamp(sx, 1e-6, 10.0);
          st = std::clamp(st, 1e-6, 10.0);
          acc_x = acc_t = 0;
        }
        continue;
      }
      long kept_it = it - opts.burn;
      if (kept_it % opts.thin != 0)
        continue;
      diags[0].series[static_cast<std::size_t>(chain)].push_back(
          x[layout.intercept()]);
      int slot = 1;
      for (int j = 0; j < p; ++j) {
        if (hyper.params()[static_cast<std::size_t>(j)].kind ==
            HyperDesc::Kind::log_tau) {
          diags[static_cast<std::size_t>(slot)].series[static_cast<std::size_t>(chain)]
              .push_back(std::exp(-0.5 * theta[j]));
        } else {
          diags[static_cast<std::size_t>(slot)].series[static_cast<std::size_t>(chain)]
              .push_back(theta_to_rho(theta[j], layout.num_seasons));
        }
        ++slot;
      }
    }
  }

  McmcSummary out;
  out.chains = opts.chains;
  out.kept_per_chain = static_cast<long>(diags[0].series.front().size());
  out.beta0 = summarize("beta0", diags[0]);
  out.max_rhat = out.beta0.rhat;
  for (int j = 0; j < p; ++j) {
    const auto& prm = hyper.params()[static_cast<std::size_t>(j)];
    std::string name = prm.kind == HyperDesc::Kind::log_tau
                           ? "sigma_" + prm.name.substr(8)
                           : "rho_" + prm.name.substr(10);
    McmcScalar s = summarize(name, diags[static_cast<std::size_t>(j + 1)]);
    out.max_rhat = std::max(out.max_rhat, s.rhat);
    out.sigma.push_back(std::move(s));
  }
  if (out.max_rhat > opts.rhat_limit)
    throw NotConverged("MCMC oracle split-Rhat " + std::to_string(out.max_rhat) +
                       " above " + std::to_string(opts.rhat_limit));
  return out;
}

} // namespace stamp

#include "stamp/ppc.hpp"

#include "stamp/equicorr.hpp"
#include "stamp/errors.hpp"
#include "stamp/numeric.hpp"
#include "stamp/parallel.hpp"
#include "stamp/pc_prior.hpp"
#include "stamp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace stamp {

namespace {

// Truncation bound for fixed-effect draws in prior replicates. Untruncated
// N(0, 100^2) draws put essentially all mass at astronomically large
// Poisson means, which would make the check vacuous.
constexpr double kFixedEffectBound = 5.0;
constexpr double kMaxPoissonMean = 1e12;

CountsAndExposure exposures_only(const CellIndex& dims,
                                 const std::vector<double>& exposures) {
  CountsAndExposure data;
  data.index = dims;
  data.counts.assign(static_cast<std::size_t>(dims.num_cells()), 0);
  data.exposures = exposures;
  return data;
}

} // namespace

PriorSimulator::PriorSimulator(const ModelConfig& config, const CellIndex& dims,
                               const std::vector<double>& exposures)
    : config_(config), dims_(dims) {
  auto [lay, cons] = assemble_layout(config, dims);
  layout_ = lay;
  cons_ = std::move(cons);
  obs_ = build_observations(exposures_only(dims, exposures), layout_);
}

std::vector<long long> PriorSimulator::replicate(std::uint64_t seed) const {
  const int I = layout_.num_teams;
  const int S = layout_.num_seasons;
  const int A = kNumAreas;
  const int D = kNumSides;
  Rng hyper_rng = Rng::derive(seed, 0);
  Rng latent_rng = Rng::derive(seed, 1);
  Rng count_rng = Rng::derive(seed, 2);

  const double lam_sd = pc_prec_rate(config_.u_sd, config_.alpha_prec);
  const double lam_slope = pc_prec_rate(config_.u_slope, config_.alpha_prec);

  double sigma_team = hyper_rng.exponential(lam_sd);
  double sigma_area = hyper_rng.exponential(lam_sd);
  double sigma_ta = 0.0, rho_ta = 0.0, sigma_ts = 0.0;
  std::array<double, kNumSlopeKinds> sigma_m{}, rho_m{};
  if (config_.use_ta) {
    sigma_ta = hyper_rng.exponential(lam_sd);
    if (S >= 2) {
      PcCorPrior cor(config_.v_cor, config_.alpha_cor, S);
      rho_ta = cor.sample(hyper_rng);
    }
  }
  if (config_.use_ts)
    sigma_ts = hyper_rng.exponential(lam_sd);
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (!layout_.has_slope(kind))
      continue;
    sigma_m[static_cast<std::size_t>(m)] = hyper_rng.exponential(lam_slope);
    if (S >= 2 && slope_is_team_area(kind)) {
      PcCorPrior cor(config_.v_cor, config_.alpha_cor, S);
      rho_m[static_cast<std::size_t>(m)] = cor.sample(hyper_rng);
    }
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout_.n_latent);
  for (int j = 0; j < layout_.n_fixed; ++j)
    x[layout_.fixed_offset + j] =
        latent_rng.truncated_normal(config_.fixed_effect_sd, kFixedEffectBound);

  // iid blocks are centered directly; for the equicorrelated blocks the
  // global centering equals the kriging projection because R 1 is
  // proportional to 1.
  auto center = [](Eigen::VectorXd& v, int off, int len) {
    double mean = v.segment(off, len).mean();
    v.segment(off, len).array() -= mean;
  };

  for (int i = 0; i < I; ++i)
    x[layout_.u(i)] = sigma_team * latent_rng.normal();
  center(x, layout_.u_offset, I);
  for (int a = 0; a < A; ++a)
    x[layout_.v(a)] = sigma_area * latent_rng.normal();
  center(x, layout_.v_offset, A);

  auto draw_correlated = [&](int offset, int groups, double sigma, double rho) {
    Eigen::MatrixXd chol = equicorr_cholesky(S, std::min(rho, 1.0 - 1e-12));
    Eigen::VectorXd z(S);
    for (int g = 0; g < groups; ++g) {
      for (int s = 0; s < S; ++s)
        z[s] = latent_rng.normal();
      x.segment(offset + g * S, S) = sigma * (chol * z);
    }
    center(x, offset, groups * S);
  };

  if (config_.use_ta)
    draw_correlated(layout_.w_offset, I * A, sigma_ta, rho_ta);
  if (config_.use_ts) {
    for (int j = 0; j < I * D * S; ++j)
      x[layout_.z_offset + j] = sigma_ts * latent_rng.normal();
    for (int i = 0; i < I; ++i)
      for (int s = 0; s < S; ++s) {
        double mean = 0.0;
        for (int d = 0; d < D; ++d)
          mean += x[layout_.z(i, static_cast<Side>(d), s)];
        mean /= D;
        for (int d = 0; d < D; ++d)
          x[layout_.z(i, static_cast<Side>(d), s)] -= mean;
      }
  }
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (!layout_.has_slope(kind))
      continue;
    int off = layout_.slope_offset[m];
    if (slope_is_team_area(kind)) {
      draw_correlated(off, I * A, sigma_m[static_cast<std::size_t>(m)],
                      rho_m[static_cast<std::size_t>(m)]);
    } else {
      for (int j = 0; j < I * S; ++j)
        x[off + j] = sigma_m[static_cast<std::size_t>(m)] * latent_rng.normal();
      center(x, off, I * S);
    }
  }

  std::vector<long long> counts(static_cast<std::size_t>(dims_.num_cells()), 0);
  Eigen::VectorXd eta = obs_.design * x;
  for (Eigen::Index r = 0; r < obs_.rows(); ++r) {
    double mu = obs_.exposures[r] * std::exp(std::min(eta[r], 60.0));
    mu = std::min(mu, kMaxPoissonMean);
    counts[static_cast<std::size_t>(obs_.cell_ids[static_cast<std::size_t>(r)])] =
        count_rng.poisson(mu);
  }
  return counts;
}

std::vector<long long> simulate_prior_replicate(const ModelConfig& config,
                                                const CellIndex& dims,
                                                const std::vector<double>& exposures,
                                                std::uint64_t seed) {
  return PriorSimulator(config, dims, exposures).replicate(seed);
}

std::pair<double, double> ppc_summary_stats(const std::vector<long long>& counts,
                                            const CellIndex& dims,
                                            const std::vector<double>& exposures) {
  if (counts.empty())
    throw EmptyData("ppc_summary_stats: no counts");
  const int S = dims.num_seasons();
  std::vector<double> rates;
  std::vector<double> totals;
  for (int i = 0; i < dims.num_teams(); ++i)
    for (int s = 0; s < S; ++s) {
      double e = exposures[static_cast<std::size_t>(i) * S + s];
      if (e <= 0.0)
        continue;
      long long tot = 0;
      for (int ad = 0; ad < kNumValidAreaSides; ++ad)
        for (int k = 0; k < kNumShotTypes; ++k) {
          const auto& pair =
              AreaPartition::instance().valid_pairs()[static_cast<std::size_t>(ad)];
          long long y = counts[static_cast<std::size_t>(dims.cell(
              i, s, pair.first, pair.second, static_cast<ShotType>(k)))];
          tot += y;
          rates.push_back(static_cast<double>(y) / e);
        }
      totals.push_back(static_cast<double>(tot));
    }
  if (rates.empty())
    throw EmptyData("ppc_summary_stats: no cells with positive exposure");
  return {percentile_type7(std::move(rates), 95.0),
          percentile_type7(std::move(totals), 95.0)};
}

std::pair<double, double> ppc_summary_stats(const CountsAndExposure& data) {
  return ppc_summary_stats(data.counts, data.index, data.exposures);
}

double two_sided_pvalue(std::span<const double> rep_stats, double observed) {
  if (rep_stats.empty())
    throw EmptyData("two_sided_pvalue: no replicate statistics");
  double r = static_cast<double>(rep_stats.size());
  double below = 0.0, above = 0.0;
  for (double v : rep_stats) {
    if (v <= observed)
      below += 1.0;
    if (v >= observed)
      above += 1.0;
  }
  double p = 2.0 * std::min(below / r, above / r);
  return std::clamp(p, 0.0, 1.0);
}

std::vector<PpcReport> ppc_grid_search(const CountsAndExposure& observed,
                                       PpcGridOptions opts) {
  if (opts.base_config == ModelConfig{}) {
    opts.base_config.use_ta = true;
    opts.base_config.use_ts = true;
    opts.base_config.use_jump = true;
    opts.base_config.use_step = true;
  }
  auto [obs_cell, obs_tot] = ppc_summary_stats(observed);

  struct GridPoint {
    double u_sd, u_slope;
  };
  std::vector<GridPoint> grid;
  for (double u_sd : opts.u_sd_grid)
    for (double u_slope : opts.u_slope_grid)
      grid.push_back({u_sd, u_slope});

  const int R = opts.replicates;
  std::vector<PpcReport> reports(grid.size());

  for (std::size_t g = 0; g < grid.size(); ++g) {
    ModelConfig cfg = opts.base_config;
    cfg.u_sd = grid[g].u_sd;
    cfg.u_slope = grid[g].u_slope;
    PriorSimulator sim(cfg, observed.index, observed.exposures);

    std::vector<double> rep_cell(static_cast<std::size_t>(R));
    std::vector<double> rep_tot(static_cast<std::size_t>(R));
    parallel_for(R, [&](std::int64_t r) {
      std::uint64_t rep_seed = mix_seed(opts.seed, g, static_cast<std::uint64_t>(r));
      auto counts = sim.replicate(rep_seed);
      auto [c95, t95] =
          ppc_summary_stats(counts, observed.index, observed.exposures);
      rep_cell[static_cast<std::size_t>(r)] = c95;
      rep_tot[static_cast<std::size_t>(r)] = t95;
    });
    std::sort(rep_cell.begin(), rep_cell.end());
    std::sort(rep_tot.begin(), rep_tot.end());

    PpcReport& rep = reports[g];
    rep.u_sd = grid[g].u_sd;
    rep.u_slope = grid[g].u_slope;
    rep.replicates = R;
    rep.obs_cell_95 = obs_cell;
    rep.obs_tot_95 = obs_tot;
    rep.p_cell_95 = two_sided_pvalue(rep_cell, obs_cell);
    rep.p_tot_95 = two_sided_pvalue(rep_tot, obs_tot);
    rep.pass = rep.p_cell_95 > opts.threshold && rep.p_tot_95 > opts.threshold;
    rep.rep_cell_95 = std::move(rep_cell);
    rep.rep_tot_95 = std::move(rep_tot);
  }
  return reports;
}

std::string format_ppc_grid_text(const std::vector<PpcReport>& reports) {
  std::ostringstream out;
  char buf[160];
  out << "  U_sd U_slope  p_cell_95   p_tot_95  pass\n";
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%6.2f %7.2f %10.4f %10.4f  %s\n", r.u_sd,
                  r.u_slope, r.p_cell_95, r.p_tot_95, r.pass ? "yes" : "no");
    out << buf;
  }
  return out.str();
}

void write_ppc_grid_csv(const std::vector<PpcReport>& reports, std::ostream& out) {
  out << "U_sd,U_slope,p_cell_95,p_tot_95,pass\n";
  char buf[64];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.u_sd);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.u_slope);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.p_cell_95);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.p_tot_95);
    out << buf << ',' << (r.pass ? 1 : 0) << '\n';
  }
}

void write_ppc_grid_csv_file(const std::vector<PpcReport>& reports,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ParseError("cannot open for writing: " + path);
  write_ppc_grid_csv(reports, out);
}

} // namespace stamp

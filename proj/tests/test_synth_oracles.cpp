#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stamp/design.hpp"
#include "stamp/errors.hpp"
#include "stamp/explore.hpp"
#include "stamp/laplace.hpp"
#include "stamp/numeric.hpp"
#include "stamp/oracles.hpp"
#include "stamp/posterior_fit.hpp"
#include "stamp/prior_precision.hpp"
#include "stamp/synth.hpp"

#include <cmath>

using namespace stamp;

TEST_CASE("generator calibration matches the reference scale") {
  GroundTruth truth; // defaults: I=20, S=2, full core structure
  SynthData data = generate(truth, 123);

  // per-team-season attempt totals: mean near the target, spread plausible
  const int I = 20, S = 2;
  std::vector<double> totals;
  for (int i = 0; i < I; ++i)
    for (int s = 0; s < S; ++s) {
      double tot = 0.0;
      for (int ad = 0; ad < kNumValidAreaSides; ++ad)
        for (int k = 0; k < kNumShotTypes; ++k) {
          const auto& pair =
              AreaPartition::instance().valid_pairs()[static_cast<std::size_t>(ad)];
          tot += static_cast<double>(
              data.regular.counts[static_cast<std::size_t>(data.regular.index.cell(
                  i, s, pair.first, pair.second, static_cast<ShotType>(k)))]);
        }
      totals.push_back(tot);
    }
  double mean = 0.0;
  for (double t : totals)
    mean += t;
  mean /= totals.size();
  double sd = 0.0;
  for (double t : totals)
    sd += (t - mean) * (t - mean);
  sd = std::sqrt(sd / (totals.size() - 1.0));
  CHECK(mean == doctest::Approx(4032.16).epsilon(0.03));
  // 40 team-seasons put a wide band on the sd estimate
  CHECK(sd > 120.0);
  CHECK(sd < 400.0);

  // shot-type shares near the reference mix
  std::array<double, kNumShotTypes> share{};
  double total_all = 0.0;
  for (int c = 0; c < data.regular.index.num_cells(); ++c) {
    auto cell = data.regular.index.decode(c);
    share[static_cast<std::size_t>(cell.shot_type)] +=
        static_cast<double>(data.regular.counts[static_cast<std::size_t>(c)]);
    total_all += static_cast<double>(data.regular.counts[static_cast<std::size_t>(c)]);
  }
  std::array<double, kNumShotTypes> target{0.510, 0.165, 0.158, 0.062, 0.058, 0.046};
  for (int k = 0; k < kNumShotTypes; ++k)
    CHECK(share[static_cast<std::size_t>(k)] / total_all ==
          doctest::Approx(target[static_cast<std::size_t>(k)]).epsilon(0.10));

  // post-season exposures follow the configured fraction within a count
  for (std::size_t i = 0; i < data.regular.exposures.size(); ++i)
    CHECK(std::abs(data.post.exposures[i] -
                   truth.post_fraction * data.regular.exposures[i]) <= 1.0);
}

TEST_CASE("generator determinism and explicit-latent mode") {
  GroundTruth truth;
  truth.num_teams = 4;
  truth.num_seasons = 2;
  SynthData a = generate(truth, 9);
  SynthData b = generate(truth, 9);
  CHECK(a.regular.counts == b.regular.counts);
  CHECK(a.latent == b.latent);

  // explicit latent bypasses the effect draws; a new count seed changes
  // only the Poisson noise
  GroundTruth fixed = truth;
  fixed.explicit_latent = a.latent;
  fixed.beta0 = a.beta0;
  SynthData c = generate(fixed, 9, 1001);
  CHECK(c.latent == a.latent);
  CHECK(c.regular.exposures == a.regular.exposures);
  CHECK(c.regular.counts != a.regular.counts);
}

TEST_CASE("generator: zero effects give exchangeable teams") {
  GroundTruth truth;
  truth.num_teams = 10;
  truth.num_seasons = 1;
  truth.sigma_team = 1e-8;
  truth.sigma_area = 1e-8;
  truth.sigma_ta = 1e-8;
  truth.sigma_ts = 1e-8;
  truth.sigma_slope = {1e-8, 1e-8, 1e-8, 1e-8, 1e-8, 1e-8};
  truth.exposure_sd = 1e-8; // equal exposures too

  // chi-square homogeneity of team totals, 20 seeds, reject at 1% never
  // more than a few times
  int rejections = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthData data = generate(truth, seed);
    std::vector<double> totals(10, 0.0);
    for (int c = 0; c < data.regular.index.num_cells(); ++c)
      totals[static_cast<std::size_t>(data.regular.index.decode(c).team)] +=
          static_cast<double>(data.regular.counts[static_cast<std::size_t>(c)]);
    double grand = 0.0;
    for (double t : totals)
      grand += t;
    double expect = grand / 10.0;
    double chi2 = 0.0;
    for (double t : totals)
      chi2 += (t - expect) * (t - expect) / expect;
    // 99th percentile of chi-square with 9 dof
    if (chi2 > 21.67)
      ++rejections;
  }
  CHECK(rejections <= 2);
}

namespace {

struct TinyModel {
  CellIndex index;
  LatentLayout layout;
  ConstraintSet cons;
  ObservationBlock obs;
  HyperDesc hyper;
  PriorPrecision prior;
};

TinyModel tiny_model(const ModelConfig& cfg, int teams, int seasons,
                     std::uint64_t seed) {
  GroundTruth truth;
  truth.config = cfg;
  truth.num_teams = teams;
  truth.num_seasons = seasons;
  truth.exposure_mean = 600.0; // keep counts moderate
  truth.exposure_sd = 40.0;
  truth.target_fga_mean = 500.0;
  SynthData data = generate(truth, seed);

  TinyModel m;
  m.index = data.regular.index;
  auto [lay, cons] = assemble_layout(cfg, m.index);
  m.layout = lay;
  m.cons = std::move(cons);
  m.obs = build_observations(data.regular, m.layout);
  m.hyper = HyperDesc::make(cfg, seasons);
  m.prior = build_prior_precision(m.layout, m.hyper.unpack(m.hyper.start()));
  return m;
}

} // namespace

TEST_CASE("IS oracle: gaussian case is exact") {
  // no observations: the marginal likelihood is exactly 1 (log 0)
  ObservationBlock obs;
  obs.design.resize(0, 3);
  obs.counts.resize(0);
  obs.exposures.resize(0);
  obs.log_exposures.resize(0);
  PriorPrecision prior;
  prior.Q.resize(3, 3);
  std::vector<Eigen::Triplet<double>> trips{{0, 0, 1.0}, {1, 1, 2.0}, {2, 2, 0.5}};
  prior.Q.setFromTriplets(trips.begin(), trips.end());
  prior.logdet = std::log(1.0) + std::log(2.0) + std::log(0.5);
  ConstraintSet cs;
  cs.A.resize(0, 3);

  IsMarginal is = oracle_is_marginal(obs, cs, prior, 20000, 5);
  CHECK(std::abs(is.estimate) < 1e-10);
  CHECK(is.ess == doctest::Approx(20000.0).epsilon(1e-9));
}

TEST_CASE("IS oracle: 1-latent Poisson model matches quadrature") {
  ObservationBlock obs;
  obs.design.resize(1, 1);
  obs.design.insert(0, 0) = 1.0;
  obs.design.makeCompressed();
  obs.counts = Eigen::VectorXd::Constant(1, 3.0);
  obs.exposures = Eigen::VectorXd::Constant(1, 1.0);
  obs.log_exposures = obs.exposures.array().log();
  obs.cell_ids = {0};
  obs.loglik_const = -std::lgamma(4.0);
  PriorPrecision prior;
  prior.Q.resize(1, 1);
  prior.Q.insert(0, 0) = 1.0;
  prior.logdet = 0.0;
  ConstraintSet cs;
  cs.A.resize(0, 1);

  IsMarginal is = oracle_is_marginal(obs, cs, prior, 400000, 11);
  auto integrand = [&](double eta) {
    double ll = 3.0 * eta - std::exp(eta) - std::lgamma(4.0);
    double lp = -0.5 * std::log(2.0 * M_PI) - 0.5 * eta * eta;
    return std::exp(ll + lp);
  };
  double exact = std::log(integrate(integrand, -12.0, 12.0, 1e-14));
  CHECK(std::abs(is.estimate - exact) < 3.0 * is.std_error);
  CHECK(is.std_error < 0.01);
  CHECK(is.ess >= 1000.0);

  // requesting an impossible effective sample size raises
  CHECK_THROWS_AS(oracle_is_marginal(obs, cs, prior, 1000, 11, 1e9),
                  EffectiveSampleSizeTooLow);
}

TEST_CASE("laplace marginal tracks the IS oracle within half a nat") {
  // constrained multi-cell models, mixed configurations, n_latent <= 30
  ModelConfig minimal;
  TinyModel m = tiny_model(minimal, 2, 1, 31);
  REQUIRE(m.layout.n_latent <= 30);

  NewtonWorkspace ws(m.obs, m.cons);
  GaussianApprox ga = ws.solve(m.prior);
  double lap = laplace_log_marginal(m.obs, m.cons, m.prior, ga);
  IsMarginal is = oracle_is_marginal(m.obs, m.cons, m.prior, 400000, 7);
  CHECK(is.ess >= 1000.0);
  CHECK(std::abs(lap - is.estimate) < 0.5);
}

TEST_CASE("MCMC oracle: prior-only model reproduces the prior") {
  // no observations: the posterior is the constrained prior, so beta0 has
  // mean 0 with the fixed-effect scale
  ModelConfig cfg;
  CellIndex idx = make_synth_index(3, 1);
  auto [lay, cons] = assemble_layout(cfg, idx);
  CountsAndExposure empty;
  empty.index = idx;
  empty.counts.assign(static_cast<std::size_t>(idx.num_cells()), 0);
  empty.exposures.assign(3, 0.0); // zero exposure drops every cell
  ObservationBlock obs = build_observations(empty, lay);
  REQUIRE(obs.rows() == 0);
  HyperDesc hyper = HyperDesc::make(cfg, 1);

  McmcOptions opts;
  opts.chains = 4;
  opts.burn = 4000;
  opts.keep = 12000;
  opts.thin = 4;
  opts.seed = 3;
  opts.rhat_limit = 1.1; // prior sampling mixes slowly in 20 dims
  McmcSummary mc = oracle_mcmc_means(obs, cons, lay, hyper, opts);
  CHECK(mc.beta0.rhat <= 1.1);
  CHECK(std::abs(mc.beta0.mean) < 4.0 * mc.beta0.mcse);
  CHECK(mc.sigma.size() == 2);
  for (const auto& s : mc.sigma)
    CHECK(s.rhat > 0.0); // reported for every parameter
}

TEST_CASE("MCMC oracle vs engine on a small real posterior") {
  ModelConfig cfg; // minimal: team + area effects only
  TinyModel m = tiny_model(cfg, 2, 1, 77);
  REQUIRE(m.layout.n_latent <= 200);

  McmcOptions opts;
  opts.chains = 4;
  opts.burn = 8000;
  opts.keep = 40000;
  opts.thin = 4;
  opts.seed = 19;
  McmcSummary mc = oracle_mcmc_means(m.obs, m.cons, m.layout, m.hyper, opts);

  FitOptions fopts;
  fopts.seed = 5;
  fopts.num_samples = 2000;
  GroundTruth truth;
  truth.config = cfg;
  truth.num_teams = 2;
  truth.num_seasons = 1;
  truth.exposure_mean = 600.0;
  truth.exposure_sd = 40.0;
  truth.target_fga_mean = 500.0;
  SynthData data = generate(truth, 77);
  PosteriorFit fit = fit_model(cfg, data.regular, fopts);

  double engine_beta0 = fit.samples.col(fit.layout.intercept()).mean();
  double tol = std::max(3.0 * mc.beta0.mcse, 0.05);
  CHECK(std::abs(engine_beta0 - mc.beta0.mean) < tol);
}

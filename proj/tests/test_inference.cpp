#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stamp/design.hpp"
#include "stamp/errors.hpp"
#include "stamp/explore.hpp"
#include "stamp/laplace.hpp"
#include "stamp/numeric.hpp"
#include "stamp/posterior_fit.hpp"
#include "stamp/prior_precision.hpp"
#include "stamp/rng.hpp"
#include "stamp/synth.hpp"

#include <cmath>

using namespace stamp;

namespace {

// Hand-built observation stack for models outside the shot-grid layout.
ObservationBlock make_obs(int n_latent,
                          const std::vector<std::vector<std::pair<int, double>>>& rows,
                          const std::vector<double>& y, const std::vector<double>& e) {
  ObservationBlock obs;
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (auto [c, v] : rows[r])
      trips.emplace_back(static_cast<int>(r), c, v);
  obs.design.resize(static_cast<Eigen::Index>(rows.size()), n_latent);
  obs.design.setFromTriplets(trips.begin(), trips.end());
  obs.design.makeCompressed();
  obs.counts = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  obs.exposures = Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
  obs.log_exposures = obs.exposures.array().log();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    obs.cell_ids.push_back(static_cast<int>(r));
    obs.loglik_const += y[r] * std::log(e[r]) - std::lgamma(y[r] + 1.0);
  }
  return obs;
}

ConstraintSet no_constraints(int n_latent) {
  ConstraintSet cs;
  cs.A.resize(0, n_latent);
  return cs;
}

PriorPrecision diag_prior(const std::vector<double>& precisions) {
  PriorPrecision p;
  int n = static_cast<int>(precisions.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, precisions[static_cast<std::size_t>(i)]);
    p.logdet += std::log(precisions[static_cast<std::size_t>(i)]);
  }
  p.Q.resize(n, n);
  p.Q.setFromTriplets(trips.begin(), trips.end());
  return p;
}

} // namespace

TEST_CASE("neg_log_posterior: closed form at zero and gradient check") {
  // 2 latent dims, 3 cells
  auto obs = make_obs(2,
                      {{{0, 1.0}}, {{0, 1.0}, {1, 1.0}}, {{1, 1.0}}},
                      {0.0, 0.0, 0.0}, {2.0, 3.0, 4.0});
  PriorPrecision prior = diag_prior({1.0, 1.0});

  // y = 0, x = 0: likelihood term is sum of exposures
  PosteriorEval ev = neg_log_posterior(Eigen::VectorXd::Zero(2), obs, prior.Q);
  CHECK(ev.value == doctest::Approx(2.0 + 3.0 + 4.0).epsilon(1e-14));
  // gradient of the likelihood part = design-weighted exposures
  CHECK(ev.gradient[0] == doctest::Approx(2.0 + 3.0).epsilon(1e-14));
  CHECK(ev.gradient[1] == doctest::Approx(3.0 + 4.0).epsilon(1e-14));

  // finite-difference gradient on a random point
  auto obs2 = make_obs(2,
                       {{{0, 1.0}}, {{0, 1.0}, {1, 1.0}}, {{1, 1.0}}},
                       {5.0, 2.0, 7.0}, {2.0, 3.0, 4.0});
  Rng rng(17);
  Eigen::VectorXd x(2);
  x << rng.normal(), rng.normal();
  PosteriorEval at = neg_log_posterior(x, obs2, prior.Q);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    double fd = (neg_log_posterior(xp, obs2, prior.Q).value -
                 neg_log_posterior(xm, obs2, prior.Q).value) /
                (2 * h);
    CHECK(at.gradient[j] == doctest::Approx(fd).epsilon(1e-6));
  }

  // overflow guard
  Eigen::VectorXd big(2);
  big << 40.0, 0.0;
  CHECK_THROWS_AS(neg_log_posterior(big, obs2, prior.Q), OverflowGuard);
}

TEST_CASE("newton_mode: single cell likelihood mode is log y/E") {
  // y = 3, E = 1, nearly flat prior
  auto obs = make_obs(1, {{{0, 1.0}}}, {3.0}, {1.0});
  PriorPrecision prior = diag_prior({1e-10});
  ConstraintSet cs = no_constraints(1);
  NewtonWorkspace ws(obs, cs);
  GaussianApprox ga = ws.solve(prior);
  CHECK(ga.x_hat[0] == doctest::Approx(std::log(3.0)).epsilon(1e-8));
  CHECK(ga.x_star[0] == ga.x_hat[0]); // no constraints
}

TEST_CASE("newton_mode: quadratic problems converge in one step") {
  // no observations: the posterior is exactly the Gaussian prior
  auto obs = make_obs(3, {}, {}, {});
  PriorPrecision prior = diag_prior({1.0, 2.0, 5.0});
  ConstraintSet cs = no_constraints(3);
  NewtonWorkspace ws(obs, cs);
  Eigen::VectorXd start(3);
  start << 4.0, -3.0, 2.0;
  GaussianApprox ga = ws.solve(prior, &start);
  CHECK(ga.iterations == 1);
  CHECK(ga.x_hat.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("newton_mode: near-Gaussian regime needs at most two steps") {
  const double y = 1e6, e = 1.0;
  auto obs = make_obs(1, {{{0, 1.0}}}, {y}, {e});
  PriorPrecision prior = diag_prior({1e-8});
  ConstraintSet cs = no_constraints(1);
  NewtonWorkspace ws(obs, cs);
  Eigen::VectorXd start(1);
  start << std::log(y / e);
  GaussianApprox ga = ws.solve(prior, &start);
  CHECK(ga.iterations <= 2);
  CHECK(ga.x_hat[0] == doctest::Approx(std::log(y / e)).epsilon(1e-9));
}

TEST_CASE("kriging projection: residual, idempotence, u sums to zero") {
  GroundTruth truth;
  truth.num_teams = 4;
  truth.num_seasons = 2;
  SynthData data = generate(truth, 21);
  auto [lay, cons] = assemble_layout(truth.config, data.regular.index);
  ObservationBlock obs = build_observations(data.regular, lay);
  HyperDesc hyper = HyperDesc::make(truth.config, 2);
  PriorPrecision prior = build_prior_precision(lay, hyper.unpack(hyper.start()));

  NewtonWorkspace ws(obs, cons);
  GaussianApprox ga = ws.solve(prior);

  Eigen::VectorXd residual = cons.A * ga.x_star;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);

  double u_sum = 0.0;
  for (int i = 0; i < 4; ++i)
    u_sum += ga.x_star[lay.u(i)];
  CHECK(std::abs(u_sum) < 1e-10);

  Eigen::VectorXd twice = ga.projector.project(ga.x_star);
  CHECK((twice - ga.x_star).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("laplace marginal matches 1-d adaptive quadrature") {
  // one cell, one latent, weak prior N(0, 10^2); the count is large enough
  // that the Gaussian-approximation error sits well inside the tolerance
  const double y = 25.0, e = 1.0, prec = 0.01;
  auto obs = make_obs(1, {{{0, 1.0}}}, {y}, {e});
  PriorPrecision prior = diag_prior({prec});
  ConstraintSet cs = no_constraints(1);
  NewtonWorkspace ws(obs, cs);
  GaussianApprox ga = ws.solve(prior);
  double laplace = laplace_log_marginal(obs, cs, prior, ga);

  auto integrand = [&](double eta) {
    double loglik = y * eta - e * std::exp(eta) - std::lgamma(y + 1.0);
    double logprior =
        0.5 * std::log(prec) - 0.5 * std::log(2.0 * M_PI) - 0.5 * prec * eta * eta;
    return std::exp(loglik + logprior);
  };
  // integrand mass is concentrated within a fraction of a unit of the mode
  double exact = std::log(integrate(integrand, 0.0, 6.5, 1e-16));
  CHECK(std::abs(laplace - exact) / std::abs(exact) < 1e-3);
}

TEST_CASE("laplace marginal: null constraint on an unobserved block is free") {
  // observed latent 0; latent 1 is unobserved with its own prior and a
  // sum-to-zero row touching only it
  auto obs2 = make_obs(2, {{{0, 1.0}}}, {4.0}, {2.0});
  PriorPrecision prior2 = diag_prior({1.0, 3.0});
  ConstraintSet cs2;
  cs2.A.resize(1, 2);
  cs2.A.insert(0, 1) = 1.0;
  cs2.A.makeCompressed();
  NewtonWorkspace ws2(obs2, cs2);
  GaussianApprox ga2 = ws2.solve(prior2);
  double with_null = laplace_log_marginal(obs2, cs2, prior2, ga2);

  auto obs1 = make_obs(1, {{{0, 1.0}}}, {4.0}, {2.0});
  PriorPrecision prior1 = diag_prior({1.0});
  ConstraintSet cs1 = no_constraints(1);
  NewtonWorkspace ws1(obs1, cs1);
  GaussianApprox ga1 = ws1.solve(prior1);
  double without = laplace_log_marginal(obs1, cs1, prior1, ga1);

  CHECK(std::abs(with_null - without) < 1e-8);
}

TEST_CASE("sample_from_factor reproduces H^{-1}") {
  // random 5x5 SPD matrix
  Rng rng(31);
  Eigen::MatrixXd m(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      m(i, j) = rng.normal();
  Eigen::MatrixXd h_dense = m.transpose() * m + 2.0 * Eigen::MatrixXd::Identity(5, 5);
  Eigen::SparseMatrix<double> h = h_dense.sparseView();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(h);
  REQUIRE(factor.info() == Eigen::Success);

  const int n_draws = 200000;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(5, 5);
  Eigen::VectorXd z(5);
  for (int d = 0; d < n_draws; ++d) {
    for (int i = 0; i < 5; ++i)
      z[i] = rng.normal();
    Eigen::VectorXd v = sample_from_factor(factor, z);
    cov += v * v.transpose();
  }
  cov /= n_draws;
  Eigen::MatrixXd target = h_dense.inverse();
  CHECK((cov - target).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("explore: CCD point count and weights") {
  GroundTruth truth;
  truth.config = ModelConfig{}; // minimal: 2 hyperparameters
  truth.num_teams = 3;
  truth.num_seasons = 1;
  SynthData data = generate(truth, 5);
  auto [lay, cons] = assemble_layout(truth.config, data.regular.index);
  ObservationBlock obs = build_observations(data.regular, lay);
  HyperDesc hyper = HyperDesc::make(truth.config, 1);
  REQUIRE(hyper.dim() == 2);

  ExploreResult res = explore_hyperparameters(obs, cons, lay, hyper, {});
  // 2^2 factorial + 4 axial + center
  CHECK(res.points.size() == 9);
  double total = 0.0;
  for (const auto& pt : res.points) {
    CHECK(pt.weight >= 0.0);
    total += pt.weight;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // center carries the largest weight (it is the located mode)
  double max_w = 0.0;
  for (const auto& pt : res.points)
    max_w = std::max(max_w, pt.weight);
  CHECK(res.points[0].weight == doctest::Approx(max_w));

  SUBCASE("fixed theta: a single exploration point of weight 1") {
    ExploreOptions opts;
    opts.fixed_theta = hyper.start();
    ExploreResult single = explore_hyperparameters(obs, cons, lay, hyper, opts);
    CHECK(single.points.size() == 1);
    CHECK(single.points[0].weight == 1.0);
    CHECK(single.evaluations == 1);
  }

  SUBCASE("grid strategy for p <= 2") {
    ExploreOptions opts;
    opts.strategy = IntStrategy::grid;
    ExploreResult grid = explore_hyperparameters(obs, cons, lay, hyper, opts);
    CHECK(grid.points.size() == 81); // 9 x 9
  }
}

TEST_CASE("sampling: constraints, mean, determinism") {
  GroundTruth truth;
  truth.num_teams = 4;
  truth.num_seasons = 2;
  SynthData data = generate(truth, 77);
  auto [lay, cons] = assemble_layout(truth.config, data.regular.index);
  ObservationBlock obs = build_observations(data.regular, lay);
  HyperDesc hyper = HyperDesc::make(truth.config, 2);

  ExploreOptions eopts;
  eopts.fixed_theta = hyper.start();
  ExploreResult res = explore_hyperparameters(obs, cons, lay, hyper, eopts);

  Eigen::MatrixXd samples =
      sample_latent(obs, cons, lay, hyper, res.points, 2000, 99, nullptr);

  SUBCASE("every sample satisfies the constraints") {
    for (int j = 0; j < samples.rows(); ++j) {
      Eigen::VectorXd r = cons.A * samples.row(j).transpose();
      CHECK(r.cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SUBCASE("sample mean approaches the constrained mode") {
    Eigen::VectorXd mean = samples.colwise().mean();
    Eigen::VectorXd sd(samples.cols());
    for (int c = 0; c < samples.cols(); ++c)
      sd[c] = std::sqrt((samples.col(c).array() - mean[c]).square().sum() /
                        (samples.rows() - 1));
    const double root_j = std::sqrt(static_cast<double>(samples.rows()));
    int outside = 0;
    for (int c = 0; c < samples.cols(); ++c)
      if (std::abs(mean[c] - res.points[0].x_star[c]) > 4.0 * sd[c] / root_j)
        ++outside;
    // a handful of 4-sigma excursions over ~150 coordinates is noise
    CHECK(outside <= 2);
  }

  SUBCASE("same seed reproduces bit-identical samples") {
    Eigen::MatrixXd again =
        sample_latent(obs, cons, lay, hyper, res.points, 2000, 99, nullptr);
    CHECK(samples == again);
  }

  SUBCASE("J must be positive and points nonempty") {
    CHECK_THROWS_AS(sample_latent(obs, cons, lay, hyper, res.points, 0, 1, nullptr),
                    DomainError);
    CHECK_THROWS_AS(sample_latent(obs, cons, lay, hyper, {}, 10, 1, nullptr),
                    MissingSamples);
  }
}

TEST_CASE("fit_model: smoke, determinism, exposure equivariance") {
  GroundTruth truth;
  truth.config = ModelConfig{}; // minimal config
  truth.config.u_sd = 1.5;
  truth.num_teams = 5;
  truth.num_seasons = 1;
  truth.sigma_team = 0.1;
  truth.sigma_area = 0.6;
  SynthData data = generate(truth, 13);

  FitOptions opts;
  opts.seed = 7;
  PosteriorFit fit = fit_model(truth.config, data.regular, opts);
  CHECK(fit.samples.rows() == 400);
  CHECK(fit.samples.cols() == fit.layout.n_latent);
  CHECK(fit.wall_seconds > 0.0);
  CHECK(fit.points.size() == 9); // p = 2

  SUBCASE("identical seed gives bit-identical samples") {
    PosteriorFit fit2 = fit_model(truth.config, data.regular, opts);
    CHECK(fit.samples == fit2.samples);
  }

  SUBCASE("doubling exposures shifts beta0 by -log 2") {
    CountsAndExposure doubled = data.regular;
    for (double& e : doubled.exposures)
      e *= 2.0;
    PosteriorFit fit2 = fit_model(truth.config, doubled, opts);
    double b1 = fit.samples.col(fit.layout.intercept()).mean();
    double b2 = fit2.samples.col(fit.layout.intercept()).mean();
    CHECK(std::abs((b2 - b1) + std::log(2.0)) < 0.02);
  }

  SUBCASE("bundle round trip is exact and byte-stable") {
    std::string path = "/tmp/stamp_test_fit.bin";
    save_fit_bundle(fit, path);
    PosteriorFit back = load_fit_bundle(path);
    CHECK(back.samples == fit.samples);
    CHECK(back.config == fit.config);
    CHECK(back.points.size() == fit.points.size());
    CHECK(back.points[0].theta == fit.points[0].theta);
    CHECK(back.index.teams() == fit.index.teams());

    std::string path2 = "/tmp/stamp_test_fit2.bin";
    save_fit_bundle(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
  }
}

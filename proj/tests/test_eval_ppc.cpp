#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stamp/errors.hpp"
#include "stamp/evaluate.hpp"
#include "stamp/numeric.hpp"
#include "stamp/ppc.hpp"
#include "stamp/rng.hpp"
#include "stamp/synth.hpp"

#include <cmath>
#include <numeric>

using namespace stamp;

namespace {

// A fit whose "posterior" is a fixed set of latent vectors, for exact
// scoring identities.
PosteriorFit degenerate_fit(const CellIndex& idx, const ModelConfig& cfg,
                            const std::vector<Eigen::VectorXd>& latents) {
  PosteriorFit fit;
  fit.config = cfg;
  fit.index = idx;
  auto [lay, cons] = assemble_layout(cfg, idx);
  fit.layout = lay;
  fit.constraints = std::move(cons);
  fit.hyper = HyperDesc::make(cfg, lay.num_seasons);
  ExplorationPoint pt;
  pt.theta = fit.hyper.start();
  pt.weight = 1.0;
  pt.x_hat = latents.front();
  pt.x_star = latents.front();
  fit.points.push_back(pt);
  fit.samples.resize(static_cast<Eigen::Index>(latents.size()), lay.n_latent);
  for (std::size_t j = 0; j < latents.size(); ++j)
    fit.samples.row(static_cast<Eigen::Index>(j)) = latents[j].transpose();
  fit.sample_source.assign(latents.size(), 0);
  return fit;
}

CountsAndExposure flat_data(const CellIndex& idx, long long count_everywhere,
                            double exposure) {
  CountsAndExposure data;
  data.index = idx;
  data.counts.assign(static_cast<std::size_t>(idx.num_cells()), count_everywhere);
  data.exposures.assign(
      static_cast<std::size_t>(idx.num_teams()) * idx.num_seasons(), exposure);
  return data;
}

} // namespace

TEST_CASE("elpd: degenerate single-sample fit equals the plug-in log likelihood") {
  CellIndex idx = make_synth_index(1, 1);
  ModelConfig cfg;
  auto [lay, cons] = assemble_layout(cfg, idx);
  (void)cons;

  // all latent zero except beta0 = log 2, exposure 1: mu = 2 in every cell
  Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.n_latent);
  x[lay.intercept()] = std::log(2.0);
  PosteriorFit fit = degenerate_fit(idx, cfg, {x});

  CountsAndExposure data = flat_data(idx, 0, 1.0);
  // one cell holds y = 2
  data.counts[17] = 2;

  ElpdResult res = elpd_mc(fit, data, 1);
  CHECK(res.cells_used == 78);
  double expect = 0.0;
  for (int c = 0; c < idx.num_cells(); ++c) {
    double mu = std::exp(std::log(2.0));
    double y = static_cast<double>(data.counts[static_cast<std::size_t>(c)]);
    expect += y * std::log(2.0) - mu - std::lgamma(y + 1.0);
  }
  CHECK(res.elpd == doctest::Approx(expect).epsilon(1e-14));

  // the y = 2, mu = 2 cell scores ln 2 - 2
  double zero_cells = -std::exp(std::log(2.0)) * 77.0;
  CHECK(res.elpd - zero_cells ==
        doctest::Approx(std::log(2.0) - 2.0).epsilon(1e-12));
}

TEST_CASE("elpd: zero-count cell scores -mu; zero-exposure cells are excluded") {
  CellIndex idx = make_synth_index(1, 2);
  ModelConfig cfg;
  auto [lay, cons] = assemble_layout(cfg, idx);
  (void)cons;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.n_latent);
  PosteriorFit fit = degenerate_fit(idx, cfg, {x});

  CountsAndExposure data = flat_data(idx, 0, 3.0);
  // season 2 has no exposure: its 78 cells drop out
  data.exposures[1] = 0.0;
  ElpdResult res = elpd_mc(fit, data, 1);
  CHECK(res.cells_used == 78);
  CHECK(res.cells_excluded == 78);
  CHECK(res.elpd == doctest::Approx(-3.0 * 78.0).epsilon(1e-12));
}

TEST_CASE("elpd: missing samples raise") {
  CellIndex idx = make_synth_index(1, 1);
  ModelConfig cfg;
  auto [lay, cons] = assemble_layout(cfg, idx);
  (void)cons;
  PosteriorFit fit = degenerate_fit(idx, cfg, {Eigen::VectorXd::Zero(lay.n_latent)});
  CountsAndExposure data = flat_data(idx, 1, 1.0);
  CHECK_THROWS_AS(elpd_mc(fit, data, 2), MissingSamples);
}

TEST_CASE("elpd: log-sum-exp stays finite over extreme rate/count ranges") {
  CellIndex idx = make_synth_index(1, 1);
  ModelConfig cfg;
  auto [lay, cons] = assemble_layout(cfg, idx);
  (void)cons;
  for (double log_mu : {std::log(1e-12), 0.0, std::log(1e12 / 50.0)}) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.n_latent);
    x[lay.intercept()] = log_mu - std::log(50.0);
    PosteriorFit fit = degenerate_fit(idx, cfg, {x});
    for (long long y : {0LL, 5LL, 1000000LL}) {
      CountsAndExposure data = flat_data(idx, y, 50.0);
      ElpdResult res = elpd_mc(fit, data, 1);
      CHECK(std::isfinite(res.elpd));
    }
  }
}

TEST_CASE("cpo: harmonic-mean identities") {
  CellIndex idx = make_synth_index(1, 1);
  ModelConfig cfg;
  auto [lay, cons] = assemble_layout(cfg, idx);
  (void)cons;

  SUBCASE("constant-eta fit: CPO equals the plug-in density") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.n_latent);
    x[lay.intercept()] = 0.3;
    PosteriorFit fit = degenerate_fit(idx, cfg, {x, x, x});
    CountsAndExposure data = flat_data(idx, 2, 1.5);
    CpoResult res = cpo_lpml(fit, data, 3);
    double mu = 1.5 * std::exp(0.3);
    double logp = 2.0 * std::log(mu) - mu - std::lgamma(3.0);
    for (double lc : res.log_cpo)
      CHECK(lc == doctest::Approx(logp).epsilon(1e-12));
    CHECK(res.lpml == doctest::Approx(78.0 * logp).epsilon(1e-12));
    CHECK(res.degenerate_cells.empty());
  }

  SUBCASE("two samples with densities p and q give CPO = 2pq/(p+q)") {
    Eigen::VectorXd x1 = Eigen::VectorXd::Zero(lay.n_latent);
    Eigen::VectorXd x2 = Eigen::VectorXd::Zero(lay.n_latent);
    x1[lay.intercept()] = 0.1;
    x2[lay.intercept()] = 0.9;
    PosteriorFit fit = degenerate_fit(idx, cfg, {x1, x2});
    CountsAndExposure data = flat_data(idx, 3, 2.0);
    CpoResult res = cpo_lpml(fit, data, 2);
    auto dens = [&](double b0) {
      double mu = 2.0 * std::exp(b0);
      return std::exp(3.0 * std::log(mu) - mu - std::lgamma(4.0));
    };
    double p = dens(0.1), q = dens(0.9);
    double harmonic = 2.0 * p * q / (p + q);
    CHECK(std::exp(res.log_cpo[0]) == doctest::Approx(harmonic).epsilon(1e-12));
  }

  SUBCASE("degenerate cells are flagged and excluded from LPML") {
    Eigen::VectorXd x1 = Eigen::VectorXd::Zero(lay.n_latent);
    Eigen::VectorXd x2 = Eigen::VectorXd::Zero(lay.n_latent);
    x2[lay.intercept()] = std::log(1200.0); // mu = 1200, y = 0: p underflows
    PosteriorFit fit = degenerate_fit(idx, cfg, {x1, x2});
    CountsAndExposure data = flat_data(idx, 0, 1.0);
    CpoResult res = cpo_lpml(fit, data, 2);
    CHECK(res.degenerate_cells.size() == 78);
    CHECK(res.lpml == 0.0); // empty valid set sums to zero
  }
}

TEST_CASE("kendall tau") {
  std::vector<int> ids(16);
  std::iota(ids.begin(), ids.end(), 0);
  CHECK(kendall_tau(ids, ids) == 1.0);

  std::vector<int> rev(ids.rbegin(), ids.rend());
  CHECK(kendall_tau(ids, rev) == -1.0);

  std::vector<int> swapped = ids;
  std::swap(swapped[7], swapped[8]);
  CHECK(kendall_tau(ids, swapped) ==
        doctest::Approx(1.0 - 2.0 / 120.0).epsilon(1e-12));

  std::vector<int> other = {1, 2, 3};
  CHECK_THROWS_AS(kendall_tau(ids, other), MismatchedIds);
  std::vector<int> dup = ids;
  dup[3] = dup[4];
  CHECK_THROWS_AS(kendall_tau(dup, dup), MismatchedIds);
}

TEST_CASE("comparison table ordering and invariance to cell order") {
  // hand-made rows exercise the tie-break chain without any fitting
  ComparisonTable table;
  table.rows.resize(3);
  table.rows[0].elpd = -10.0;
  table.rows[0].lpml = -50.0;
  table.rows[1].elpd = -8.0;
  table.rows[1].lpml = -60.0;
  table.rows[2].elpd = -10.0;
  table.rows[2].lpml = -40.0;
  table.ranking = {0, 1, 2};
  // (not a public API: ranking recomputed through compare_* only; here we
  // just check the emitters tolerate arbitrary order)
  std::ostringstream out;
  write_table_csv(table, out);
  CHECK(out.str().find("use_ta") == 0);
}

TEST_CASE("ppc summary statistics") {
  SUBCASE("all-zero counts give (0, 0)") {
    CellIndex idx = make_synth_index(3, 1);
    std::vector<long long> counts(static_cast<std::size_t>(idx.num_cells()), 0);
    std::vector<double> exposures(3, 10.0);
    auto [c95, t95] = ppc_summary_stats(counts, idx, exposures);
    CHECK(c95 == 0.0);
    CHECK(t95 == 0.0);
  }

  SUBCASE("single team-season: T_tot is its total") {
    CellIndex idx = make_synth_index(1, 1);
    std::vector<long long> counts(static_cast<std::size_t>(idx.num_cells()), 0);
    counts[3] = 7;
    counts[40] = 5;
    std::vector<double> exposures(1, 2.0);
    auto [c95, t95] = ppc_summary_stats(counts, idx, exposures);
    CHECK(t95 == 12.0);
    std::vector<double> rates;
    for (int c = 0; c < idx.num_cells(); ++c)
      rates.push_back(static_cast<double>(counts[static_cast<std::size_t>(c)]) / 2.0);
    CHECK(c95 == doctest::Approx(percentile_type7(rates, 95.0)).epsilon(1e-14));
  }

  SUBCASE("team-season totals 1..20 give the type-7 value 19.05") {
    CellIndex idx = make_synth_index(20, 1);
    std::vector<long long> counts(static_cast<std::size_t>(idx.num_cells()), 0);
    for (int i = 0; i < 20; ++i) {
      int cell = idx.cell(i, 0, 0, Side::Center, ShotType::jump_shot);
      counts[static_cast<std::size_t>(cell)] = i + 1;
    }
    std::vector<double> exposures(20, 1.0);
    auto [c95, t95] = ppc_summary_stats(counts, idx, exposures);
    (void)c95;
    CHECK(t95 == doctest::Approx(19.05).epsilon(1e-12));
  }
}

TEST_CASE("two-sided p-value") {
  std::vector<double> reps(800);
  for (int i = 0; i < 800; ++i)
    reps[static_cast<std::size_t>(i)] = static_cast<double>(i) + 1.0;

  // observed at the replicate median: 400 on each side
  CHECK(two_sided_pvalue(reps, 400.5) == doctest::Approx(1.0));
  // 10 of 800 at or below the observed value
  CHECK(two_sided_pvalue(reps, 10.0) == doctest::Approx(2.0 * 10.0 / 800.0));
  // observed below all replicates
  CHECK(two_sided_pvalue(reps, 0.0) == 0.0);
  // observed above all replicates
  CHECK(two_sided_pvalue(reps, 1e9) == 0.0);
  // observed equal to a replicate value: at least 2/R
  CHECK(two_sided_pvalue(reps, 800.0) >= 2.0 / 800.0);

  // permutation invariance
  std::vector<double> shuffled = reps;
  std::mt19937_64 gen(3);
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  CHECK(two_sided_pvalue(shuffled, 123.0) == two_sided_pvalue(reps, 123.0));

  CHECK_THROWS_AS(two_sided_pvalue({}, 1.0), EmptyData);
}

TEST_CASE("prior simulator: determinism and structure") {
  GroundTruth truth;
  truth.num_teams = 3;
  truth.num_seasons = 2;
  SynthData data = generate(truth, 2);

  ModelConfig cfg = truth.config;
  cfg.u_sd = 1.5;
  cfg.u_slope = 1.0;
  PriorSimulator sim(cfg, data.regular.index, data.regular.exposures);

  auto rep1 = sim.replicate(42);
  auto rep2 = sim.replicate(42);
  CHECK(rep1 == rep2);
  auto rep3 = sim.replicate(43);
  CHECK(rep1 != rep3);
  CHECK(rep1.size() == static_cast<std::size_t>(data.regular.index.num_cells()));

  SUBCASE("tiny scales concentrate replicates toward the fixed-effect value") {
    // Per-seed statistics still vary with the +-5 fixed-effect draws, so
    // the shrinkage shows up in the aggregate: log statistics over seeds.
    ModelConfig tight = cfg;
    tight.u_sd = 0.01;
    tight.u_slope = 0.01;
    PriorSimulator tight_sim(tight, data.regular.index, data.regular.exposures);
    double log_tot_gap = 0.0;
    int cell_wider = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      auto wide_rep = sim.replicate(s);
      auto tight_rep = tight_sim.replicate(s);
      auto [wc, wt] = ppc_summary_stats(wide_rep, data.regular.index,
                                        data.regular.exposures);
      auto [tc, tt] = ppc_summary_stats(tight_rep, data.regular.index,
                                        data.regular.exposures);
      log_tot_gap += std::log(wt + 1.0) - std::log(tt + 1.0);
      if (wc >= tc)
        ++cell_wider;
    }
    CHECK(log_tot_gap > 0.0);
    CHECK(cell_wider >= 6);
  }
}

TEST_CASE("ppc grid search structure on a reduced grid") {
  GroundTruth truth;
  truth.num_teams = 3;
  truth.num_seasons = 1;
  SynthData data = generate(truth, 11);

  PpcGridOptions opts;
  opts.u_sd_grid = {0.5, 1.5};
  opts.u_slope_grid = {1.0};
  opts.replicates = 40;
  opts.seed = 9;
  auto reports = ppc_grid_search(data.regular, opts);
  REQUIRE(reports.size() == 2);
  for (const auto& r : reports) {
    CHECK(r.replicates == 40);
    CHECK(r.rep_cell_95.size() == 40);
    CHECK(std::is_sorted(r.rep_cell_95.begin(), r.rep_cell_95.end()));
    CHECK(r.p_cell_95 >= 0.0);
    CHECK(r.p_cell_95 <= 1.0);
    CHECK(r.pass == (r.p_cell_95 > 0.05 && r.p_tot_95 > 0.05));
  }

  // determinism
  auto again = ppc_grid_search(data.regular, opts);
  CHECK(again[0].p_cell_95 == reports[0].p_cell_95);
  CHECK(again[1].rep_tot_95 == reports[1].rep_tot_95);

  // emitters
  std::ostringstream csv;
  write_ppc_grid_csv(reports, csv);
  CHECK(csv.str().find("U_sd,U_slope,p_cell_95,p_tot_95,pass") == 0);
  CHECK(!format_ppc_grid_text(reports).empty());
}

TEST_CASE("default ppc grid enumerates 5x5 with R=800") {
  PpcGridOptions opts;
  CHECK(opts.u_sd_grid.size() == 5);
  CHECK(opts.u_slope_grid.size() == 5);
  CHECK(opts.replicates == 800);
  CHECK(opts.threshold == 0.05);
  std::vector<double> expect{0.5, 0.8, 1.0, 1.2, 1.5};
  CHECK(opts.u_sd_grid == expect);
  CHECK(opts.u_slope_grid == expect);
}

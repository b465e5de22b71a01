#pragma once

#include "stamp/posterior_fit.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace stamp {

struct ElpdResult {
  double elpd = 0.0;
  int cells_used = 0;
  int cells_excluded = 0; // zero-exposure cells left out of the sum
};

/// Monte-Carlo expected log predictive density on a held-out split:
/// per cell, log( (1/J) sum_j Poisson(y_c | E e^{eta_c^(j)}) ) in
/// log-sum-exp form, summed over cells with positive exposure. Throws
/// MissingSamples if the fit holds fewer than j_draws samples.
ElpdResult elpd_mc(const PosteriorFit& fit, const CountsAndExposure& held_out,
                   int j_draws);

struct CpoResult {
  std::vector<double> log_cpo;     // per evaluated cell (aligned with cell_ids)
  std::vector<int> cell_ids;
  double lpml = 0.0;               // over non-degenerate cells
  std::vector<int> degenerate_cells; // harmonic estimator hit a zero density
};

/// Conditional predictive ordinates by the harmonic-mean identity
/// CPO_c ~ [ (1/J) sum_j 1/p(y_c | eta_c^(j)) ]^{-1}, accumulated in log
/// space; degenerate cells are excluded from LPML and reported.
CpoResult cpo_lpml(const PosteriorFit& fit, const CountsAndExposure& fitted_split,
                   int j_draws);

struct ComparisonRow {
  ModelConfig config;
  double elpd = 0.0;
  double lpml = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;   // enumeration order
  std::vector<int> ranking;          // row indices, best elpd first
  bool extended = false;
  int j_draws = 400;
  std::uint64_t seed = 0;
  std::uint64_t dataset_hash = 0;
};

struct CompareOptions {
  std::uint64_t seed = 1;
  int j_draws = 400;
  ExploreOptions explore;
};

/// Fits all 16 core random-effects structures with shared prior scales and
/// a per-structure derived seed; rows fit in parallel, failures are
/// recorded in-row. Ranking: elpd desc, then lpml desc, then enumeration
/// order.
ComparisonTable compare_core(const CountsAndExposure& regular,
                             const CountsAndExposure& post, double u_sd,
                             double u_slope, const CompareOptions& opts = {});

/// The 32 extended candidates (ta/jump/step fixed on).
ComparisonTable compare_extended(const CountsAndExposure& regular,
                                 const CountsAndExposure& post, double u_sd = 1.5,
                                 double u_slope = 1.0, const CompareOptions& opts = {});

/// Kendall tau-a between two rankings of the same id set (no ties).
double kendall_tau(const std::vector<int>& ranking_a, const std::vector<int>& ranking_b);

struct SweepResult {
  std::vector<std::pair<double, double>> priors; // (U_sd, U_slope)
  std::vector<ComparisonTable> tables;
  Eigen::MatrixXd tau;                 // pairwise rank correlations
  std::vector<double> mean_elpd;       // per structure, averaged over priors
};

/// compare_core under each admissible prior setting plus the pairwise
/// Kendall-tau matrix between the resulting rankings.
SweepResult prior_sensitivity_sweep(const CountsAndExposure& regular,
                                    const CountsAndExposure& post,
                                    const std::vector<std::pair<double, double>>& priors,
                                    const CompareOptions& opts = {});

/// Plain-text rendering (top_n < 0 renders all rows).
std::string format_table_text(const ComparisonTable& table, int top_n = -1);
void write_table_csv(const ComparisonTable& table, std::ostream& out);
void write_table_csv_file(const ComparisonTable& table, const std::string& path);
ComparisonTable read_table_csv_file(const std::string& path);

std::uint64_t dataset_hash(const CountsAndExposure& data);

} // namespace stamp

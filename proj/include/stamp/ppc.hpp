#pragma once

#include "stamp/design.hpp"
#include "stamp/layout.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace stamp {

struct PpcReport {
  double u_sd = 0.0;
  double u_slope = 0.0;
  int replicates = 0;
  double p_cell_95 = 0.0;
  double p_tot_95 = 0.0;
  bool pass = false; // both p-values strictly above the threshold
  double obs_cell_95 = 0.0;
  double obs_tot_95 = 0.0;
  std::vector<double> rep_cell_95; // sorted replicate statistics
  std::vector<double> rep_tot_95;
};

/// Simulates prior predictive replicates of the cell counts for fixed
/// exposures: hyperparameters from their PC priors, fixed effects from the
/// wide prior truncated to +-5 on the log-rate scale, latent effects from
/// their Gaussians projected onto the constraints, then Poisson counts.
class PriorSimulator {
public:
  PriorSimulator(const ModelConfig& config, const CellIndex& dims,
                 const std::vector<double>& exposures);

  std::vector<long long> replicate(std::uint64_t seed) const;

  const LatentLayout& layout() const { return layout_; }
  const CellIndex& dims() const { return dims_; }

private:
  ModelConfig config_;
  CellIndex dims_;
  LatentLayout layout_;
  ConstraintSet cons_;
  ObservationBlock obs_; // counts unused; design/exposures reused per replicate
};

std::vector<long long> simulate_prior_replicate(const ModelConfig& config,
                                                const CellIndex& dims,
                                                const std::vector<double>& exposures,
                                                std::uint64_t seed);

/// (T_cell,95, T_tot,95): 95th percentile of cell rates y/E over cells with
/// positive exposure, and of team-season total counts; type-7 interpolation.
std::pair<double, double> ppc_summary_stats(const std::vector<long long>& counts,
                                            const CellIndex& dims,
                                            const std::vector<double>& exposures);
std::pair<double, double> ppc_summary_stats(const CountsAndExposure& data);

/// p = 2 min( #{rep <= obs}/R, #{rep >= obs}/R ), clamped to [0, 1].
double two_sided_pvalue(std::span<const double> rep_stats, double observed);

struct PpcGridOptions {
  std::vector<double> u_sd_grid{0.5, 0.8, 1.0, 1.2, 1.5};
  std::vector<double> u_slope_grid{0.5, 0.8, 1.0, 1.2, 1.5};
  int replicates = 800;
  double threshold = 0.05;
  std::uint64_t seed = 1;
  /// Structure used for the prior predictive draws (full core by default).
  ModelConfig base_config;
};

/// Evaluates the full scale grid against the observed data: R prior
/// replicates per candidate, two two-sided p-values each, pass when both
/// exceed the threshold.
std::vector<PpcReport> ppc_grid_search(const CountsAndExposure& observed,
                                       PpcGridOptions opts = {});

std::string format_ppc_grid_text(const std::vector<PpcReport>& reports);
void write_ppc_grid_csv(const std::vector<PpcReport>& reports, std::ostream& out);
void write_ppc_grid_csv_file(const std::vector<PpcReport>& reports,
                             const std::string& path);

} // namespace stamp

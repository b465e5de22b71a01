#pragma once

#include "stamp/posterior_fit.hpp"

#include <array>
#include <string>
#include <vector>

namespace stamp {

/// League-normalized relative-rate map for one (team, season, shot type):
/// posterior-mean rate multiplier and league percentile per valid
/// (area, side) tile.
struct PercentileMap {
  std::string team;
  std::string season;
  ShotType shot_type = ShotType::jump_shot;
  bool side_scaling = true;
  std::array<double, kNumValidAreaSides> rate;       // posterior-mean multiplier
  std::array<double, kNumValidAreaSides> percentile; // 0..100

  PercentileMap() {
    rate.fill(std::numeric_limits<double>::quiet_NaN());
    percentile.fill(std::numeric_limits<double>::quiet_NaN());
  }
};

/// Posterior mean of exp(team-varying contribution) per tile (team x area
/// effect, enabled shot-type slopes and, with side_scaling, the team x side
/// effect), ranked against all teams in the same season/area/side/shot-type
/// slice; percentile = 100 (rank - 0.5) / n_teams with midranks for ties.
/// Throws ComponentMissing when the fit has no team x area block.
PercentileMap percentile_map(const PosteriorFit& fit, const std::string& team,
                             const std::string& season, ShotType shot_type,
                             bool side_scaling = true);

/// One team's left-right bias: posterior summary of the season geometric
/// mean of the Right/Left rate multiplier ratio, on the log scale.
struct LrBiasRow {
  std::string team;
  double point = 0.0;
  double lo = 0.0; // 2.5% sample quantile
  double hi = 0.0; // 97.5%
};

/// Per posterior sample, mean over seasons of z_{i,Right,s} - z_{i,Left,s};
/// rows sorted by point estimate. Throws ComponentMissing without use_ts.
std::vector<LrBiasRow> lr_bias(const PosteriorFit& fit);

/// 8-step dark-to-bright percentile ramp; bin = min(7, percentile / 12.5).
const std::array<const char*, 8>& percentile_color_ramp();

/// Court-tile SVG (Fig-1-style layout, mirrored tiles for merged zones).
/// Byte-deterministic for fixed inputs; NaN tiles render gray without a
/// label.
std::string render_map_svg(const PercentileMap& map);

/// Caterpillar SVG with a dashed zero-reference line.
std::string render_lr_svg(const std::vector<LrBiasRow>& rows);

void write_map_csv(const PercentileMap& map, std::ostream& out);
void write_lr_csv(const std::vector<LrBiasRow>& rows, std::ostream& out);

} // namespace stamp

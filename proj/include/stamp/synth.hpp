#pragma once

#include "stamp/layout.hpp"
#include "stamp/shotgrid.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace stamp {

/// Known generating process for synthetic leagues. Defaults reproduce the
/// reference dataset's scale: about 4032 attempts per team-season
/// (sd about 252) and the observed shot-type mix, with a post-season
/// exposure fraction of 3.26%.
struct GroundTruth {
  ModelConfig config; // which random-effect blocks exist
  int num_teams = 20;
  int num_seasons = 2;

  // Fixed effects. beta0 = NaN means "tune to target_fga_mean".
  double beta0 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> season_dev;       // size S-1, defaults to zeros
  double side_dev_left = 0.0;
  double side_dev_right = 0.0;
  std::array<double, 5> shot_dev{-1.1316, -1.1700, -2.1083, -2.1723, -2.3995};

  double sigma_team = 0.05;
  double sigma_area = 0.8;
  double sigma_ta = 0.15;
  double rho_ta = 0.6;
  double sigma_ts = 0.08;
  std::array<double, kNumSlopeKinds> sigma_slope{0.2, 0.2, 0.1, 0.1, 0.1, 0.1};
  std::array<double, kNumSlopeKinds> rho_slope{0.6, 0.6, 0.0, 0.0, 0.0, 0.0};

  /// Bypass the random effect draws entirely (must satisfy the sum-to-zero
  /// constraints; generation re-centers as a safeguard).
  std::optional<Eigen::VectorXd> explicit_latent;

  double exposure_mean = 4800.0;
  double exposure_sd = 150.0;
  double exposure_min = 100.0;
  double target_fga_mean = 4032.16;
  double post_fraction = 0.0326;

  GroundTruth() {
    config.use_ta = true;
    config.use_ts = true;
    config.use_jump = true;
    config.use_step = true;
  }

  std::string to_kv() const;
  static GroundTruth from_kv(const std::string& text);
  static GroundTruth from_kv_file(const std::string& path);
};

struct SynthData {
  CountsAndExposure regular;
  CountsAndExposure post;
  Eigen::VectorXd latent;  // includes the tuned beta0
  double beta0 = 0.0;
  LatentLayout layout;
};

/// Team/season ids used by the generator ("t01".., "s1"..).
CellIndex make_synth_index(int num_teams, int num_seasons);

/// Draws exposures and latent effects, tunes beta0 by bisection when
/// requested, and emits Poisson counts for both splits. count_seed changes
/// only the Poisson noise.
SynthData generate(const GroundTruth& truth, std::uint64_t seed,
                   std::optional<std::uint64_t> count_seed = {});

} // namespace stamp

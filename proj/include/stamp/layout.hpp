#pragma once

#include "stamp/model_config.hpp"
#include "stamp/shotgrid.hpp"

#include <Eigen/Sparse>

#include <array>
#include <string>

namespace stamp {

/// Shot-type-specific random slope blocks. Jump and step slopes vary by
/// team x area x season; the extended four are team-level, season-specific
/// scalars.
enum class SlopeKind : int { jump = 0, step = 1, lay = 2, floater = 3, rim = 4, fade = 5 };
constexpr int kNumSlopeKinds = 6;

ShotType slope_shot_type(SlopeKind m);
const char* slope_name(SlopeKind m);
constexpr bool slope_is_team_area(SlopeKind m) {
  return m == SlopeKind::jump || m == SlopeKind::step;
}

/// Block map from model components to indices of the latent Gaussian
/// vector. Blocks are contiguous and disjoint; disabled components have no
/// block (offset -1). Season-correlated blocks store each (team, area)
/// group as S consecutive entries.
struct LatentLayout {
  ModelConfig config;
  int num_teams = 0;
  int num_seasons = 0;
  int n_latent = 0;

  int fixed_offset = 0;
  int n_fixed = 0;
  int u_offset = -1;
  int v_offset = -1;
  int w_offset = -1;
  int z_offset = -1;
  std::array<int, kNumSlopeKinds> slope_offset{-1, -1, -1, -1, -1, -1};

  bool has_slope(SlopeKind m) const { return slope_offset[static_cast<int>(m)] >= 0; }

  int intercept() const { return fixed_offset; }
  /// Season deviation for s >= 1 (season 0 is the reference): -1 at the
  /// reference.
  int season_dev(int s) const { return s == 0 ? -1 : fixed_offset + s; }
  /// Side deviation; Center is the reference.
  int side_dev(Side d) const;
  /// Shot-type deviation; jump_shot is the reference.
  int shot_dev(ShotType k) const;

  int u(int i) const { return u_offset + i; }
  int v(int a) const { return v_offset + a; }
  int w(int i, int a, int s) const {
    return w_offset + (i * kNumAreas + a) * num_seasons + s;
  }
  int z(int i, Side d, int s) const {
    return z_offset + (i * num_seasons + s) * kNumSides + static_cast<int>(d);
  }
  /// Team x area x season slope entry (jump/step only).
  int slope_ias(SlopeKind m, int i, int a, int s) const {
    return slope_offset[static_cast<int>(m)] + (i * kNumAreas + a) * num_seasons + s;
  }
  /// Team x season slope entry (extended kinds only).
  int slope_is(SlopeKind m, int i, int s) const {
    return slope_offset[static_cast<int>(m)] + i * num_seasons + s;
  }
  int slope_block_size(SlopeKind m) const {
    return slope_is_team_area(m) ? num_teams * kNumAreas * num_seasons
                                 : num_teams * num_seasons;
  }

  /// Human-readable name of a latent dimension (diagnostics).
  std::string dim_name(int idx) const;
};

/// Sum-to-zero constraint system A x = 0.
struct ConstraintSet {
  Eigen::SparseMatrix<double> A; // rows x n_latent, row-major storage not required
  int rows() const { return static_cast<int>(A.rows()); }
};

/// Builds the latent block map and its constraint system:
///   sum_i u_i = 0;  sum_a v_a = 0;  global sum of w = 0 (if use_ta; or one
///   row per (area, season) under strict_w_constraints);  sum_d z_{ids} = 0
///   for every (i, s) (if use_ts);  one global row per enabled slope.
/// Verifies numerically that A has full row rank. Throws InvalidConfig for
/// inconsistent configs.
std::pair<LatentLayout, ConstraintSet> assemble_layout(const ModelConfig& config,
                                                       const CellIndex& dims);

} // namespace stamp

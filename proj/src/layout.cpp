#include "stamp/layout.hpp"

#include "stamp/errors.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace stamp {

ShotType slope_shot_type(SlopeKind m) {
  switch (m) {
  case SlopeKind::jump: return ShotType::jump_shot;
  case SlopeKind::step: return ShotType::step_pull;
  case SlopeKind::lay: return ShotType::lay_up;
  case SlopeKind::floater: return ShotType::floater;
  case SlopeKind::rim: return ShotType::rim_finishes;
  case SlopeKind::fade: return ShotType::fade_turn;
  }
  return ShotType::jump_shot;
}

const char* slope_name(SlopeKind m) {
  switch (m) {
  case SlopeKind::jump: return "jump";
  case SlopeKind::step: return "step";
  case SlopeKind::lay: return "lay";
  case SlopeKind::floater: return "float";
  case SlopeKind::rim: return "rim";
  case SlopeKind::fade: return "fade";
  }
  return "?";
}

int LatentLayout::side_dev(Side d) const {
  switch (d) {
  case Side::Center: return -1;
  case Side::Left: return fixed_offset + num_seasons;       // after intercept + S-1 devs
  case Side::Right: return fixed_offset + num_seasons + 1;
  }
  return -1;
}

int LatentLayout::shot_dev(ShotType k) const {
  if (k == ShotType::jump_shot)
    return -1;
  // step_pull..fade_turn occupy 5 slots after the side deviations.
  return fixed_offset + num_seasons + 2 + (static_cast<int>(k) - 1);
}

std::string LatentLayout::dim_name(int idx) const {
  if (idx < fixed_offset + n_fixed) {
    if (idx == intercept())
      return "beta0";
    if (idx < fixed_offset + num_seasons)
      return "beta_season[" + std::to_string(idx - fixed_offset) + "]";
    if (idx < fixed_offset + num_seasons + 2)
      return idx == side_dev(Side::Left) ? "beta_side[Left]" : "beta_side[Right]";
    int k = idx - (fixed_offset + num_seasons + 2) + 1;
    return std::string("beta_shot[") + shot_type_name(static_cast<ShotType>(k)) + "]";
  }
  if (u_offset >= 0 && idx < v_offset)
    return "u[" + std::to_string(idx - u_offset) + "]";
  if (v_offset >= 0 && idx < v_offset + kNumAreas)
    return "v[" + std::to_string(idx - v_offset) + "]";
  return "x[" + std::to_string(idx) + "]";
}

namespace {

bool enabled_slopes(const ModelConfig& cfg, SlopeKind m) {
  switch (m) {
  case SlopeKind::jump: return cfg.use_jump;
  case SlopeKind::step: return cfg.use_step;
  case SlopeKind::lay: return cfg.use_lay;
  case SlopeKind::floater: return cfg.use_float;
  case SlopeKind::rim: return cfg.use_rim;
  case SlopeKind::fade: return cfg.use_fade;
  }
  return false;
}

} // namespace

std::pair<LatentLayout, ConstraintSet> assemble_layout(const ModelConfig& config,
                                                       const CellIndex& dims) {
  config.validate();
  if (dims.num_teams() < 1 || dims.num_seasons() < 1)
    throw InvalidConfig("cell index must have at least one team and season");

  LatentLayout lay;
  lay.config = config;
  lay.num_teams = dims.num_teams();
  lay.num_seasons = dims.num_seasons();

  const int I = lay.num_teams;
  const int S = lay.num_seasons;
  const int A = kNumAreas;
  const int D = kNumSides;

  int off = 0;
  lay.fixed_offset = off;
  lay.n_fixed = 1 + (S - 1) + 2 + (kNumShotTypes - 1);
  off += lay.n_fixed;
  lay.u_offset = off;
  off += I;
  lay.v_offset = off;
  off += A;
  if (config.use_ta) {
    lay.w_offset = off;
    off += I * A * S;
  }
  if (config.use_ts) {
    lay.z_offset = off;
    off += I * D * S;
  }
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    if (!enabled_slopes(config, static_cast<SlopeKind>(m)))
      continue;
    lay.slope_offset[m] = off;
    off += lay.slope_block_size(static_cast<SlopeKind>(m));
  }
  lay.n_latent = off;

  // Constraint rows.
  std::vector<Eigen::Triplet<double>> trips;
  int row = 0;
  for (int i = 0; i < I; ++i)
    trips.emplace_back(row, lay.u(i), 1.0);
  ++row;
  for (int a = 0; a < A; ++a)
    trips.emplace_back(row, lay.v(a), 1.0);
  ++row;
  if (config.use_ta) {
    if (config.strict_w_constraints) {
      for (int a = 0; a < A; ++a)
        for (int s = 0; s < S; ++s) {
          for (int i = 0; i < I; ++i)
            trips.emplace_back(row, lay.w(i, a, s), 1.0);
          ++row;
        }
    } else {
      for (int i = 0; i < I; ++i)
        for (int a = 0; a < A; ++a)
          for (int s = 0; s < S; ++s)
            trips.emplace_back(row, lay.w(i, a, s), 1.0);
      ++row;
    }
  }
  if (config.use_ts) {
    for (int i = 0; i < I; ++i)
      for (int s = 0; s < S; ++s) {
        for (int d = 0; d < D; ++d)
          trips.emplace_back(row, lay.z(i, static_cast<Side>(d), s), 1.0);
        ++row;
      }
  }
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (!lay.has_slope(kind))
      continue;
    if (slope_is_team_area(kind)) {
      for (int i = 0; i < I; ++i)
        for (int a = 0; a < A; ++a)
          for (int s = 0; s < S; ++s)
            trips.emplace_back(row, lay.slope_ias(kind, i, a, s), 1.0);
    } else {
      for (int i = 0; i < I; ++i)
        for (int s = 0; s < S; ++s)
          trips.emplace_back(row, lay.slope_is(kind, i, s), 1.0);
    }
    ++row;
  }

  ConstraintSet cs;
  cs.A.resize(row, lay.n_latent);
  cs.A.setFromTriplets(trips.begin(), trips.end());
  cs.A.makeCompressed();

  // Numeric full-row-rank check via Cholesky of A A^T.
  Eigen::MatrixXd aat = Eigen::MatrixXd(cs.A * cs.A.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(aat);
  if (llt.info() != Eigen::Success ||
      llt.matrixLLT().diagonal().minCoeff() < 1e-8)
    throw InvalidConfig("constraint matrix is rank deficient");

  return {lay, cs};
}

} // namespace stamp

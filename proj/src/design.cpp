#include "stamp/design.hpp"

#include "stamp/errors.hpp"

#include <cmath>

namespace stamp {

std::vector<std::pair<int, double>> design_row(const CellIndex::Cell& cell,
                                               const LatentLayout& layout) {
  std::vector<std::pair<int, double>> row;
  row.reserve(10);
  row.emplace_back(layout.intercept(), 1.0);
  if (int idx = layout.season_dev(cell.season); idx >= 0)
    row.emplace_back(idx, 1.0);
  if (int idx = layout.side_dev(cell.side); idx >= 0)
    row.emplace_back(idx, 1.0);
  if (int idx = layout.shot_dev(cell.shot_type); idx >= 0)
    row.emplace_back(idx, 1.0);
  row.emplace_back(layout.u(cell.team), 1.0);
  row.emplace_back(layout.v(cell.area), 1.0);
  if (layout.w_offset >= 0)
    row.emplace_back(layout.w(cell.team, cell.area, cell.season), 1.0);
  if (layout.z_offset >= 0)
    row.emplace_back(layout.z(cell.team, cell.side, cell.season), 1.0);
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (!layout.has_slope(kind) || slope_shot_type(kind) != cell.shot_type)
      continue;
    int idx = slope_is_team_area(kind)
                  ? layout.slope_ias(kind, cell.team, cell.area, cell.season)
                  : layout.slope_is(kind, cell.team, cell.season);
    row.emplace_back(idx, 1.0);
  }
  return row;
}

ObservationBlock build_observations(const CountsAndExposure& data,
                                    const LatentLayout& layout) {
  const CellIndex& index = data.index;
  if (index.num_teams() != layout.num_teams ||
      index.num_seasons() != layout.num_seasons)
    throw DomainError("data dimensions do not match layout");

  ObservationBlock out;
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> y, e, cells_tmp;
  std::vector<int> ids;
  int excluded = 0;

  for (int c = 0; c < index.num_cells(); ++c) {
    auto cell = index.decode(c);
    double exposure = data.exposure(cell.team, cell.season);
    if (exposure <= 0.0) {
      ++excluded;
      continue;
    }
    int r = static_cast<int>(ids.size());
    for (auto [j, val] : design_row(cell, layout))
      trips.emplace_back(r, j, val);
    ids.push_back(c);
    y.push_back(static_cast<double>(data.counts[static_cast<std::size_t>(c)]));
    e.push_back(exposure);
  }
  (void)cells_tmp;

  out.design.resize(static_cast<Eigen::Index>(ids.size()), layout.n_latent);
  out.design.setFromTriplets(trips.begin(), trips.end());
  out.design.makeCompressed();
  out.counts = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  out.exposures = Eigen::Map<Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
  out.log_exposures = out.exposures.array().log();
  out.cell_ids = std::move(ids);
  out.num_excluded_cells = excluded;
  for (Eigen::Index r = 0; r < out.counts.size(); ++r)
    out.loglik_const += out.counts[r] * out.log_exposures[r] -
                        std::lgamma(out.counts[r] + 1.0);
  return out;
}

} // namespace stamp

#pragma once

#include "stamp/layout.hpp"
#include "stamp/shotgrid.hpp"

#include <Eigen/Sparse>

#include <utility>
#include <vector>

namespace stamp {

/// Nonzero entries of one design row: coefficient 1 on the intercept, the
/// active season/side/shot-type deviations, u_i, v_a, and the enabled
/// interaction/slope entries whose shot-type indicator fires for k.
std::vector<std::pair<int, double>> design_row(const CellIndex::Cell& cell,
                                               const LatentLayout& layout);

/// Observation stack for one split: sparse design over the cells with
/// positive exposure, plus their counts, exposures and cell ids.
struct ObservationBlock {
  Eigen::SparseMatrix<double, Eigen::RowMajor> design; // n_obs x n_latent
  Eigen::VectorXd counts;                              // y_c
  Eigen::VectorXd exposures;                           // E_{is} per row
  Eigen::VectorXd log_exposures;
  std::vector<int> cell_ids;                           // row -> dense cell id
  int num_excluded_cells = 0;                          // cells dropped for E = 0
  // sum_c [ y_c log E_c - lgamma(y_c + 1) ]: the x-independent part of the
  // Poisson log likelihood.
  double loglik_const = 0.0;

  Eigen::Index rows() const { return design.rows(); }
};

/// Builds the observation block for data over the given layout. Cells
/// belonging to (team, season) slices with zero exposure are excluded and
/// counted.
ObservationBlock build_observations(const CountsAndExposure& data,
                                    const LatentLayout& layout);

} // namespace stamp

#pragma once

#include "stamp/explore.hpp"
#include "stamp/shotgrid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stamp {

struct FitOptions {
  std::uint64_t seed = 1;
  int num_samples = 400; // J
  ExploreOptions explore;
};

/// Result of one model fit: the hyperparameter exploration table with
/// per-point constrained modes, plus J constrained latent samples. The
/// serialized bundle contains everything below except wall_seconds, so two
/// fits with the same seed produce byte-identical bundles.
struct PosteriorFit {
  ModelConfig config;
  CellIndex index;
  LatentLayout layout;
  ConstraintSet constraints;
  HyperDesc hyper;
  std::vector<ExplorationPoint> points;
  Eigen::MatrixXd samples;        // J x n_latent
  std::vector<int> sample_source; // J exploration-point ids
  std::uint64_t seed = 0;
  int excluded_cells = 0;
  double wall_seconds = 0.0;
};

/// Draws J constrained samples: each draw picks an exploration point by
/// weight, samples the Gaussian approximation through its sparse
/// factorization and applies the kriging projection. Each draw consumes an
/// independent derived RNG stream, so results are identical under any
/// parallel schedule.
Eigen::MatrixXd sample_latent(const ObservationBlock& obs, const ConstraintSet& cons,
                              const LatentLayout& layout, const HyperDesc& hyper,
                              const std::vector<ExplorationPoint>& points, int j_draws,
                              std::uint64_t seed, std::vector<int>* source_ids);

/// Assembly + exploration + sampling for one configuration on the fitting
/// split.
PosteriorFit fit_model(const ModelConfig& config, const CountsAndExposure& regular,
                       const FitOptions& opts = {});

/// Versioned binary fit bundle.
void save_fit_bundle(const PosteriorFit& fit, const std::string& path);
PosteriorFit load_fit_bundle(const std::string& path);

} // namespace stamp

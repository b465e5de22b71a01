#pragma once

#include "stamp/gaussian_approx.hpp"
#include "stamp/hyper.hpp"
#include "stamp/laplace.hpp"

#include <optional>
#include <vector>

namespace stamp {

/// One hyperparameter point of the integration design: theta, the log
/// unnormalized posterior log pi~(theta | y), its normalized weight, and
/// the modes of the Gaussian approximation at theta.
struct ExplorationPoint {
  Eigen::VectorXd theta;
  double log_post = 0.0;
  double weight = 0.0;
  Eigen::VectorXd x_hat;
  Eigen::VectorXd x_star;
};

enum class IntStrategy { ccd, grid };

struct ExploreOptions {
  IntStrategy strategy = IntStrategy::ccd;
  double ccd_scale = 1.2;      // per-axis scale of the design in z-space
  double grid_halfwidth = 3.0; // grid fallback: z in [-hw, hw]
  double grid_step = 0.75;
  int max_evals = 2000;        // OptimizerFailure beyond this
  double simplex_step = 0.5;   // initial simplex edge
  double ftol = 5e-3;          // simplex f-spread stopping rule
  double xtol = 0.05;          // simplex coordinate spread
  double fd_step = 0.25;       // central-difference step for the curvature
  /// Skip optimization and integration: a single exploration point at the
  /// given theta with weight 1.
  std::optional<Eigen::VectorXd> fixed_theta;
};

struct ExploreResult {
  std::vector<ExplorationPoint> points;
  Eigen::VectorXd theta_mode;
  Eigen::MatrixXd curvature; // of -log pi~ at the mode (regularized)
  int evaluations = 0;
};

/// Evaluates log pi~(theta | y) = Laplace log marginal + hyperpriors.
/// Failed evaluations (non-SPD Hessian, Newton divergence) report -inf.
class PosteriorSurface {
public:
  PosteriorSurface(const ObservationBlock& obs, const ConstraintSet& cons,
                   const LatentLayout& layout, const HyperDesc& hyper);

  /// Uses the shared warm-started workspace; serial callers only.
  double log_post(const Eigen::VectorXd& theta, GaussianApprox* approx = nullptr);

  /// Stateless evaluation with a caller-provided workspace (parallel CCD).
  double log_post_with(NewtonWorkspace& ws, const Eigen::VectorXd& theta,
                       GaussianApprox* approx = nullptr) const;

  const LatentLayout& layout() const { return *layout_; }
  const HyperDesc& hyper() const { return *hyper_; }
  const ObservationBlock& obs() const { return *obs_; }
  const ConstraintSet& cons() const { return *cons_; }

private:
  const ObservationBlock* obs_;
  const ConstraintSet* cons_;
  const LatentLayout* layout_;
  const HyperDesc* hyper_;
  NewtonWorkspace ws_;
};

/// (1) maximize log pi~ by Nelder-Mead from the standardized start,
/// (2) estimate curvature by central finite differences,
/// (3) place the integration design (CCD, fractional factorial beyond six
///     axes; or a dense grid for p <= 2) in the standardized space and
///     convert the evaluated log posteriors to normalized weights.
ExploreResult explore_hyperparameters(const ObservationBlock& obs,
                                      const ConstraintSet& cons,
                                      const LatentLayout& layout,
                                      const HyperDesc& hyper,
                                      const ExploreOptions& opts = {});

} // namespace stamp

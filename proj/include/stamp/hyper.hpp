#pragma once

#include "stamp/layout.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace stamp {

/// Values of every hyperparameter a layout can use, on the natural scale.
/// Disabled blocks keep their defaults and are never read.
struct HyperValues {
  double tau_team = 1.0;
  double tau_area = 1.0;
  double tau_ta = 1.0;
  double rho_ta = 0.0;
  double tau_ts = 1.0;
  std::array<double, kNumSlopeKinds> tau_slope{1, 1, 1, 1, 1, 1};
  std::array<double, kNumSlopeKinds> rho_slope{0, 0, 0, 0, 0, 0};
};

/// Internal parametrization of the hyperparameter vector theta: one
/// log-precision per enabled variance, plus a transformed correlation for
/// each seasonally correlated block (team x area effects and jump/step
/// slopes) when S >= 2. With S = 1 the equicorrelation matrix is trivial
/// and carries no correlation parameter.
class HyperDesc {
public:
  enum class Kind { log_tau, theta_rho };
  enum class Block : int {
    team = 0, area, ta, ts,
    slope_jump, slope_step, slope_lay, slope_float, slope_rim, slope_fade,
  };

  struct Param {
    Kind kind;
    Block block;
    std::string name;
    double u_scale;  // PC scale for log_tau params (U_sd or U_slope)
  };

  static HyperDesc make(const ModelConfig& config, int num_seasons);

  int dim() const { return static_cast<int>(params_.size()); }
  const std::vector<Param>& params() const { return params_; }
  const ModelConfig& config() const { return config_; }
  int num_seasons() const { return num_seasons_; }

  HyperValues unpack(const Eigen::VectorXd& theta) const;

  /// Standardized start for the optimizer: every sigma at U/2, every rho
  /// at 0.3.
  Eigen::VectorXd start() const;

  /// Sum of PC prior log densities on the internal scale (Jacobians
  /// included).
  double log_prior(const Eigen::VectorXd& theta) const;

private:
  std::vector<Param> params_;
  ModelConfig config_;
  int num_seasons_ = 1;
};

} // namespace stamp

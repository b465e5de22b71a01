#include "stamp/hyper.hpp"

#include "stamp/errors.hpp"
#include "stamp/pc_prior.hpp"

#include <cmath>

namespace stamp {

namespace {

bool slope_enabled(const ModelConfig& cfg, SlopeKind m) {
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

HyperDesc::Block slope_block(SlopeKind m) {
  switch (m) {
  case SlopeKind::jump: return HyperDesc::Block::slope_jump;
  case SlopeKind::step: return HyperDesc::Block::slope_step;
  case SlopeKind::lay: return HyperDesc::Block::slope_lay;
  case SlopeKind::floater: return HyperDesc::Block::slope_float;
  case SlopeKind::rim: return HyperDesc::Block::slope_rim;
  case SlopeKind::fade: return HyperDesc::Block::slope_fade;
  }
  return HyperDesc::Block::slope_jump;
}

} // namespace

HyperDesc HyperDesc::make(const ModelConfig& config, int num_seasons) {
  config.validate();
  HyperDesc desc;
  desc.config_ = config;
  desc.num_seasons_ = num_seasons;
  const bool with_rho = num_seasons >= 2;

  desc.params_.push_back({Kind::log_tau, Block::team, "log_tau_team", config.u_sd});
  desc.params_.push_back({Kind::log_tau, Block::area, "log_tau_area", config.u_sd});
  if (config.use_ta) {
    desc.params_.push_back({Kind::log_tau, Block::ta, "log_tau_ta", config.u_sd});
    if (with_rho)
      desc.params_.push_back({Kind::theta_rho, Block::ta, "theta_rho_ta", 0.0});
  }
  if (config.use_ts)
    desc.params_.push_back({Kind::log_tau, Block::ts, "log_tau_ts", config.u_sd});
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (!slope_enabled(config, kind))
      continue;
    desc.params_.push_back({Kind::log_tau, slope_block(kind),
                            std::string("log_tau_") + slope_name(kind),
                            config.u_slope});
    if (with_rho && slope_is_team_area(kind))
      desc.params_.push_back({Kind::theta_rho, slope_block(kind),
                              std::string("theta_rho_") + slope_name(kind), 0.0});
  }
  return desc;
}

HyperValues HyperDesc::unpack(const Eigen::VectorXd& theta) const {
  if (theta.size() != dim())
    throw DomainError("hyperparameter vector has wrong dimension");
  HyperValues v;
  for (int j = 0; j < dim(); ++j) {
    const Param& p = params_[static_cast<std::size_t>(j)];
    double x = theta[j];
    if (p.kind == Kind::log_tau) {
      double tau = std::exp(x);
      switch (p.block) {
      case Block::team: v.tau_team = tau; break;
      case Block::area: v.tau_area = tau; break;
      case Block::ta: v.tau_ta = tau; break;
      case Block::ts: v.tau_ts = tau; break;
      case Block::slope_jump: v.tau_slope[0] = tau; break;
      case Block::slope_step: v.tau_slope[1] = tau; break;
      case Block::slope_lay: v.tau_slope[2] = tau; break;
      case Block::slope_float: v.tau_slope[3] = tau; break;
      case Block::slope_rim: v.tau_slope[4] = tau; break;
      case Block::slope_fade: v.tau_slope[5] = tau; break;
      }
    } else {
      double rho = theta_to_rho(x, num_seasons_);
      switch (p.block) {
      case Block::ta: v.rho_ta = rho; break;
      case Block::slope_jump: v.rho_slope[0] = rho; break;
      case Block::slope_step: v.rho_slope[1] = rho; break;
      default:
        throw DomainError("correlation parameter on a non-correlated block");
      }
    }
  }
  return v;
}

Eigen::VectorXd HyperDesc::start() const {
  Eigen::VectorXd theta(dim());
  for (int j = 0; j < dim(); ++j) {
    const Param& p = params_[static_cast<std::size_t>(j)];
    if (p.kind == Kind::log_tau) {
      double sigma = 0.5 * p.u_scale;
      theta[j] = -2.0 * std::log(sigma);
    } else {
      theta[j] = rho_to_theta(0.3, num_seasons_);
    }
  }
  return theta;
}

double HyperDesc::log_prior(const Eigen::VectorXd& theta) const {
  if (theta.size() != dim())
    throw DomainError("hyperparameter vector has wrong dimension");
  double lp = 0.0;
  for (int j = 0; j < dim(); ++j) {
    const Param& p = params_[static_cast<std::size_t>(j)];
    if (p.kind == Kind::log_tau) {
      lp += pc_prec_logpdf_logtau(theta[j], p.u_scale, config_.alpha_prec);
    } else {
      PcCorPrior prior(config_.v_cor, config_.alpha_cor, num_seasons_);
      lp += prior.logpdf_theta(theta[j]);
    }
  }
  return lp;
}

} // namespace stamp

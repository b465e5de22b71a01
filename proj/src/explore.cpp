#include "stamp/explore.hpp"

#include "stamp/errors.hpp"
#include "stamp/parallel.hpp"
#include "stamp/prior_precision.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stamp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

PosteriorSurface::PosteriorSurface(const ObservationBlock& obs,
                                   const ConstraintSet& cons,
                                   const LatentLayout& layout,
                                   const HyperDesc& hyper)
    : obs_(&obs), cons_(&cons), layout_(&layout), hyper_(&hyper), ws_(obs, cons) {}

double PosteriorSurface::log_post(const Eigen::VectorXd& theta,
                                  GaussianApprox* approx) {
  return log_post_with(ws_, theta, approx);
}

double PosteriorSurface::log_post_with(NewtonWorkspace& ws,
                                       const Eigen::VectorXd& theta,
                                       GaussianApprox* approx) const {
  try {
    PriorPrecision prior = build_prior_precision(*layout_, hyper_->unpack(theta));
    GaussianApprox ga = ws.solve(prior);
    double value = laplace_log_marginal(*obs_, *cons_, prior, ga) +
                   hyper_->log_prior(theta);
    if (approx)
      *approx = std::move(ga);
    return std::isfinite(value) ? value : kNegInf;
  } catch (const StampError&) {
    return kNegInf;
  }
}

// ---------------------------------------------------------------------------
// Nelder-Mead (adaptive coefficients, Gao & Han)
// ---------------------------------------------------------------------------

namespace {

struct SimplexPoint {
  Eigen::VectorXd x;
  double f;
};

Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, double step, double ftol,
                            double xtol, int max_evals, int* evals_out) {
  const int p = static_cast<int>(x0.size());
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / p;
  const double gamma = 0.75 - 0.5 / p;
  const double delta = 1.0 - 1.0 / p;

  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    if (++evals > max_evals)
      throw OptimizerFailure("hyperparameter optimizer exceeded " +
                             std::to_string(max_evals) + " evaluations");
    return f(x);
  };

  std::vector<SimplexPoint> simplex;
  simplex.push_back({x0, eval(x0)});
  for (int i = 0; i < p; ++i) {
    Eigen::VectorXd xi = x0;
    xi[i] += step;
    simplex.push_back({xi, eval(xi)});
  }

  auto by_f = [](const SimplexPoint& a, const SimplexPoint& b) { return a.f < b.f; };
  std::sort(simplex.begin(), simplex.end(), by_f);

  for (;;) {
    double fspread = simplex.back().f - simplex.front().f;
    double xspread = 0.0;
    for (int i = 1; i <= p; ++i)
      xspread = std::max(
          xspread, (simplex[static_cast<std::size_t>(i)].x - simplex[0].x)
                       .cwiseAbs()
                       .maxCoeff());
    if (fspread < ftol && xspread < xtol)
      break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < p; ++i)
      centroid += simplex[static_cast<std::size_t>(i)].x;
    centroid /= p;

    SimplexPoint& worst = simplex.back();
    Eigen::VectorXd xr = centroid + alpha * (centroid - worst.x);
    double fr = eval(xr);

    bool do_shrink = false;
    if (fr < simplex[0].f) {
      Eigen::VectorXd xe = centroid + beta * (xr - centroid);
      double fe = eval(xe);
      worst = fe < fr ? SimplexPoint{xe, fe} : SimplexPoint{xr, fr};
    } else if (fr < simplex[static_cast<std::size_t>(p - 1)].f) {
      worst = {xr, fr};
    } else if (fr < worst.f) {
      // outside contraction
      Eigen::VectorXd xc = centroid + gamma * (xr - centroid);
      double fc = eval(xc);
      if (fc <= fr)
        worst = {xc, fc};
      else
        do_shrink = true;
    } else {
      // inside contraction
      Eigen::VectorXd xc = centroid - gamma * (centroid - worst.x);
      double fc = eval(xc);
      if (fc < worst.f)
        worst = {xc, fc};
      else
        do_shrink = true;
    }
    if (do_shrink) {
      for (int i = 1; i <= p; ++i) {
        auto& sp = simplex[static_cast<std::size_t>(i)];
        sp.x = simplex[0].x + delta * (sp.x - simplex[0].x);
        sp.f = eval(sp.x);
      }
    }
    std::sort(simplex.begin(), simplex.end(), by_f);
  }
  if (evals_out)
    *evals_out = evals;
  return simplex[0].x;
}

// Central-difference Hessian of f around x0.
Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, double f0, double h) {
  const int p = static_cast<int>(x0.size());
  Eigen::MatrixXd hess(p, p);
  std::vector<double> fplus(static_cast<std::size_t>(p)),
      fminus(static_cast<std::size_t>(p));
  auto shift = [&](int i, double hi, int j, double hj) {
    Eigen::VectorXd x = x0;
    x[i] += hi;
    if (j >= 0)
      x[j] += hj;
    return f(x);
  };
  for (int i = 0; i < p; ++i) {
    fplus[static_cast<std::size_t>(i)] = shift(i, h, -1, 0);
    fminus[static_cast<std::size_t>(i)] = shift(i, -h, -1, 0);
    hess(i, i) = (fplus[static_cast<std::size_t>(i)] - 2.0 * f0 +
                  fminus[static_cast<std::size_t>(i)]) /
                 (h * h);
  }
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      double fpp = shift(i, h, j, h);
      double fpm = shift(i, h, j, -h);
      double fmp = shift(i, -h, j, h);
      double fmm = shift(i, -h, j, -h);
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  return hess;
}

// z-space design points for the chosen strategy.
std::vector<Eigen::VectorXd> design_points(int p, const ExploreOptions& opts) {
  std::vector<Eigen::VectorXd> pts;
  pts.push_back(Eigen::VectorXd::Zero(p)); // center first

  if (opts.strategy == IntStrategy::grid) {
    if (p > 2)
      throw DomainError("grid integration supports at most 2 hyperparameters");
    std::vector<double> axis;
    for (double z = -opts.grid_halfwidth; z <= opts.grid_halfwidth + 1e-9;
         z += opts.grid_step)
      axis.push_back(z);
    if (p == 1) {
      for (double z : axis)
        if (z != 0.0)
          pts.push_back(Eigen::VectorXd::Constant(1, z));
    } else {
      for (double z1 : axis)
        for (double z2 : axis) {
          if (z1 == 0.0 && z2 == 0.0)
            continue;
          Eigen::VectorXd z(2);
          z << z1, z2;
          pts.push_back(z);
        }
    }
    return pts;
  }

  const double s = opts.ccd_scale;
  // Factorial part: full 2^p for p <= 6, a fixed-generator fraction beyond
  // (extra columns are sign products of base-column subsets).
  const int q = std::min(p, 6);
  static const std::vector<std::vector<int>> generators = {
      {0, 1, 2}, {0, 3, 4}, {1, 3, 5}, {2, 4, 5},
      {0, 1, 4, 5}, {0, 2, 3, 5}, {1, 2, 3, 4},
  };
  if (p - q > static_cast<int>(generators.size()))
    throw DomainError("too many hyperparameters for the CCD fraction table");
  for (long mask = 0; mask < (1L << q); ++mask) {
    Eigen::VectorXd z(p);
    for (int i = 0; i < q; ++i)
      z[i] = (mask >> i & 1) ? s : -s;
    for (int j = q; j < p; ++j) {
      double sign = 1.0;
      for (int g : generators[static_cast<std::size_t>(j - q)])
        sign *= z[g] > 0 ? 1.0 : -1.0;
      z[j] = sign * s;
    }
    pts.push_back(z);
  }
  // Axial points at +-scale along each axis (dropping duplicates of
  // factorial points, which only occur at p = 1).
  for (int i = 0; i < p; ++i)
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
      z[i] = sign * s;
      bool dup = false;
      for (const auto& existing : pts)
        if ((existing - z).cwiseAbs().maxCoeff() < 1e-12)
          dup = true;
      if (!dup)
        pts.push_back(z);
    }
  return pts;
}

} // namespace

ExploreResult explore_hyperparameters(const ObservationBlock& obs,
                                      const ConstraintSet& cons,
                                      const LatentLayout& layout,
                                      const HyperDesc& hyper,
                                      const ExploreOptions& opts) {
  PosteriorSurface surface(obs, cons, layout, hyper);
  const int p = hyper.dim();
  ExploreResult result;

  if (opts.fixed_theta) {
    if (opts.fixed_theta->size() != p)
      throw DomainError("fixed theta has wrong dimension");
    ExplorationPoint pt;
    pt.theta = *opts.fixed_theta;
    GaussianApprox ga;
    pt.log_post = surface.log_post(pt.theta, &ga);
    if (!std::isfinite(pt.log_post))
      throw FactorizationFailure("posterior evaluation failed at fixed theta");
    pt.weight = 1.0;
    pt.x_hat = std::move(ga.x_hat);
    pt.x_star = std::move(ga.x_star);
    result.theta_mode = pt.theta;
    result.curvature = Eigen::MatrixXd::Identity(p, p);
    result.points.push_back(std::move(pt));
    result.evaluations = 1;
    return result;
  }

  int evals = 0;
  auto neg_logpost = [&surface](const Eigen::VectorXd& theta) {
    double v = surface.log_post(theta);
    return std::isfinite(v) ? -v : 1e300;
  };

  // (1) locate the mode
  Eigen::VectorXd theta0 = hyper.start();
  Eigen::VectorXd mode = nelder_mead(neg_logpost, theta0, opts.simplex_step,
                                     opts.ftol, opts.xtol, opts.max_evals, &evals);

  // (2) curvature at the mode by central differences, made SPD
  double f_mode = neg_logpost(mode);
  evals += 1 + 2 * p + 2 * p * (p - 1);
  Eigen::MatrixXd hess = fd_hessian(neg_logpost, mode, f_mode, opts.fd_step);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
  Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(1e-6);
  result.curvature =
      eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::MatrixXd to_theta =
      eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal();

  // (3) integration design, evaluated in parallel with the mode's latent
  // field as the shared warm start
  GaussianApprox mode_ga;
  double mode_logpost = surface.log_post(mode, &mode_ga);
  ++evals;
  if (!std::isfinite(mode_logpost))
    throw OptimizerFailure("posterior evaluation failed at the located mode");

  std::vector<Eigen::VectorXd> zs = design_points(p, opts);
  const auto n_pts = static_cast<std::int64_t>(zs.size());
  std::vector<ExplorationPoint> pts(static_cast<std::size_t>(n_pts));
  Eigen::VectorXd warm = mode_ga.x_hat;

  parallel_for(n_pts, [&](std::int64_t k) {
    auto& pt = pts[static_cast<std::size_t>(k)];
    pt.theta = mode + to_theta * zs[static_cast<std::size_t>(k)];
    if (zs[static_cast<std::size_t>(k)].isZero(0.0)) {
      pt.log_post = mode_logpost;
      pt.x_hat = mode_ga.x_hat;
      pt.x_star = mode_ga.x_star;
      return;
    }
    NewtonWorkspace ws(surface.obs(), surface.cons());
    ws.set_warm_start(warm);
    GaussianApprox ga;
    pt.log_post = surface.log_post_with(ws, pt.theta, &ga);
    if (std::isfinite(pt.log_post)) {
      pt.x_hat = std::move(ga.x_hat);
      pt.x_star = std::move(ga.x_star);
    }
  });
  evals += static_cast<int>(n_pts) - 1;

  // softmax weights over the finite evaluations
  double max_lp = kNegInf;
  for (const auto& pt : pts)
    max_lp = std::max(max_lp, pt.log_post);
  double total = 0.0;
  for (auto& pt : pts) {
    if (std::isfinite(pt.log_post)) {
      pt.weight = std::exp(pt.log_post - max_lp);
      total += pt.weight;
    } else {
      pt.weight = 0.0;
    }
  }
  for (auto& pt : pts)
    pt.weight /= total;

  // drop failed points
  for (auto& pt : pts)
    if (pt.weight > 0.0)
      result.points.push_back(std::move(pt));

  result.theta_mode = mode;
  result.evaluations = evals;
  return result;
}

} // namespace stamp

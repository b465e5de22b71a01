#include "stamp/synth.hpp"

#include "stamp/design.hpp"
#include "stamp/equicorr.hpp"
#include "stamp/errors.hpp"
#include "stamp/numeric.hpp"
#include "stamp/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace stamp {

CellIndex make_synth_index(int num_teams, int num_seasons) {
  if (num_teams < 1 || num_teams > 99 || num_seasons < 1 || num_seasons > 9)
    throw DomainError("synthetic league size out of range");
  std::vector<std::string> teams, seasons;
  char buf[8];
  for (int i = 1; i <= num_teams; ++i) {
    std::snprintf(buf, sizeof(buf), "t%02d", i);
    teams.emplace_back(buf);
  }
  for (int s = 1; s <= num_seasons; ++s) {
    std::snprintf(buf, sizeof(buf), "s%d", s);
    seasons.emplace_back(buf);
  }
  return CellIndex(std::move(teams), std::move(seasons));
}

namespace {

Eigen::VectorXd draw_latent(const GroundTruth& truth, const LatentLayout& layout,
                            Rng& rng) {
  const int I = layout.num_teams;
  const int S = layout.num_seasons;
  const int A = kNumAreas;
  const int D = kNumSides;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.n_latent);

  for (int s = 1; s < S; ++s)
    x[layout.season_dev(s)] =
        s - 1 < static_cast<int>(truth.season_dev.size())
            ? truth.season_dev[static_cast<std::size_t>(s - 1)]
            : 0.0;
  x[layout.side_dev(Side::Left)] = truth.side_dev_left;
  x[layout.side_dev(Side::Right)] = truth.side_dev_right;
  for (int k = 1; k < kNumShotTypes; ++k)
    x[layout.shot_dev(static_cast<ShotType>(k))] =
        truth.shot_dev[static_cast<std::size_t>(k - 1)];

  auto center = [&x](int off, int len) {
    double mean = x.segment(off, len).mean();
    x.segment(off, len).array() -= mean;
  };

  for (int i = 0; i < I; ++i)
    x[layout.u(i)] = truth.sigma_team * rng.normal();
  center(layout.u_offset, I);
  for (int a = 0; a < A; ++a)
    x[layout.v(a)] = truth.sigma_area * rng.normal();
  center(layout.v_offset, A);

  auto draw_groups = [&](int off, int groups, double sigma, double rho) {
    Eigen::MatrixXd chol = equicorr_cholesky(S, rho);
    Eigen::VectorXd z(S);
    for (int g = 0; g < groups; ++g) {
      for (int s = 0; s < S; ++s)
        z[s] = rng.normal();
      x.segment(off + g * S, S) = sigma * (chol * z);
    }
    center(off, groups * S);
  };

  if (layout.w_offset >= 0)
    draw_groups(layout.w_offset, I * A, truth.sigma_ta, truth.rho_ta);
  if (layout.z_offset >= 0) {
    for (int j = 0; j < I * D * S; ++j)
      x[layout.z_offset + j] = truth.sigma_ts * rng.normal();
    for (int i = 0; i < I; ++i)
      for (int s = 0; s < S; ++s) {
        double mean = 0.0;
        for (int d = 0; d < D; ++d)
          mean += x[layout.z(i, static_cast<Side>(d), s)];
        mean /= D;
        for (int d = 0; d < D; ++d)
          x[layout.z(i, static_cast<Side>(d), s)] -= mean;
      }
  }
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (!layout.has_slope(kind))
      continue;
    int off = layout.slope_offset[m];
    if (slope_is_team_area(kind))
      draw_groups(off, I * A, truth.sigma_slope[static_cast<std::size_t>(m)],
                  truth.rho_slope[static_cast<std::size_t>(m)]);
    else {
      for (int j = 0; j < I * S; ++j)
        x[off + j] = truth.sigma_slope[static_cast<std::size_t>(m)] * rng.normal();
      center(off, I * S);
    }
  }
  return x;
}

// Re-centers an explicit latent vector onto the constraint surface.
void recenter_explicit(Eigen::VectorXd& x, const LatentLayout& layout) {
  const int I = layout.num_teams;
  const int S = layout.num_seasons;
  const int D = kNumSides;
  auto center = [&x](int off, int len) {
    double mean = x.segment(off, len).mean();
    x.segment(off, len).array() -= mean;
  };
  center(layout.u_offset, I);
  center(layout.v_offset, kNumAreas);
  if (layout.w_offset >= 0)
    center(layout.w_offset, I * kNumAreas * S);
  if (layout.z_offset >= 0)
    for (int i = 0; i < I; ++i)
      for (int s = 0; s < S; ++s) {
        double mean = 0.0;
        for (int d = 0; d < D; ++d)
          mean += x[layout.z(i, static_cast<Side>(d), s)];
        mean /= D;
        for (int d = 0; d < D; ++d)
          x[layout.z(i, static_cast<Side>(d), s)] -= mean;
      }
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    SlopeKind kind = static_cast<SlopeKind>(m);
    if (layout.has_slope(kind))
      center(layout.slope_offset[m], layout.slope_block_size(kind));
  }
}

} // namespace

SynthData generate(const GroundTruth& truth, std::uint64_t seed,
                   std::optional<std::uint64_t> count_seed) {
  truth.config.validate();
  CellIndex index = make_synth_index(truth.num_teams, truth.num_seasons);
  auto [layout, cons] = assemble_layout(truth.config, index);
  (void)cons;
  const int I = layout.num_teams;
  const int S = layout.num_seasons;

  // Exposures: clipped/rounded normal possessions per team-season.
  Rng exp_rng = Rng::derive(seed, 0);
  std::vector<double> exposures(static_cast<std::size_t>(I) * S);
  for (auto& e : exposures) {
    double draw = truth.exposure_mean + truth.exposure_sd * exp_rng.normal();
    e = std::round(std::max(truth.exposure_min, draw));
  }

  // Latent effects.
  Eigen::VectorXd x;
  if (truth.explicit_latent) {
    if (truth.explicit_latent->size() != layout.n_latent)
      throw DomainError("explicit latent vector has wrong dimension");
    x = *truth.explicit_latent;
    recenter_explicit(x, layout);
  } else {
    Rng latent_rng = Rng::derive(seed, 1);
    x = draw_latent(truth, layout, latent_rng);
  }

  // Observation stack over all cells (exposures positive by construction).
  CountsAndExposure reg;
  reg.index = index;
  reg.split = Phase::regular;
  reg.counts.assign(static_cast<std::size_t>(index.num_cells()), 0);
  reg.exposures = exposures;
  ObservationBlock obs = build_observations(reg, layout);

  // beta0: given, or tuned so the mean expected team-season total matches
  // the target.
  double beta0 = truth.beta0;
  Eigen::VectorXd eta0 = obs.design * x; // with x[beta0] = 0
  if (!std::isfinite(beta0)) {
    auto mean_total = [&](double b0) {
      double total = 0.0;
      for (Eigen::Index r = 0; r < obs.rows(); ++r)
        total += obs.exposures[r] * std::exp(b0 + eta0[r]);
      return total / (I * S) - truth.target_fga_mean;
    };
    beta0 = bisect(mean_total, -20.0, 5.0, 1e-12);
  }
  x[layout.intercept()] = beta0;

  // Poisson counts for both splits.
  Eigen::VectorXd eta = eta0.array() + beta0;
  std::uint64_t cseed = count_seed.value_or(seed);
  Rng reg_rng = Rng::derive(cseed, 2);
  for (Eigen::Index r = 0; r < obs.rows(); ++r) {
    double mu = obs.exposures[r] * std::exp(eta[r]);
    reg.counts[static_cast<std::size_t>(obs.cell_ids[static_cast<std::size_t>(r)])] =
        reg_rng.poisson(mu);
  }

  CountsAndExposure post;
  post.index = index;
  post.split = Phase::post;
  post.counts.assign(static_cast<std::size_t>(index.num_cells()), 0);
  post.exposures.resize(exposures.size());
  for (std::size_t i = 0; i < exposures.size(); ++i)
    post.exposures[i] = std::max(1.0, std::round(truth.post_fraction * exposures[i]));
  Rng post_rng = Rng::derive(cseed, 3);
  for (Eigen::Index r = 0; r < obs.rows(); ++r) {
    int cell_id = obs.cell_ids[static_cast<std::size_t>(r)];
    auto cell = index.decode(cell_id);
    double e_post =
        post.exposures[static_cast<std::size_t>(cell.team) * S + cell.season];
    double mu = e_post * std::exp(eta[r]);
    post.counts[static_cast<std::size_t>(cell_id)] = post_rng.poisson(mu);
  }

  SynthData out;
  out.regular = std::move(reg);
  out.post = std::move(post);
  out.latent = std::move(x);
  out.beta0 = beta0;
  out.layout = layout;
  return out;
}

// ---------------------------------------------------------------------------
// Key-value serialization
// ---------------------------------------------------------------------------

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
} // namespace

std::string GroundTruth::to_kv() const {
  std::ostringstream out;
  out << "num_teams=" << num_teams << '\n' << "num_seasons=" << num_seasons << '\n';
  out << "beta0=" << fmt(beta0) << '\n';
  for (std::size_t i = 0; i < season_dev.size(); ++i)
    out << "season_dev" << (i + 2) << '=' << fmt(season_dev[i]) << '\n';
  out << "side_dev_left=" << fmt(side_dev_left) << '\n'
      << "side_dev_right=" << fmt(side_dev_right) << '\n';
  for (int k = 1; k < kNumShotTypes; ++k)
    out << "shot_dev_" << shot_type_name(static_cast<ShotType>(k)) << '='
        << fmt(shot_dev[static_cast<std::size_t>(k - 1)]) << '\n';
  out << "sigma_team=" << fmt(sigma_team) << '\n'
      << "sigma_area=" << fmt(sigma_area) << '\n'
      << "sigma_ta=" << fmt(sigma_ta) << '\n'
      << "rho_ta=" << fmt(rho_ta) << '\n'
      << "sigma_ts=" << fmt(sigma_ts) << '\n';
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    out << "sigma_" << slope_name(static_cast<SlopeKind>(m)) << '='
        << fmt(sigma_slope[static_cast<std::size_t>(m)]) << '\n';
    if (slope_is_team_area(static_cast<SlopeKind>(m)))
      out << "rho_" << slope_name(static_cast<SlopeKind>(m)) << '='
          << fmt(rho_slope[static_cast<std::size_t>(m)]) << '\n';
  }
  out << "exposure_mean=" << fmt(exposure_mean) << '\n'
      << "exposure_sd=" << fmt(exposure_sd) << '\n'
      << "exposure_min=" << fmt(exposure_min) << '\n'
      << "target_fga_mean=" << fmt(target_fga_mean) << '\n'
      << "post_fraction=" << fmt(post_fraction) << '\n';
  out << config.to_kv();
  return out.str();
}

GroundTruth GroundTruth::from_kv(const std::string& text) {
  GroundTruth t;
  t.config = ModelConfig::from_kv(text); // config keys share the same file
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&kv](const std::string& key, double& dst) {
    auto it = kv.find(key);
    if (it != kv.end())
      dst = std::stod(it->second);
  };
  auto get_int = [&kv](const std::string& key, int& dst) {
    auto it = kv.find(key);
    if (it != kv.end())
      dst = std::stoi(it->second);
  };
  get_int("num_teams", t.num_teams);
  get_int("num_seasons", t.num_seasons);
  get("beta0", t.beta0);
  t.season_dev.assign(static_cast<std::size_t>(std::max(0, t.num_seasons - 1)), 0.0);
  for (int s = 2; s <= t.num_seasons; ++s)
    get("season_dev" + std::to_string(s), t.season_dev[static_cast<std::size_t>(s - 2)]);
  get("side_dev_left", t.side_dev_left);
  get("side_dev_right", t.side_dev_right);
  for (int k = 1; k < kNumShotTypes; ++k)
    get(std::string("shot_dev_") + shot_type_name(static_cast<ShotType>(k)),
        t.shot_dev[static_cast<std::size_t>(k - 1)]);
  get("sigma_team", t.sigma_team);
  get("sigma_area", t.sigma_area);
  get("sigma_ta", t.sigma_ta);
  get("rho_ta", t.rho_ta);
  get("sigma_ts", t.sigma_ts);
  for (int m = 0; m < kNumSlopeKinds; ++m) {
    get(std::string("sigma_") + slope_name(static_cast<SlopeKind>(m)),
        t.sigma_slope[static_cast<std::size_t>(m)]);
    if (slope_is_team_area(static_cast<SlopeKind>(m)))
      get(std::string("rho_") + slope_name(static_cast<SlopeKind>(m)),
          t.rho_slope[static_cast<std::size_t>(m)]);
  }
  get("exposure_mean", t.exposure_mean);
  get("exposure_sd", t.exposure_sd);
  get("exposure_min", t.exposure_min);
  get("target_fga_mean", t.target_fga_mean);
  get("post_fraction", t.post_fraction);
  return t;
}

GroundTruth GroundTruth::from_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open ground truth file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_kv(ss.str());
}

} // namespace stamp

#include "stamp/posterior_fit.hpp"

#include "stamp/design.hpp"
#include "stamp/errors.hpp"
#include "stamp/parallel.hpp"
#include "stamp/prior_precision.hpp"
#include "stamp/rng.hpp"

#include <chrono>
#include <cstring>
#include <fstream>
#include <map>

namespace stamp {

Eigen::MatrixXd sample_latent(const ObservationBlock& obs, const ConstraintSet& cons,
                              const LatentLayout& layout, const HyperDesc& hyper,
                              const std::vector<ExplorationPoint>& points, int j_draws,
                              std::uint64_t seed, std::vector<int>* source_ids) {
  if (j_draws < 1)
    throw DomainError("sample_latent: J must be >= 1");
  if (points.empty())
    throw MissingSamples("sample_latent: no exploration points");

  const int n = layout.n_latent;
  std::vector<double> weights(points.size());
  for (std::size_t t = 0; t < points.size(); ++t)
    weights[t] = points[t].weight;

  // Pass 1: point picks. Draw j's stream, burn the pick uniform; the
  // normals for the draw come from the same stream afterwards.
  std::vector<int> picks(static_cast<std::size_t>(j_draws));
  for (int j = 0; j < j_draws; ++j) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(j));
    picks[static_cast<std::size_t>(j)] =
        static_cast<int>(rng.categorical(weights.data(), weights.size()));
  }
  std::map<int, std::vector<int>> by_point;
  for (int j = 0; j < j_draws; ++j)
    by_point[picks[static_cast<std::size_t>(j)]].push_back(j);

  std::vector<int> distinct;
  for (const auto& [t, js] : by_point)
    distinct.push_back(t);

  Eigen::MatrixXd samples(j_draws, n);
  NewtonWorkspace ws_proto(obs, cons);

  parallel_for(static_cast<std::int64_t>(distinct.size()), [&](std::int64_t di) {
    int t = distinct[static_cast<std::size_t>(di)];
    const ExplorationPoint& pt = points[static_cast<std::size_t>(t)];
    PriorPrecision prior = build_prior_precision(layout, hyper.unpack(pt.theta));
    NewtonWorkspace ws(obs, cons);
    GaussianApprox ga = ws.rebuild(prior, pt.x_hat);
    const auto& factor = *ga.factor;

    for (int j : by_point.at(t)) {
      Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(j));
      rng.uniform(); // burn the pick
      Eigen::VectorXd z(n);
      for (int i = 0; i < n; ++i)
        z[i] = rng.normal();
      Eigen::VectorXd v = sample_from_factor(factor, z);
      Eigen::VectorXd x = ga.projector.project(pt.x_hat + v);
      samples.row(j) = x.transpose();
    }
  });
  (void)ws_proto;

  if (source_ids)
    *source_ids = std::move(picks);
  return samples;
}

PosteriorFit fit_model(const ModelConfig& config, const CountsAndExposure& regular,
                       const FitOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  config.validate();
  if (regular.total_count() == 0 && regular.index.num_teams() == 0)
    throw EmptyData("fit_model: no data");

  PosteriorFit fit;
  fit.config = config;
  fit.index = regular.index;
  auto [layout, cons] = assemble_layout(config, regular.index);
  fit.layout = layout;
  fit.constraints = std::move(cons);
  fit.hyper = HyperDesc::make(config, layout.num_seasons);
  fit.seed = opts.seed;

  ObservationBlock obs = build_observations(regular, fit.layout);
  fit.excluded_cells = obs.num_excluded_cells;

  ExploreResult explored = explore_hyperparameters(obs, fit.constraints, fit.layout,
                                                   fit.hyper, opts.explore);
  fit.points = std::move(explored.points);
  fit.samples = sample_latent(obs, fit.constraints, fit.layout, fit.hyper, fit.points,
                              opts.num_samples, opts.seed, &fit.sample_source);

  fit.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return fit;
}

// ---------------------------------------------------------------------------
// Bundle serialization
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[] = "STAMPFIT1\n";

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_i32(std::ostream& out, std::int32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void put_vec(std::ostream& out, const Eigen::VectorXd& v) {
  put_u64(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * v.size()));
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::int32_t get_i32(std::istream& in) {
  std::int32_t v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
double get_f64(std::istream& in) {
  double v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::string get_str(std::istream& in) {
  std::string s(get_u64(in), '\0');
  in.read(s.data(), static_cast<std::streamsize>(s.size()));
  return s;
}
Eigen::VectorXd get_vec(std::istream& in) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(get_u64(in)));
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double) * v.size()));
  return v;
}

} // namespace

void save_fit_bundle(const PosteriorFit& fit, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ParseError("cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic) - 1);
  put_str(out, fit.config.to_kv());
  put_u64(out, static_cast<std::uint64_t>(fit.index.num_teams()));
  for (const auto& t : fit.index.teams())
    put_str(out, t);
  put_u64(out, static_cast<std::uint64_t>(fit.index.num_seasons()));
  for (const auto& s : fit.index.seasons())
    put_str(out, s);
  put_u64(out, fit.seed);
  put_i32(out, fit.excluded_cells);
  put_u64(out, static_cast<std::uint64_t>(fit.points.size()));
  for (const auto& pt : fit.points) {
    put_vec(out, pt.theta);
    put_f64(out, pt.log_post);
    put_f64(out, pt.weight);
    put_vec(out, pt.x_hat);
    put_vec(out, pt.x_star);
  }
  put_u64(out, static_cast<std::uint64_t>(fit.samples.rows()));
  put_u64(out, static_cast<std::uint64_t>(fit.samples.cols()));
  for (Eigen::Index j = 0; j < fit.samples.rows(); ++j) {
    Eigen::VectorXd row = fit.samples.row(j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double) * row.size()));
  }
  put_u64(out, static_cast<std::uint64_t>(fit.sample_source.size()));
  for (int s : fit.sample_source)
    put_i32(out, s);
  if (!out)
    throw ParseError("write failed: " + path);
}

PosteriorFit load_fit_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open fit bundle: " + path);
  char magic[sizeof(kMagic) - 1];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw ParseError("not a fit bundle: " + path);

  PosteriorFit fit;
  fit.config = ModelConfig::from_kv(get_str(in));
  std::vector<std::string> teams(get_u64(in));
  for (auto& t : teams)
    t = get_str(in);
  std::vector<std::string> seasons(get_u64(in));
  for (auto& s : seasons)
    s = get_str(in);
  fit.index = CellIndex(std::move(teams), std::move(seasons));
  fit.seed = get_u64(in);
  fit.excluded_cells = get_i32(in);

  auto [layout, cons] = assemble_layout(fit.config, fit.index);
  fit.layout = layout;
  fit.constraints = std::move(cons);
  fit.hyper = HyperDesc::make(fit.config, layout.num_seasons);

  fit.points.resize(get_u64(in));
  for (auto& pt : fit.points) {
    pt.theta = get_vec(in);
    pt.log_post = get_f64(in);
    pt.weight = get_f64(in);
    pt.x_hat = get_vec(in);
    pt.x_star = get_vec(in);
  }
  Eigen::Index rows = static_cast<Eigen::Index>(get_u64(in));
  Eigen::Index cols = static_cast<Eigen::Index>(get_u64(in));
  fit.samples.resize(rows, cols);
  for (Eigen::Index j = 0; j < rows; ++j) {
    Eigen::VectorXd row(cols);
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * cols));
    fit.samples.row(j) = row.transpose();
  }
  fit.sample_source.resize(get_u64(in));
  for (auto& s : fit.sample_source)
    s = get_i32(in);
  if (!in)
    throw ParseError("truncated fit bundle: " + path);
  return fit;
}

} // namespace stamp

#include "stamp/evaluate.hpp"

#include "stamp/design.hpp"
#include "stamp/errors.hpp"
#include "stamp/numeric.hpp"
#include "stamp/parallel.hpp"
#include "stamp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace stamp {

namespace {

// Per-cell log Poisson densities for every sample: out(j, c).
Eigen::MatrixXd sample_log_densities(const PosteriorFit& fit,
                                     const ObservationBlock& obs, int j_draws) {
  if (fit.samples.rows() < j_draws)
    throw MissingSamples("fit holds " + std::to_string(fit.samples.rows()) +
                         " samples, need " + std::to_string(j_draws));
  const Eigen::Index m = obs.rows();
  Eigen::MatrixXd logp(j_draws, m);
  Eigen::VectorXd lgamma_y(m);
  for (Eigen::Index c = 0; c < m; ++c)
    lgamma_y[c] = std::lgamma(obs.counts[c] + 1.0);
  for (int j = 0; j < j_draws; ++j) {
    Eigen::VectorXd eta = obs.design * fit.samples.row(j).transpose();
    for (Eigen::Index c = 0; c < m; ++c) {
      double log_mu = obs.log_exposures[c] + eta[c];
      logp(j, c) = obs.counts[c] * log_mu - std::exp(log_mu) - lgamma_y[c];
    }
  }
  return logp;
}

std::uint64_t flag_bits(const ModelConfig& c) {
  return (static_cast<std::uint64_t>(c.use_ta) << 7) |
         (static_cast<std::uint64_t>(c.use_ts) << 6) |
         (static_cast<std::uint64_t>(c.use_jump) << 5) |
         (static_cast<std::uint64_t>(c.use_step) << 4) |
         (static_cast<std::uint64_t>(c.use_lay) << 3) |
         (static_cast<std::uint64_t>(c.use_float) << 2) |
         (static_cast<std::uint64_t>(c.use_rim) << 1) |
         static_cast<std::uint64_t>(c.use_fade);
}

} // namespace

ElpdResult elpd_mc(const PosteriorFit& fit, const CountsAndExposure& held_out,
                   int j_draws) {
  ObservationBlock obs = build_observations(held_out, fit.layout);
  Eigen::MatrixXd logp = sample_log_densities(fit, obs, j_draws);
  ElpdResult out;
  out.cells_used = static_cast<int>(obs.rows());
  out.cells_excluded = obs.num_excluded_cells;
  const double log_j = std::log(static_cast<double>(j_draws));
  for (Eigen::Index c = 0; c < obs.rows(); ++c) {
    Eigen::VectorXd col = logp.col(c);
    out.elpd += log_sum_exp({col.data(), static_cast<std::size_t>(col.size())}) - log_j;
  }
  return out;
}

CpoResult cpo_lpml(const PosteriorFit& fit, const CountsAndExposure& fitted_split,
                   int j_draws) {
  ObservationBlock obs = build_observations(fitted_split, fit.layout);
  Eigen::MatrixXd logp = sample_log_densities(fit, obs, j_draws);
  CpoResult out;
  out.cell_ids = obs.cell_ids;
  out.log_cpo.resize(static_cast<std::size_t>(obs.rows()));
  const double log_j = std::log(static_cast<double>(j_draws));
  // A density at double-precision zero breaks the harmonic mean.
  constexpr double kDegenerate = -700.0;
  for (Eigen::Index c = 0; c < obs.rows(); ++c) {
    Eigen::VectorXd neg = -logp.col(c);
    double min_logp = -neg.maxCoeff();
    double log_cpo =
        log_j - log_sum_exp({neg.data(), static_cast<std::size_t>(neg.size())});
    out.log_cpo[static_cast<std::size_t>(c)] = log_cpo;
    if (min_logp < kDegenerate) {
      out.degenerate_cells.push_back(obs.cell_ids[static_cast<std::size_t>(c)]);
    } else {
      out.lpml += log_cpo;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison harnesses
// ---------------------------------------------------------------------------

namespace {

void rank_table(ComparisonTable& table) {
  table.ranking.resize(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    table.ranking[i] = static_cast<int>(i);
  std::sort(table.ranking.begin(), table.ranking.end(), [&](int a, int b) {
    const auto& ra = table.rows[static_cast<std::size_t>(a)];
    const auto& rb = table.rows[static_cast<std::size_t>(b)];
    if (ra.failed != rb.failed)
      return rb.failed;
    if (ra.elpd != rb.elpd)
      return ra.elpd > rb.elpd;
    if (ra.lpml != rb.lpml)
      return ra.lpml > rb.lpml;
    return a < b;
  });
}

ComparisonTable run_comparison(std::vector<ModelConfig> configs, bool extended,
                               const CountsAndExposure& regular,
                               const CountsAndExposure& post,
                               const CompareOptions& opts) {
  ComparisonTable table;
  table.extended = extended;
  table.j_draws = opts.j_draws;
  table.seed = opts.seed;
  table.dataset_hash = dataset_hash(regular);
  table.rows.resize(configs.size());

  parallel_for(static_cast<std::int64_t>(configs.size()), [&](std::int64_t i) {
    ComparisonRow& row = table.rows[static_cast<std::size_t>(i)];
    row.config = configs[static_cast<std::size_t>(i)];
    row.seed = mix_seed(opts.seed, flag_bits(row.config));
    try {
      FitOptions fopts;
      fopts.seed = row.seed;
      fopts.num_samples = opts.j_draws;
      fopts.explore = opts.explore;
      PosteriorFit fit = fit_model(row.config, regular, fopts);
      row.elpd = elpd_mc(fit, post, opts.j_draws).elpd;
      row.lpml = cpo_lpml(fit, regular, opts.j_draws).lpml;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      row.elpd = -std::numeric_limits<double>::infinity();
      row.lpml = -std::numeric_limits<double>::infinity();
    }
  });

  rank_table(table);
  return table;
}

} // namespace

ComparisonTable compare_core(const CountsAndExposure& regular,
                             const CountsAndExposure& post, double u_sd,
                             double u_slope, const CompareOptions& opts) {
  return run_comparison(enumerate_core_configs(u_sd, u_slope), false, regular, post,
                        opts);
}

ComparisonTable compare_extended(const CountsAndExposure& regular,
                                 const CountsAndExposure& post, double u_sd,
                                 double u_slope, const CompareOptions& opts) {
  return run_comparison(enumerate_extended_configs(u_sd, u_slope), true, regular,
                        post, opts);
}

double kendall_tau(const std::vector<int>& ranking_a,
                   const std::vector<int>& ranking_b) {
  if (ranking_a.size() != ranking_b.size())
    throw MismatchedIds("rankings have different sizes");
  std::vector<int> sa = ranking_a, sb = ranking_b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb || std::adjacent_find(sa.begin(), sa.end()) != sa.end())
    throw MismatchedIds("rankings must permute the same id set");

  const int n = static_cast<int>(ranking_a.size());
  if (n < 2)
    return 1.0;
  // position of each id in each ranking
  std::vector<int> pos_a(sa.size()), pos_b(sb.size());
  auto index_of = [](const std::vector<int>& sorted, int id) {
    return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), id) -
                            sorted.begin());
  };
  for (int r = 0; r < n; ++r) {
    pos_a[static_cast<std::size_t>(index_of(sa, ranking_a[static_cast<std::size_t>(r)]))] = r;
    pos_b[static_cast<std::size_t>(index_of(sa, ranking_b[static_cast<std::size_t>(r)]))] = r;
  }
  long long concordant = 0, discordant = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int da = pos_a[static_cast<std::size_t>(i)] - pos_a[static_cast<std::size_t>(j)];
      int db = pos_b[static_cast<std::size_t>(i)] - pos_b[static_cast<std::size_t>(j)];
      if ((da > 0) == (db > 0))
        ++concordant;
      else
        ++discordant;
    }
  return static_cast<double>(concordant - discordant) /
         (0.5 * n * (n - 1));
}

SweepResult prior_sensitivity_sweep(const CountsAndExposure& regular,
                                    const CountsAndExposure& post,
                                    const std::vector<std::pair<double, double>>& priors,
                                    const CompareOptions& opts) {
  if (priors.empty())
    throw EmptyData("prior sweep needs at least one prior setting");
  SweepResult out;
  out.priors = priors;
  for (const auto& [u_sd, u_slope] : priors)
    out.tables.push_back(compare_core(regular, post, u_sd, u_slope, opts));

  const int p = static_cast<int>(priors.size());
  out.tau = Eigen::MatrixXd::Identity(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b) {
      double t = kendall_tau(out.tables[static_cast<std::size_t>(a)].ranking,
                             out.tables[static_cast<std::size_t>(b)].ranking);
      out.tau(a, b) = out.tau(b, a) = t;
    }

  const std::size_t n_structs = out.tables.front().rows.size();
  out.mean_elpd.assign(n_structs, 0.0);
  for (const auto& table : out.tables)
    for (std::size_t i = 0; i < n_structs; ++i)
      out.mean_elpd[i] += table.rows[i].elpd / p;
  return out;
}

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

std::string format_table_text(const ComparisonTable& table, int top_n) {
  std::ostringstream out;
  char buf[128];
  if (table.extended) {
    out << "use_ts use_lay use_float use_rim use_fade   elpd_post_mc       lpml_reg\n";
  } else {
    out << "use_ta use_ts use_jump use_step   elpd_post_mc       lpml_reg\n";
  }
  int count = 0;
  for (int idx : table.ranking) {
    if (top_n >= 0 && count >= top_n)
      break;
    const auto& row = table.rows[static_cast<std::size_t>(idx)];
    const auto& c = row.config;
    auto mark = [](bool b) { return b ? "1" : "-"; };
    if (row.failed) {
      std::snprintf(buf, sizeof(buf), "%14s %14s   [failed: %s]", "-", "-",
                    row.error.c_str());
    } else {
      std::snprintf(buf, sizeof(buf), "%14.2f %14.2f", row.elpd, row.lpml);
    }
    if (table.extended) {
      out << "    " << mark(c.use_ts) << "      " << mark(c.use_lay) << "        "
          << mark(c.use_float) << "       " << mark(c.use_rim) << "        "
          << mark(c.use_fade) << " " << buf << '\n';
    } else {
      out << "    " << mark(c.use_ta) << "      " << mark(c.use_ts) << "        "
          << mark(c.use_jump) << "        " << mark(c.use_step) << " " << buf << '\n';
    }
    ++count;
  }
  return out.str();
}

void write_table_csv(const ComparisonTable& table, std::ostream& out) {
  char buf[64];
  if (table.extended)
    out << "use_ta,use_ts,use_jump,use_step,use_lay,use_float,use_rim,use_fade,"
           "elpd_post_mc,lpml_reg\n";
  else
    out << "use_ta,use_ts,use_jump,use_step,elpd_post_mc,lpml_reg\n";
  for (int idx : table.ranking) {
    const auto& row = table.rows[static_cast<std::size_t>(idx)];
    const auto& c = row.config;
    out << c.use_ta << ',' << c.use_ts << ',' << c.use_jump << ',' << c.use_step;
    if (table.extended)
      out << ',' << c.use_lay << ',' << c.use_float << ',' << c.use_rim << ','
          << c.use_fade;
    if (row.failed) {
      out << ",nan,nan\n";
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", row.elpd);
      out << ',' << buf;
      std::snprintf(buf, sizeof(buf), "%.17g", row.lpml);
      out << ',' << buf << '\n';
    }
  }
}

void write_table_csv_file(const ComparisonTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ParseError("cannot open for writing: " + path);
  write_table_csv(table, out);
}

ComparisonTable read_table_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open table: " + path);
  std::string header;
  if (!std::getline(in, header))
    throw ParseError("empty table file: " + path);
  bool extended = header.find("use_lay") != std::string::npos;

  ComparisonTable table;
  table.extended = extended;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ','))
      f.push_back(field);
    std::size_t expect = extended ? 10 : 6;
    if (f.size() != expect)
      throw ParseError("bad table row: " + line);
    ComparisonRow row;
    row.config.use_ta = f[0] == "1";
    row.config.use_ts = f[1] == "1";
    row.config.use_jump = f[2] == "1";
    row.config.use_step = f[3] == "1";
    std::size_t k = 4;
    if (extended) {
      row.config.use_lay = f[4] == "1";
      row.config.use_float = f[5] == "1";
      row.config.use_rim = f[6] == "1";
      row.config.use_fade = f[7] == "1";
      k = 8;
    }
    row.elpd = std::stod(f[k]);
    row.lpml = std::stod(f[k + 1]);
    row.failed = std::isnan(row.elpd);
    table.rows.push_back(std::move(row));
  }
  table.ranking.resize(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    table.ranking[i] = static_cast<int>(i); // file is already in rank order
  return table;
}

std::uint64_t dataset_hash(const CountsAndExposure& data) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  for (long long c : data.counts)
    mix(static_cast<std::uint64_t>(c));
  for (double e : data.exposures) {
    std::uint64_t bits;
    std::memcpy(&bits, &e, sizeof(bits));
    mix(bits);
  }
  mix(static_cast<std::uint64_t>(data.split));
  return h;
}

} // namespace stamp

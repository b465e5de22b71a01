// stamp: fit, compare, check and report shot-type-aware areal Poisson models.

#include "stamp/errors.hpp"
#include "stamp/evaluate.hpp"
#include "stamp/parallel.hpp"
#include "stamp/posterior_fit.hpp"
#include "stamp/ppc.hpp"
#include "stamp/report.hpp"
#include "stamp/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace stamp;

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ParseError("cannot open for writing: " + path);
  out << content;
}

CountsAndExposure load_split(const std::string& path) {
  return read_cell_csv_file(path);
}

struct ConfigFlags {
  std::string config_file;
  int ta = 1, ts = 1, jump = 1, step = 1;
  int lay = 0, flo = 0, rim = 0, fade = 0;
  double u_sd = 1.5, u_slope = 1.0;

  ModelConfig build() const {
    if (!config_file.empty())
      return ModelConfig::from_kv_file(config_file);
    ModelConfig cfg;
    cfg.use_ta = ta;
    cfg.use_ts = ts;
    cfg.use_jump = jump;
    cfg.use_step = step;
    cfg.use_lay = lay;
    cfg.use_float = flo;
    cfg.use_rim = rim;
    cfg.use_fade = fade;
    cfg.u_sd = u_sd;
    cfg.u_slope = u_slope;
    cfg.validate();
    return cfg;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "model config key-value file");
    cmd->add_option("--use-ta", ta, "team x area effects (default 1)");
    cmd->add_option("--use-ts", ts, "team x side effects (default 1)");
    cmd->add_option("--use-jump", jump, "jump-shot slopes (default 1)");
    cmd->add_option("--use-step", step, "step/pull slopes (default 1)");
    cmd->add_option("--use-lay", lay, "team-level lay_up slopes");
    cmd->add_option("--use-float", flo, "team-level floater slopes");
    cmd->add_option("--use-rim", rim, "team-level rim_finishes slopes");
    cmd->add_option("--use-fade", fade, "team-level fade_turn slopes");
    cmd->add_option("--u-sd", u_sd, "PC scale for main random effects");
    cmd->add_option("--u-slope", u_slope, "PC scale for shot-type slopes");
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAMP: shot-type-aware areal multilevel Poisson model"};
  app.require_subcommand(1);
  app.fallthrough(); // global flags may follow the subcommand

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
  app.add_option("--seed", seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = hardware)")
      ->capture_default_str();
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic league");
  int synth_teams = 20, synth_seasons = 2;
  std::string truth_file;
  synth_cmd->add_option("--teams", synth_teams, "number of teams");
  synth_cmd->add_option("--seasons", synth_seasons, "number of seasons");
  synth_cmd->add_option("--truth", truth_file, "ground-truth key-value file");

  // ---- fit ----
  auto* fit_cmd = app.add_subcommand("fit", "fit one configuration");
  std::string fit_reg;
  int fit_j = 400;
  ConfigFlags fit_flags;
  fit_cmd->add_option("--reg", fit_reg, "regular-season cell csv")->required();
  fit_cmd->add_option("--samples", fit_j, "posterior draws J");
  fit_flags.attach(fit_cmd);

  // ---- compare-core / compare-extended ----
  auto* core_cmd = app.add_subcommand("compare-core", "16-way core comparison");
  auto* ext_cmd = app.add_subcommand("compare-extended", "32-way extended comparison");
  std::string cmp_reg, cmp_post;
  double cmp_usd = 1.5, cmp_uslope = 1.0;
  int cmp_j = 400;
  for (auto* cmd : {core_cmd, ext_cmd}) {
    cmd->add_option("--reg", cmp_reg, "regular-season cell csv")->required();
    cmd->add_option("--post", cmp_post, "post-season cell csv")->required();
    cmd->add_option("--u-sd", cmp_usd, "PC scale for main random effects");
    cmd->add_option("--u-slope", cmp_uslope, "PC scale for slopes");
    cmd->add_option("--samples", cmp_j, "posterior draws J");
  }

  // ---- ppc-grid ----
  auto* ppc_cmd = app.add_subcommand("ppc-grid", "prior predictive scale search");
  std::string ppc_observed;
  int ppc_r = 800;
  ppc_cmd->add_option("--observed", ppc_observed, "observed cell csv")->required();
  ppc_cmd->add_option("--replicates", ppc_r, "replicates per grid point");

  // ---- report ----
  auto* report_cmd = app.add_subcommand("report", "post-fit summaries");
  report_cmd->require_subcommand(1);
  auto* map_cmd = report_cmd->add_subcommand("map", "percentile shot map");
  std::string map_fit, map_team, map_season, map_shot = "jump_shot";
  bool map_no_side = false;
  map_cmd->add_option("--fit", map_fit, "fit bundle")->required();
  map_cmd->add_option("--team", map_team, "team id")->required();
  map_cmd->add_option("--season", map_season, "season id")->required();
  map_cmd->add_option("--shot-type", map_shot, "shot type category");
  map_cmd->add_flag("--no-side-scaling", map_no_side,
                    "exclude the team x side contribution");
  auto* lr_cmd = report_cmd->add_subcommand("lr", "left-right bias caterpillar");
  std::string lr_fit;
  lr_cmd->add_option("--fit", lr_fit, "fit bundle")->required();
  auto* tables_cmd = report_cmd->add_subcommand("tables", "render a comparison csv");
  std::string tables_csv;
  int tables_top = -1;
  tables_cmd->add_option("--table", tables_csv, "comparison csv")->required();
  tables_cmd->add_option("--top", tables_top, "render only the top N rows");

  CLI11_PARSE(app, argc, argv);
  set_threads(threads);

  try {
    fs::create_directories(out_dir);
    auto out_path = [&out_dir](const std::string& name) {
      return (fs::path(out_dir) / name).string();
    };

    if (*synth_cmd) {
      GroundTruth truth;
      if (!truth_file.empty())
        truth = GroundTruth::from_kv_file(truth_file);
      truth.num_teams = synth_teams;
      truth.num_seasons = synth_seasons;
      SynthData data = generate(truth, seed);
      write_cell_csv_file(data.regular, out_path("regular.csv"));
      write_cell_csv_file(data.post, out_path("post.csv"));
      write_text_file(out_path("truth.kv"), truth.to_kv());
      std::cout << "wrote " << out_path("regular.csv") << " ("
                << data.regular.total_count() << " attempts), "
                << out_path("post.csv") << " (" << data.post.total_count()
                << " attempts)\n";
    } else if (*fit_cmd) {
      CountsAndExposure reg = load_split(fit_reg);
      FitOptions opts;
      opts.seed = seed;
      opts.num_samples = fit_j;
      PosteriorFit fit = fit_model(fit_flags.build(), reg, opts);
      save_fit_bundle(fit, out_path("fit.bin"));
      std::cout << "fit " << fit.config.flag_summary() << ": "
                << fit.points.size() << " exploration points, "
                << fit.samples.rows() << " samples, " << fit.wall_seconds
                << " s\n"
                << "wrote " << out_path("fit.bin") << "\n";
    } else if (*core_cmd || *ext_cmd) {
      CountsAndExposure reg = load_split(cmp_reg);
      CountsAndExposure post = load_split(cmp_post);
      CompareOptions opts;
      opts.seed = seed;
      opts.j_draws = cmp_j;
      ComparisonTable table =
          *core_cmd ? compare_core(reg, post, cmp_usd, cmp_uslope, opts)
                    : compare_extended(reg, post, cmp_usd, cmp_uslope, opts);
      std::string base = *core_cmd ? "compare_core" : "compare_extended";
      write_table_csv_file(table, out_path(base + ".csv"));
      std::string text = format_table_text(table);
      write_text_file(out_path(base + ".txt"), text);
      std::cout << text << "wrote " << out_path(base + ".csv") << "\n";
    } else if (*ppc_cmd) {
      CountsAndExposure observed = load_split(ppc_observed);
      PpcGridOptions opts;
      opts.seed = seed;
      opts.replicates = ppc_r;
      std::vector<PpcReport> reports = ppc_grid_search(observed, opts);
      write_ppc_grid_csv_file(reports, out_path("ppc_grid.csv"));
      std::string text = format_ppc_grid_text(reports);
      write_text_file(out_path("ppc_grid.txt"), text);
      std::cout << text << "wrote " << out_path("ppc_grid.csv") << "\n";
    } else if (*map_cmd) {
      PosteriorFit fit = load_fit_bundle(map_fit);
      PercentileMap map = percentile_map(fit, map_team, map_season,
                                         shot_type_from_name(map_shot), !map_no_side);
      std::string base = "map_" + map_team + "_" + map_season + "_" + map_shot;
      write_text_file(out_path(base + ".svg"), render_map_svg(map));
      std::ofstream csv(out_path(base + ".csv"), std::ios::binary);
      write_map_csv(map, csv);
      std::cout << "wrote " << out_path(base + ".svg") << "\n";
    } else if (*lr_cmd) {
      PosteriorFit fit = load_fit_bundle(lr_fit);
      std::vector<LrBiasRow> rows = lr_bias(fit);
      write_text_file(out_path("lr_bias.svg"), render_lr_svg(rows));
      std::ofstream csv(out_path("lr_bias.csv"), std::ios::binary);
      write_lr_csv(rows, csv);
      std::cout << "wrote " << out_path("lr_bias.svg") << "\n";
    } else if (*tables_cmd) {
      ComparisonTable table = read_table_csv_file(tables_csv);
      std::string text = format_table_text(table, tables_top);
      write_text_file(out_path("table.txt"), text);
      std::cout << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

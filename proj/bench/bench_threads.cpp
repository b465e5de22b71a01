// Benchmark: serial reference vs OpenMP execution of the data-parallel
// stages (prior predictive replication, posterior sampling, comparison
// fits). Outputs are checked for exact equality between the two paths.

#include "stamp/evaluate.hpp"
#include "stamp/parallel.hpp"
#include "stamp/posterior_fit.hpp"
#include "stamp/ppc.hpp"
#include "stamp/synth.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace stamp;

namespace {

double time_of(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-26s %9.3fs %9.3fs %7.2fx   %s\n", name, serial, parallel,
              serial / parallel, identical ? "identical" : "DIFFERS");
}

} // namespace

int main() {
  GroundTruth truth;
  truth.num_teams = 8;
  truth.num_seasons = 2;
  SynthData data = generate(truth, 42);

  int hw = hardware_threads();
  std::printf("threads: serial=1, parallel=%d\n", hw);
  std::printf("%-26s %10s %10s %8s\n", "stage", "serial", "parallel", "speedup");

  // prior predictive replicates
  {
    PpcGridOptions opts;
    opts.u_sd_grid = {1.5};
    opts.u_slope_grid = {1.0};
    opts.replicates = 200;
    opts.seed = 7;
    std::vector<PpcReport> serial_rep, parallel_rep;
    set_threads(1);
    double ts = time_of([&] { serial_rep = ppc_grid_search(data.regular, opts); });
    set_threads(hw);
    double tp = time_of([&] { parallel_rep = ppc_grid_search(data.regular, opts); });
    bool same = serial_rep[0].rep_cell_95 == parallel_rep[0].rep_cell_95 &&
                serial_rep[0].rep_tot_95 == parallel_rep[0].rep_tot_95;
    row("ppc replicates (200)", ts, tp, same);
  }

  // one full fit (CCD evaluation + sampling inside)
  {
    FitOptions opts;
    opts.seed = 7;
    PosteriorFit fit_s, fit_p;
    set_threads(1);
    double ts = time_of([&] { fit_s = fit_model(truth.config, data.regular, opts); });
    set_threads(hw);
    double tp = time_of([&] { fit_p = fit_model(truth.config, data.regular, opts); });
    bool same = fit_s.samples == fit_p.samples;
    row("full-config fit", ts, tp, same);
  }

  // comparison harness (16 row fits)
  {
    CompareOptions opts;
    opts.seed = 7;
    opts.j_draws = 100;
    ComparisonTable table_s, table_p;
    set_threads(1);
    double ts = time_of(
        [&] { table_s = compare_core(data.regular, data.post, 1.5, 1.0, opts); });
    set_threads(hw);
    double tp = time_of(
        [&] { table_p = compare_core(data.regular, data.post, 1.5, 1.0, opts); });
    bool same = table_s.ranking == table_p.ranking;
    for (std::size_t i = 0; i < table_s.rows.size(); ++i)
      same = same && table_s.rows[i].elpd == table_p.rows[i].elpd;
    row("compare_core (16 fits)", ts, tp, same);
  }

  return 0;
}

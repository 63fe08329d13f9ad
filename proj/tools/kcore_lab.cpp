// kcore-lab: batch experiment runner over the kcorelab C API.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kcorelab.h"

namespace {

struct Flags {
  std::string kernel;
  std::string kernel_b;
  long n = 1000;
  double c = 1.0;
  double c_min = 0.0;
  double c_max = 10.0;
  int k = 3;
  long trials = 0;
  int depth = 0;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out;
  std::string plot;
  std::string strategy = "fast";
  double tol = 1e-12;
  double eps_pa = 1e-8;
  double tol_c = 1e-4;
  std::vector<long> q_list;
  std::vector<int> m_list;
  bool timing = false;
  std::string x_column;
  std::string y_column;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--kernel", f.kernel, "kernel preset or step-kernel file");
  cmd->add_option("--n", f.n, "vertex count (Paley: prime order q)");
  cmd->add_option("--c", f.c, "percolation intensity");
  cmd->add_option("--c-min", f.c_min, "scan range lower end");
  cmd->add_option("--c-max", f.c_max, "scan range upper end");
  cmd->add_option("--k", f.k, "core order");
  cmd->add_option("--trials", f.trials, "percolation trials");
  cmd->add_option("--depth", f.depth, "finite depth d (0 = limit)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--workers", f.workers,
                  "worker threads (0 = auto / KCORE_LAB_WORKERS)");
  cmd->add_option("--out", f.out, "output CSV path (default stdout)");
  cmd->add_option("--plot", f.plot, "optional SVG output");
  cmd->add_option("--strategy", f.strategy, "percolation sampler: naive|fast");
  cmd->add_option("--tol", f.tol, "fixed-point tolerance");
  cmd->add_option("--eps-pa", f.eps_pa, "positivity threshold for P(A)");
  cmd->add_option("--tol-c", f.tol_c, "bisection width for c*");
  cmd->add_flag("--timing", f.timing, "record measured wallclock per trial");
}

int dispatch(const std::string& command, const Flags& f) {
  nlohmann::json j;
  j["command"] = command;
  j["kernel"] = f.kernel;
  j["kernel_b"] = f.kernel_b;
  j["n"] = f.n;
  j["c"] = f.c;
  j["c_min"] = f.c_min;
  j["c_max"] = f.c_max;
  j["k"] = f.k;
  j["trials"] = f.trials;
  j["depth"] = f.depth;
  j["seed"] = f.seed;
  j["workers"] = f.workers;
  j["out"] = f.out;
  j["plot"] = f.plot;
  j["strategy"] = f.strategy;
  j["tol"] = f.tol;
  j["eps_pa"] = f.eps_pa;
  j["tol_c"] = f.tol_c;
  j["q_list"] = f.q_list;
  j["m_list"] = f.m_list;
  j["timing"] = f.timing;
  j["x_column"] = f.x_column;
  j["y_column"] = f.y_column;
  kcl_status rc = kcl_run_experiment(j.dump().c_str());
  if (rc != KCL_OK && kcl_last_error()[0] != '\0')
    std::fprintf(stderr, "error: %s\n", kcl_last_error());
  return static_cast<int>(rc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"percolated dense graph k-core laboratory"};
  app.require_subcommand(1);
  Flags f;

  auto* verify = app.add_subcommand(
      "verify", "percolate + peel vs the branching-process prediction");
  add_common(verify, f);

  auto* threshold =
      app.add_subcommand("threshold", "bisect the giant k-core threshold c*");
  add_common(threshold, f);

  auto* continuity = app.add_subcommand(
      "continuity", "prob/cut-distance convergence along a kernel family");
  add_common(continuity, f);
  continuity->add_option("--q-list", f.q_list, "Paley prime orders");
  continuity->add_option("--m-list", f.m_list, "dyadic refinement levels");

  auto* cutnorm =
      app.add_subcommand("cutnorm", "cut distance between two kernels");
  add_common(cutnorm, f);
  cutnorm->add_option("--kernel-b", f.kernel_b, "second kernel");

  auto* paley = app.add_subcommand(
      "paley", "Paley graph verified against the constant 1/2 kernel");
  add_common(paley, f);

  auto* plot = app.add_subcommand("plot", "render a CSV column pair as SVG");
  add_common(plot, f);
  plot->add_option("--x-column", f.x_column, "x column name");
  plot->add_option("--y-column", f.y_column, "y column name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return 2;
  }

  for (auto* cmd : {verify, threshold, continuity, cutnorm, paley, plot})
    if (cmd->parsed()) return dispatch(cmd->get_name(), f);
  return 2;
}

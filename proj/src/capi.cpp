#include "kcorelab.h"

#include <string>

#include "kcorelab/branching.hpp"
#include "kcorelab/errors.hpp"
#include "kcorelab/experiments.hpp"
#include "kcorelab/graphs.hpp"
#include "kcorelab/kernels.hpp"
#include "kcorelab/plot.hpp"

struct kcl_kernel {
  kcl::StepKernel w;
};
struct kcl_graph {
  kcl::WeightedDenseGraph g;
};
struct kcl_sample {
  kcl::SimpleGraph s;
};

namespace {

thread_local std::string g_last_error;

kcl_status status_of(const kcl::Error& e) {
  switch (e.kind()) {
    case kcl::ErrorKind::config:
      return KCL_ERR_CONFIG;
    case kcl::ErrorKind::io:
      return KCL_ERR_IO;
    case kcl::ErrorKind::capability:
      return KCL_ERR_CAPABILITY;
  }
  return KCL_ERR_FAIL;
}

template <typename Fn>
kcl_status guarded(Fn&& fn) {
  try {
    fn();
    return KCL_OK;
  } catch (const kcl::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return KCL_ERR_FAIL;
  }
}

kcl_status check_args(bool ok) {
  if (!ok) {
    g_last_error = "null argument";
    return KCL_ERR_CONFIG;
  }
  return KCL_OK;
}

}  // namespace

extern "C" {

const char* kcl_version(void) { return "0.1.0"; }
const char* kcl_last_error(void) { return g_last_error.c_str(); }

kcl_status kcl_kernel_preset(const char* name, kcl_kernel** out) {
  if (kcl_status s = check_args(name && out)) return s;
  return guarded([&] {
    *out = new kcl_kernel{kcl::KernelPreset::parse(name).resolve()};
  });
}

kcl_status kcl_kernel_load(const char* path, kcl_kernel** out) {
  if (kcl_status s = check_args(path && out)) return s;
  return guarded([&] { *out = new kcl_kernel{kcl::load_kernel(path)}; });
}

kcl_status kcl_kernel_save(const kcl_kernel* w, const char* path) {
  if (kcl_status s = check_args(w && path)) return s;
  return guarded([&] { kcl::save_kernel(w->w, path); });
}

kcl_status kcl_kernel_scale(const kcl_kernel* w, double lambda,
                            kcl_kernel** out) {
  if (kcl_status s = check_args(w && out)) return s;
  return guarded([&] { *out = new kcl_kernel{kcl::scale(w->w, lambda)}; });
}

kcl_status kcl_kernel_blocks(const kcl_kernel* w, size_t* out) {
  if (kcl_status s = check_args(w && out)) return s;
  *out = w->w.blocks();
  return KCL_OK;
}

void kcl_kernel_free(kcl_kernel* w) { delete w; }

kcl_status kcl_cut_distance(const kcl_kernel* a, const kcl_kernel* b,
                            int restarts, double* value,
                            int* is_lower_bound) {
  if (kcl_status s = check_args(a && b && value)) return s;
  return guarded([&] {
    kcl::CutNormResult r =
        kcl::cut_distance(a->w, b->w, restarts > 0 ? restarts : 32);
    *value = r.value;
    if (is_lower_bound) *is_lower_bound = r.lower_bound ? 1 : 0;
  });
}

kcl_status kcl_graph_constant(long n, double a, kcl_graph** out) {
  if (kcl_status s = check_args(out != nullptr)) return s;
  return guarded(
      [&] { *out = new kcl_graph{kcl::WeightedDenseGraph::constant(n, a)}; });
}

kcl_status kcl_graph_paley(long q, kcl_graph** out) {
  if (kcl_status s = check_args(out != nullptr)) return s;
  return guarded(
      [&] { *out = new kcl_graph{kcl::WeightedDenseGraph::paley(q)}; });
}

kcl_status kcl_graph_from_kernel(long n, const kcl_kernel* w,
                                 kcl_graph** out) {
  if (kcl_status s = check_args(w && out)) return s;
  return guarded([&] {
    *out = new kcl_graph{kcl::WeightedDenseGraph::from_kernel(n, w->w)};
  });
}

kcl_status kcl_graph_embed(const kcl_graph* g, kcl_kernel** out) {
  if (kcl_status s = check_args(g && out)) return s;
  return guarded([&] { *out = new kcl_kernel{kcl::embed_graph(g->g)}; });
}

void kcl_graph_free(kcl_graph* g) { delete g; }

kcl_status kcl_percolate(const kcl_graph* g, double c, uint64_t seed,
                         uint64_t trial, int strategy, kcl_sample** out) {
  if (kcl_status s = check_args(g && out)) return s;
  return guarded([&] {
    *out = new kcl_sample{kcl::percolate(
        g->g, c, seed, trial,
        strategy ? kcl::PercolateStrategy::fast
                 : kcl::PercolateStrategy::naive)};
  });
}

kcl_status kcl_sample_edge_count(const kcl_sample* s, long* out) {
  if (kcl_status st = check_args(s && out)) return st;
  *out = s->s.edge_count();
  return KCL_OK;
}

kcl_status kcl_kcore_size(const kcl_sample* s, int k, long* out) {
  if (kcl_status st = check_args(s && out)) return st;
  return guarded([&] { *out = kcl::k_core(s->s, k).size; });
}

kcl_status kcl_sample_write_edge_list(const kcl_sample* s, const char* path) {
  if (kcl_status st = check_args(s && path)) return st;
  return guarded([&] { kcl::write_edge_list(s->s, path); });
}

void kcl_sample_free(kcl_sample* s) { delete s; }

kcl_status kcl_psi(int k, double lambda, double* out) {
  if (kcl_status s = check_args(out != nullptr)) return s;
  return guarded([&] { *out = kcl::psi(k, lambda); });
}

kcl_status kcl_prob_a(const kcl_kernel* w, double c, int k, double tol,
                      double* value, int* converged) {
  if (kcl_status s = check_args(w && value)) return s;
  return guarded([&] {
    kcl::ProbResult r = kcl::prob_a_limit(
        kcl::BranchingSpec::for_kernel(w->w, c), k, tol > 0 ? tol : 1e-12);
    *value = r.value;
    if (converged) *converged = r.converged ? 1 : 0;
  });
}

kcl_status kcl_prob_a_graph(const kcl_graph* g, double c, int k, double tol,
                            double* value, int* converged) {
  if (kcl_status s = check_args(g && value)) return s;
  return guarded([&] {
    kcl::ProbResult r = kcl::prob_a_limit(
        kcl::BranchingSpec::for_graph(g->g, c), k, tol > 0 ? tol : 1e-12);
    *value = r.value;
    if (converged) *converged = r.converged ? 1 : 0;
  });
}

kcl_status kcl_prob_a_depth(const kcl_kernel* w, double c, int k, int depth,
                            double* value) {
  if (kcl_status s = check_args(w && value)) return s;
  return guarded([&] {
    *value =
        kcl::prob_a_depth(kcl::BranchingSpec::for_kernel(w->w, c), k, depth)
            .value;
  });
}

kcl_status kcl_threshold(const kcl_kernel* w, int k, double c_lo, double c_hi,
                         double eps_pa, double tol_c, double* c_star,
                         int* found) {
  if (kcl_status s = check_args(w && c_star)) return s;
  return guarded([&] {
    kcl::ThresholdResult r =
        kcl::threshold_scan(w->w, k, c_lo, c_hi, eps_pa, tol_c);
    *c_star = r.found ? r.c_star : 0.0;
    if (found) *found = r.found ? 1 : 0;
  });
}

kcl_status kcl_simulate(const kcl_kernel* w, double c, int k, int depth,
                        long trials, long pop_cap, uint64_t seed,
                        double* estimate, double* std_error, long* cap_hits) {
  if (kcl_status s = check_args(w && estimate)) return s;
  return guarded([&] {
    kcl::SimResult r = kcl::simulate_and_check(
        kcl::BranchingSpec::for_kernel(w->w, c), k, depth, trials, pop_cap,
        seed);
    *estimate = r.estimate;
    if (std_error) *std_error = r.std_error;
    if (cap_hits) *cap_hits = r.cap_hits;
  });
}

kcl_status kcl_run_experiment(const char* json_config) {
  if (kcl_status s = check_args(json_config != nullptr)) return s;
  try {
    kcl::ExperimentConfig cfg = kcl::ExperimentConfig::from_json(json_config);
    int rc = kcl::run_experiment(cfg);
    return static_cast<kcl_status>(rc);
  } catch (const kcl::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return KCL_ERR_FAIL;
  }
}

kcl_status kcl_emit_plot(const char* csv_path, const char* x_column,
                         const char* y_column, const char* out_svg) {
  if (kcl_status s = check_args(csv_path && x_column && y_column && out_svg))
    return s;
  return guarded(
      [&] { kcl::emit_plot(csv_path, x_column, y_column, out_svg); });
}

}  // extern "C"

/* kcorelab C API: opaque handles over the percolated k-core toolkit.
 *
 * Every function returns a kcl_status; on failure the thread-local message
 * from kcl_last_error() describes the problem. Handles are freed with the
 * matching *_free call; all operations on a constructed handle are
 * read-only and thread-safe.
 */
#ifndef KCORELAB_H
#define KCORELAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kcl_status {
  KCL_OK = 0,
  KCL_ERR_FAIL = 1,       /* unexpected internal failure */
  KCL_ERR_CONFIG = 2,     /* invalid parameters or malformed input */
  KCL_ERR_IO = 3,         /* file system failure */
  KCL_ERR_CAPABILITY = 4, /* request exceeds a documented cap */
} kcl_status;

typedef struct kcl_kernel kcl_kernel;  /* step kernel */
typedef struct kcl_graph kcl_graph;    /* weighted dense graph */
typedef struct kcl_sample kcl_sample;  /* percolated simple graph */

const char* kcl_version(void);
const char* kcl_last_error(void);

/* ---- kernels ---- */
kcl_status kcl_kernel_preset(const char* name, kcl_kernel** out);
kcl_status kcl_kernel_load(const char* path, kcl_kernel** out);
kcl_status kcl_kernel_save(const kcl_kernel* w, const char* path);
kcl_status kcl_kernel_scale(const kcl_kernel* w, double lambda,
                            kcl_kernel** out);
kcl_status kcl_kernel_blocks(const kcl_kernel* w, size_t* out);
void kcl_kernel_free(kcl_kernel* w);

/* value: cut distance (exact when the common refinement has <= 24 blocks,
 * otherwise a heuristic lower bound; *is_lower_bound reports which). */
kcl_status kcl_cut_distance(const kcl_kernel* a, const kcl_kernel* b,
                            int restarts, double* value, int* is_lower_bound);

/* ---- graphs ---- */
kcl_status kcl_graph_constant(long n, double a, kcl_graph** out);
kcl_status kcl_graph_paley(long q, kcl_graph** out);
kcl_status kcl_graph_from_kernel(long n, const kcl_kernel* w, kcl_graph** out);
kcl_status kcl_graph_embed(const kcl_graph* g, kcl_kernel** out);
void kcl_graph_free(kcl_graph* g);

/* strategy: 0 naive, 1 fast. */
kcl_status kcl_percolate(const kcl_graph* g, double c, uint64_t seed,
                         uint64_t trial, int strategy, kcl_sample** out);
kcl_status kcl_sample_edge_count(const kcl_sample* s, long* out);
kcl_status kcl_kcore_size(const kcl_sample* s, int k, long* out);
kcl_status kcl_sample_write_edge_list(const kcl_sample* s, const char* path);
void kcl_sample_free(kcl_sample* s);

/* ---- branching ---- */
kcl_status kcl_psi(int k, double lambda, double* out);
kcl_status kcl_prob_a(const kcl_kernel* w, double c, int k, double tol,
                      double* value, int* converged);
kcl_status kcl_prob_a_graph(const kcl_graph* g, double c, int k, double tol,
                            double* value, int* converged);
kcl_status kcl_prob_a_depth(const kcl_kernel* w, double c, int k, int depth,
                            double* value);
kcl_status kcl_threshold(const kcl_kernel* w, int k, double c_lo, double c_hi,
                         double eps_pa, double tol_c, double* c_star,
                         int* found);
kcl_status kcl_simulate(const kcl_kernel* w, double c, int k, int depth,
                        long trials, long pop_cap, uint64_t seed,
                        double* estimate, double* std_error, long* cap_hits);

/* ---- experiments ---- */
/* config: JSON object mirroring the CLI flags (see README). Writes the
 * configured CSV/SVG outputs. Returns the exit-code semantics of the CLI. */
kcl_status kcl_run_experiment(const char* json_config);
kcl_status kcl_emit_plot(const char* csv_path, const char* x_column,
                         const char* y_column, const char* out_svg);

#ifdef __cplusplus
}
#endif

#endif /* KCORELAB_H */

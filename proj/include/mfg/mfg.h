/* Mean-field game toolkit: C interface to the solver library.
 *
 * The library computes mean-field equilibria of stochastic differential
 * games with mean-field interaction (decoupling field + fixed-point measure
 * flow), provides the analytic linear-quadratic oracle, exact discrete
 * Wasserstein distances, and the N-player experiment pipelines.
 *
 * Conventions:
 *   - every function returns an mfg_status; outputs go through pointers,
 *   - objects are opaque handles released with their _free function,
 *   - strings returned through char** are owned by the caller and must be
 *     released with mfg_string_free,
 *   - mfg_last_error() describes the most recent failure on this thread.
 */
#ifndef MFG_MFG_H
#define MFG_MFG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MFG_API __declspec(dllexport)
#else
#define MFG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfg_status {
    MFG_OK = 0,
    MFG_ERR_INVALID_ARGUMENT = 1, /* bad input, malformed config, dimension mismatch */
    MFG_ERR_ASSUMPTION = 2,       /* model violates a standing assumption */
    MFG_ERR_SOLVER = 3,           /* iteration budget or numeric failure */
    MFG_ERR_NOT_CONVERGED = 4,    /* fixed point reported non-convergence */
    MFG_ERR_IO = 5,               /* filesystem failure */
    MFG_ERR_INTERNAL = 6
} mfg_status;

MFG_API const char* mfg_version(void);
MFG_API const char* mfg_status_name(mfg_status status);
MFG_API const char* mfg_last_error(void);
MFG_API void mfg_string_free(char* s);

/* Worker count for internal parallel loops (results are independent of it). */
MFG_API void mfg_set_threads(int n);

/* ---- discrete measures and exact Wasserstein distances ---------------- */

typedef struct mfg_measure mfg_measure;

/* points is row-major: atom i occupies points[i*dim .. i*dim+dim-1].
 * weights may be NULL for uniform weights; they are normalized to mass 1. */
MFG_API mfg_status mfg_measure_create(int dim, const double* points, const double* weights,
                                      int n_atoms, mfg_measure** out);
MFG_API void mfg_measure_free(mfg_measure* mu);
MFG_API mfg_status mfg_measure_mean(const mfg_measure* mu, double* out /* dim */);
MFG_API mfg_status mfg_measure_moment(const mfg_measure* mu, int order, double* out);

/* Exact quantile-coupling W_2 (requires dim == 1). */
MFG_API mfg_status mfg_w2_1d(const mfg_measure* a, const mfg_measure* b, double* out);
/* Exact W_2 by the transportation LP (any dim; |a|*|b| <= 2^20). */
MFG_API mfg_status mfg_w2_exact(const mfg_measure* a, const mfg_measure* b, double* out);
/* Same LP with linear cost. */
MFG_API mfg_status mfg_w1_exact(const mfg_measure* a, const mfg_measure* b, double* out);

/* ---- linear-quadratic specs and the analytic oracle -------------------- */

typedef struct mfg_lq_spec mfg_lq_spec;

/* JSON document with fields T, x0, sigma, q, qbar, m, mbar, n, b0, b1, b2;
 * scalar entries, matrices as arrays of arrays, or piecewise-constant
 * {"breakpoints": [...], "values": [...]}. */
MFG_API mfg_status mfg_lq_spec_parse(const char* json_text, mfg_lq_spec** out);
MFG_API void mfg_lq_spec_free(mfg_lq_spec* spec);

/* Assumption screening; returns the report as a JSON string. Always MFG_OK
 * for well-formed specs: violations are advisory and live in the report. */
MFG_API mfg_status mfg_lq_spec_check(const mfg_lq_spec* spec, char** report_json);

typedef struct mfg_riccati mfg_riccati;

MFG_API mfg_status mfg_riccati_solve(const mfg_lq_spec* spec, int n_steps, mfg_riccati** out);
MFG_API void mfg_riccati_free(mfg_riccati* sol);
MFG_API int mfg_riccati_n_nodes(const mfg_riccati* sol);
MFG_API int mfg_riccati_dim(const mfg_riccati* sol);
/* Any output pointer may be NULL. eta is row-major d*d. */
MFG_API mfg_status mfg_riccati_node(const mfg_riccati* sol, int node, double* t, double* eta,
                                    double* chi, double* xbar);
MFG_API mfg_status mfg_riccati_cost(const mfg_riccati* sol, double* out);
/* Equilibrium feedback control alpha(t, x); x and alpha_out have the spec's
 * state/control dimensions. */
MFG_API mfg_status mfg_riccati_feedback(const mfg_riccati* sol, double t, const double* x,
                                        double* alpha_out);

/* ---- full pipelines ----------------------------------------------------- */

/* Runs one toolkit command end to end and writes a run directory
 * (manifest.json, config.json, summary.txt plus per-command CSV/JSON
 * artifacts). Commands: "solve", "lq-oracle", "nash-gap", "chaos",
 * "wasserstein-rate", "validate".
 *
 * seed_override may be NULL. run_dir_out (optional) receives the created
 * directory path. Returns MFG_OK on success, MFG_ERR_INVALID_ARGUMENT on
 * config/command validation failure, MFG_ERR_NOT_CONVERGED when the solver
 * reports non-convergence (artifacts are still written). */
MFG_API mfg_status mfg_run(const char* command, const char* config_json, const char* out_dir,
                           const uint64_t* seed_override, int quiet, char** run_dir_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MFG_MFG_H */

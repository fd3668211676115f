#ifndef LINSYNC_H
#define LINSYNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Integration engine for [`lc_experiment_simulate`].
 */
typedef enum LcEngine {
  /**
   * RK4 on the full agent/compensator (or observer) loop.
   */
  LC_ENGINE_ODE = 0,
  /**
   * Closed-form modal propagation of `z = w − η`, sampled at switch times.
   */
  LC_ENGINE_MODAL = 1,
} LcEngine;

/**
 * Result code of every call.
 */
typedef enum LcStatus {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_POINTER = 1,
  LC_STATUS_INVALID_ARGUMENT = 2,
  LC_STATUS_CONFIG = 3,
  LC_STATUS_INFEASIBLE = 4,
  LC_STATUS_DIVERGENCE = 5,
  LC_STATUS_NUMERIC = 6,
  LC_STATUS_BUFFER_TOO_SMALL = 7,
  LC_STATUS_PANIC = 8,
} LcStatus;

/**
 * Validated experiment (model, gains, graph family, schedule).
 */
typedef struct LcExperiment LcExperiment;

/**
 * Communication graph with its Laplacian.
 */
typedef struct LcGraph LcGraph;

/**
 * Sampled run: times, consensus error and agent states.
 */
typedef struct LcTrajectory LcTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t lc_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lc_version(void);

/**
 * `out = exp(t·M)` for an `n x n` row-major matrix.
 *
 * # Safety
 * `m` and `out` must each point to `n*n` doubles.
 */
enum LcStatus lc_expm(size_t n, const double *m, double t, double *out);

/**
 * `out = Q diag(gammas) Q⁻¹` for an `n x n` row-major `Q`.
 *
 * # Safety
 * `q` and `out` must point to `n*n` doubles, `gammas` to `n`.
 */
enum LcStatus lc_phi_from_gamma(size_t n, const double *q, const double *gammas, double *out);

/**
 * Builds a graph from an `m x m` row-major weight matrix; `weights[i*m+j] > 0`
 * means agent `i` listens to agent `j`.
 *
 * # Safety
 * `weights` must point to `m*m` doubles and `out` to a writable handle slot.
 */
enum LcStatus lc_graph_new(size_t m,
                           const double *weights,
                           double alpha_floor,
                           struct LcGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from [`lc_graph_new`] not yet freed.
 */
void lc_graph_free(struct LcGraph *g);

/**
 * Second Laplacian eigenvalue (ascending real part).
 *
 * # Safety
 * `g` must be a live handle; `re` and `im` writable.
 */
enum LcStatus lc_graph_lambda2(const struct LcGraph *g, double *re, double *im);

/**
 * Writes the Laplacian (`m*m` doubles, row-major).
 *
 * # Safety
 * `g` must be a live handle; `out` must hold `capacity` doubles.
 */
enum LcStatus lc_graph_laplacian(const struct LcGraph *g, double *out, size_t capacity);

/**
 * `connected` receives 1 when some node reaches every other, `strongly` when
 * every ordered pair is joined by a directed path.
 *
 * # Safety
 * `g` must be a live handle; the outputs writable.
 */
enum LcStatus lc_graph_connectivity(const struct LcGraph *g, int32_t *connected, int32_t *strongly);

/**
 * Parses and validates a TOML experiment (same format as the CLI).
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` a writable handle slot.
 */
enum LcStatus lc_experiment_from_toml(const char *toml, struct LcExperiment **out);

/**
 * The built-in four-agent switching example.
 *
 * # Safety
 * `out` must be a writable handle slot.
 */
enum LcStatus lc_experiment_builtin(struct LcExperiment **out);

/**
 * Copy of `exp` with its random schedule redrawn from `seed`.
 *
 * # Safety
 * `exp` must be a live handle; `out` a writable handle slot.
 */
enum LcStatus lc_experiment_with_seed(const struct LcExperiment *exp,
                                      uint64_t seed,
                                      struct LcExperiment **out);

/**
 * # Safety
 * `exp` must be null or a live handle.
 */
void lc_experiment_free(struct LcExperiment *exp);

/**
 * Agent count `m`, state dimension `n` and number of dwell intervals.
 *
 * # Safety
 * `exp` must be a live handle; non-null outputs must be writable.
 */
enum LcStatus lc_experiment_dims(const struct LcExperiment *exp,
                                 size_t *agents,
                                 size_t *state_dim,
                                 size_t *intervals);

/**
 * Per-mode gains γ (`n` doubles).
 *
 * # Safety
 * `exp` must be a live handle; `out` must hold `capacity` doubles.
 */
enum LcStatus lc_experiment_gamma(const struct LcExperiment *exp, double *out, size_t capacity);

/**
 * Coupling gain Φ (`n*n` doubles, row-major).
 *
 * # Safety
 * `exp` must be a live handle; `out` must hold `capacity` doubles.
 */
enum LcStatus lc_experiment_phi(const struct LcExperiment *exp, double *out, size_t capacity);

/**
 * Runs the experiment. The ODE engine samples every RK4 step and stores the
 * agent states `w`; the modal engine samples switch times and stores `z = w − η`.
 *
 * # Safety
 * `exp` must be a live handle; `out` a writable handle slot.
 */
enum LcStatus lc_experiment_simulate(const struct LcExperiment *exp,
                                     enum LcEngine engine,
                                     struct LcTrajectory **out);

/**
 * # Safety
 * `tr` must be null or a live handle.
 */
void lc_trajectory_free(struct LcTrajectory *tr);

/**
 * Number of samples (0 for a null handle).
 *
 * # Safety
 * `tr` must be null or a live handle.
 */
size_t lc_trajectory_len(const struct LcTrajectory *tr);

/**
 * Sample times.
 *
 * # Safety
 * `tr` must be a live handle; `out` must hold `capacity` doubles.
 */
enum LcStatus lc_trajectory_times(const struct LcTrajectory *tr, double *out, size_t capacity);

/**
 * Consensus error (max pairwise ∞-norm disagreement) per sample.
 *
 * # Safety
 * `tr` must be a live handle; `out` must hold `capacity` doubles.
 */
enum LcStatus lc_trajectory_error(const struct LcTrajectory *tr, double *out, size_t capacity);

/**
 * Agent states at sample `k` as an `m x n` row-major block (one row per agent).
 *
 * # Safety
 * `tr` must be a live handle; `out` must hold `capacity` doubles.
 */
enum LcStatus lc_trajectory_state(const struct LcTrajectory *tr,
                                  size_t k,
                                  double *out,
                                  size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINSYNC_H */

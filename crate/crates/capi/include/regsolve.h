#ifndef REGSOLVE_H
#define REGSOLVE_H

/* Generated by cbindgen from regsolve-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every C-ABI call.
typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_ARGUMENT = 2,
  RS_STATUS_DIMENSION_MISMATCH = 3,
  RS_STATUS_NOT_HERMITIAN = 4,
  RS_STATUS_NUMERICAL_FAILURE = 5,
  RS_STATUS_IO_FAILURE = 6,
  RS_STATUS_PARSE_FAILURE = 7,
  RS_STATUS_UNSUPPORTED = 8,
  RS_STATUS_PANIC = 9,
} RsStatus;

// Opaque dense operator (real or complex).
typedef struct RsOperator RsOperator;

// Opaque generated test problem with its known minimal-norm solution.
typedef struct RsProblem RsProblem;

// Opaque solver trace: per-sample abscissae (step indices or times),
// residuals, optional errors, and the final state.
typedef struct RsTrace RsTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string of the underlying library; static storage, do not free.
const char *rs_version(void);

// Message describing the most recent failure on this thread. The pointer
// stays valid until the next failing call on the same thread; do not free.
const char *rs_last_error_message(void);

// Builds a real dense operator from a row-major buffer.
//
// # Safety
// `data` must point to `rows * cols` doubles; `out` must be a valid pointer.
enum RsStatus rs_operator_dense_real(const double *data,
                                     size_t rows,
                                     size_t cols,
                                     struct RsOperator **out);

// Reads an operator from the matrix text format (`m n field` header).
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid.
enum RsStatus rs_operator_read(const char *path, struct RsOperator **out);

// Writes an operator in the matrix text format.
//
// # Safety
// `op` must be a live handle; `path` a NUL-terminated string.
enum RsStatus rs_operator_write(const struct RsOperator *op, const char *path);

// # Safety
// `op` must be a live handle (or NULL, which reports zero).
size_t rs_operator_rows(const struct RsOperator *op);

// # Safety
// `op` must be a live handle (or NULL, which reports zero).
size_t rs_operator_cols(const struct RsOperator *op);

// # Safety
// `op` must be a live handle (or NULL, which reports false).
bool rs_operator_is_complex(const struct RsOperator *op);

// Releases an operator handle. NULL is ignored.
//
// # Safety
// `op` must have come from this library and not been freed before.
void rs_operator_free(struct RsOperator *op);

// Exact operator norm of the smoothing map `(A*A + shift)^{-1} A*` for a
// real (`imaginary_shift = false`) or imaginary shift, from the singular
// values. Always at most `1/(2 sqrt(a))` resp. `1/sqrt(2a)`.
//
// # Safety
// `op` must be a live handle; `out` a valid pointer.
enum RsStatus rs_operator_smoothing_norm(const struct RsOperator *op,
                                         double a,
                                         bool imaginary_shift,
                                         double *out);

// Minimal-norm least-squares solve through the spectral oracle. `y_out`
// must hold `cols` doubles; `consistency_out` receives `|A y - f|`.
//
// # Safety
// All pointers must be valid; `f` holds `f_len` doubles.
enum RsStatus rs_minimal_norm_solve(const struct RsOperator *op,
                                    const double *f,
                                    size_t f_len,
                                    double *y_out,
                                    size_t y_len,
                                    double *consistency_out);

// Seeded random problem of shape `m x n` and rank `r` with singular values
// log-uniform in [1e-3, 1].
//
// # Safety
// `out` must be a valid pointer.
enum RsStatus rs_problem_rank_deficient(size_t m,
                                        size_t n,
                                        size_t r,
                                        uint64_t seed,
                                        struct RsProblem **out);

// Hilbert matrix problem of size `n`.
//
// # Safety
// `out` must be a valid pointer.
enum RsStatus rs_problem_hilbert(size_t n, struct RsProblem **out);

// Scaled forward-difference problem of size `(n-1) x n`; the operator norm
// grows like `2n`.
//
// # Safety
// `out` must be a valid pointer.
enum RsStatus rs_problem_derivative(size_t n, struct RsProblem **out);

// Seeded real symmetric problem with a one-dimensional kernel.
//
// # Safety
// `out` must be a valid pointer.
enum RsStatus rs_problem_symmetric(size_t n, uint64_t seed, struct RsProblem **out);

// # Safety
// `p` must be a live handle (or NULL, which reports zero).
size_t rs_problem_rows(const struct RsProblem *p);

// # Safety
// `p` must be a live handle (or NULL, which reports zero).
size_t rs_problem_cols(const struct RsProblem *p);

// Copies the right-hand side into `out` (`rows` doubles).
//
// # Safety
// `p` must be a live handle; `out` holds `out_len` doubles.
enum RsStatus rs_problem_rhs(const struct RsProblem *p, double *out, size_t out_len);

// Copies the known minimal-norm solution into `out` (`cols` doubles).
//
// # Safety
// `p` must be a live handle; `out` holds `out_len` doubles.
enum RsStatus rs_problem_solution(const struct RsProblem *p, double *out, size_t out_len);

// Clones the problem's operator into a standalone handle.
//
// # Safety
// `p` must be a live handle; `out` a valid pointer.
enum RsStatus rs_problem_operator(const struct RsProblem *p, struct RsOperator **out);

// Releases a problem handle. NULL is ignored.
//
// # Safety
// `p` must have come from this library and not been freed before.
void rs_problem_free(struct RsProblem *p);

// Perturbs `f` in place-free fashion: writes `f + delta * e` with a seeded
// unit direction `e` into `out` (`len` doubles).
//
// # Safety
// `f` and `out` must hold `len` doubles each.
enum RsStatus rs_add_noise(const double *f, size_t len, double delta, uint64_t seed, double *out);

// Tikhonov minimizer `(A*A + aI)^{-1} A* g`; `out` holds `cols` doubles.
//
// # Safety
// `op` must be a live real-operator handle; buffers must match their lengths.
enum RsStatus rs_tikhonov(const struct RsOperator *op,
                          double a,
                          const double *g,
                          size_t g_len,
                          double *out,
                          size_t out_len);

// Fixed-point iteration from a zero initial guess (which carries no
// null-space component); pass `reference` (length `cols`) to record errors,
// or NULL to skip them.
//
// # Safety
// `op` must be a live real-operator handle; buffers must match their lengths.
enum RsStatus rs_fixed_point(const struct RsOperator *op,
                             double a,
                             const double *f,
                             size_t f_len,
                             size_t max_steps,
                             double tol,
                             const double *reference,
                             size_t reference_len,
                             struct RsTrace **out);

// Imaginary-shift iteration for Hermitian operators. Writes the real part of
// the final iterate into `out` and the norm of its imaginary part into
// `imaginary_norm_out`.
//
// # Safety
// `op` must be a live real-operator handle; buffers must match their lengths.
enum RsStatus rs_selfadjoint(const struct RsOperator *op,
                             double a,
                             const double *f,
                             size_t f_len,
                             size_t max_steps,
                             double tol,
                             double *out,
                             size_t out_len,
                             double *imaginary_norm_out);

// Integrates the continuous regularization flow
// `du/dt = -u + (A*A + eps(t) I)^{-1} A* f` with `eps(t) = eps0 (1+t)^{-p}`
// by fixed-step RK4 from a zero initial state.
//
// # Safety
// `op` must be a live real-operator handle; buffers must match their lengths.
enum RsStatus rs_dsm(const struct RsOperator *op,
                     const double *f,
                     size_t f_len,
                     double eps0,
                     double p,
                     double t_max,
                     double h,
                     struct RsTrace **out);

// Number of recorded samples.
//
// # Safety
// `t` must be a live handle (or NULL, which reports zero).
size_t rs_trace_len(const struct RsTrace *t);

// Length of the final state vector.
//
// # Safety
// `t` must be a live handle (or NULL, which reports zero).
size_t rs_trace_state_len(const struct RsTrace *t);

// Whether the successive-difference tolerance was met before the step cap.
//
// # Safety
// `t` must be a live handle (or NULL, which reports false).
bool rs_trace_converged(const struct RsTrace *t);

// Copies step indices (or times) into `out` (`rs_trace_len` doubles).
//
// # Safety
// `t` must be a live handle; `out` holds `out_len` doubles.
enum RsStatus rs_trace_abscissae(const struct RsTrace *t, double *out, size_t out_len);

// Copies residuals into `out` (`rs_trace_len` doubles).
//
// # Safety
// `t` must be a live handle; `out` holds `out_len` doubles.
enum RsStatus rs_trace_residuals(const struct RsTrace *t, double *out, size_t out_len);

// Copies errors against the reference into `out`; fails with
// `RS_STATUS_UNSUPPORTED` when the run recorded none.
//
// # Safety
// `t` must be a live handle; `out` holds `out_len` doubles.
enum RsStatus rs_trace_errors(const struct RsTrace *t, double *out, size_t out_len);

// Copies the final state into `out` (`rs_trace_state_len` doubles).
//
// # Safety
// `t` must be a live handle; `out` holds `out_len` doubles.
enum RsStatus rs_trace_final_state(const struct RsTrace *t, double *out, size_t out_len);

// Releases a trace handle. NULL is ignored.
//
// # Safety
// `t` must have come from this library and not been freed before.
void rs_trace_free(struct RsTrace *t);

// Schedule-based stopping index `ceil(c * delta^(-gamma))`.
//
// # Safety
// `out` must be a valid pointer.
enum RsStatus rs_stopping_index(double delta, double gamma, double c, size_t *out);

// First trace index whose residual falls to `c * delta`; `reached_out`
// reports whether the threshold was crossed at all.
//
// # Safety
// `t` must be a live handle; out pointers must be valid.
enum RsStatus rs_discrepancy_stop(const struct RsTrace *t,
                                  double delta,
                                  double c,
                                  size_t *index_out,
                                  bool *reached_out);

// Writes a trace as `step_or_time,error,residual` CSV.
//
// # Safety
// `t` must be a live handle; `path` a NUL-terminated string.
enum RsStatus rs_trace_write_csv(const struct RsTrace *t, const char *path);

// Runs the named invariant suites; sets `passed_out` and returns OK unless
// the suite itself could not run. Takes tens of seconds.
//
// # Safety
// `passed_out` must be a valid pointer.
enum RsStatus rs_verify(bool *passed_out);

// Writes a problem bundle (`A.txt`, `f.txt`, `y.txt`, `problem.json`) into a
// directory, optionally with noisy data.
//
// # Safety
// `p` must be a live handle; `dir` a NUL-terminated string.
enum RsStatus rs_problem_export(const struct RsProblem *p,
                                const char *dir,
                                double delta,
                                uint64_t seed);

// Reads a vector file and copies it into `out`; `len_out` receives the
// length. Call with `out = NULL` first to query the length.
//
// # Safety
// `path` must be a NUL-terminated string; `len_out` valid; `out` either NULL
// or `out_len` doubles.
enum RsStatus rs_vector_read(const char *path, double *out, size_t out_len, size_t *len_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGSOLVE_H */

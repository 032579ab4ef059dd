#ifndef VARACTOR_H
#define VARACTOR_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VaStatus {
  VA_STATUS_OK = 0,
  VA_STATUS_NULL_POINTER = 1,
  VA_STATUS_INVALID_ARGUMENT = 2,
  VA_STATUS_DIMENSION_MISMATCH = 3,
  VA_STATUS_RESONANCE = 4,
  VA_STATUS_BUDGET_EXCEEDED = 5,
  VA_STATUS_NO_ROOT = 6,
  VA_STATUS_DEGENERATE_ROOT = 7,
  VA_STATUS_INVALID_PROBLEM = 8,
  VA_STATUS_PROPAGATOR_POLE = 9,
  VA_STATUS_DIVERGENCE = 10,
  VA_STATUS_PADE_DEGENERATE = 11,
  VA_STATUS_POLE_ON_PATH = 12,
  VA_STATUS_LAPLACE_DOMAIN = 13,
  VA_STATUS_TREE_BUDGET = 14,
  VA_STATUS_ESCAPE = 15,
  VA_STATUS_STEP_UNDERFLOW = 16,
  VA_STATUS_NEWTON_FAILED = 17,
  VA_STATUS_ZERO_MOMENTUM = 18,
  VA_STATUS_SINGULAR_PROPAGATOR = 19,
  VA_STATUS_PRECONDITION = 20,
  VA_STATUS_PANIC = 99,
} VaStatus;

typedef enum VaNonlinearity {
  VA_NONLINEARITY_QUADRATIC = 0,
  VA_NONLINEARITY_LINEAR = 1,
} VaNonlinearity;

typedef enum VaExpansionKind {
  VA_EXPANSION_KIND_FORMAL = 0,
  VA_EXPANSION_KIND_RESUMMED = 1,
} VaExpansionKind;

typedef enum VaPrecision {
  VA_PRECISION_DOUBLE = 0,
  VA_PRECISION_EXTENDED = 1,
} VaPrecision;

/**
 * Borel–Padé–Laplace sum of the formal series.
 */
typedef struct VaBorel VaBorel;

/**
 * Computed orders x^(k) (formal) or x^[k] (resummed).
 */
typedef struct VaExpansion VaExpansion;

/**
 * Problem definition: forcing, frequencies, nonlinearity and ε.
 */
typedef struct VaProblem VaProblem;

typedef struct VaOrbit {
  double x0;
  double v0;
  double period;
  double multiplier_re[2];
  double multiplier_im[2];
  double residual;
  uint32_t iterations;
} VaOrbit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *va_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *va_version(void);

/**
 * εẍ + ẋ + εx² = ε(α + β sin ωt).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum VaStatus va_problem_new_periodic(double alpha,
                                      double beta,
                                      double omega,
                                      double eps,
                                      struct VaProblem **out);

/**
 * General problem. `modes` holds `n_terms * dim` integers (row per term) and
 * `re`/`im` the coefficients f_ν of one half of the spectrum; the conjugate
 * half is implied. C₀ is certified by scanning |ν| ≤ `scan_radius`.
 *
 * # Safety
 * `omega` must point to `dim` doubles, `modes` to `n_terms * dim` ints, `re` and
 * `im` to `n_terms` doubles each, and `out` to writable storage for a handle.
 */
enum VaStatus va_problem_new(size_t dim,
                             const double *omega,
                             size_t n_terms,
                             const int32_t *modes,
                             const double *re,
                             const double *im,
                             double eps_re,
                             double eps_im,
                             double tau,
                             uint32_t scan_radius,
                             enum VaNonlinearity nonlinearity,
                             struct VaProblem **out);

/**
 * # Safety
 * `p` must be NULL or a handle from `va_problem_new*` not yet freed.
 */
void va_problem_free(struct VaProblem *p);

/**
 * # Safety
 * `p` must be a live problem handle and `out` writable.
 */
enum VaStatus va_problem_c0(const struct VaProblem *p, double *out);

/**
 * Orders 0…`order` of the formal or resummed series.
 *
 * # Safety
 * `p` must be a live problem handle and `out` writable.
 */
enum VaStatus va_expansion_new(const struct VaProblem *p,
                               enum VaExpansionKind kind,
                               size_t order,
                               struct VaExpansion **out);

/**
 * # Safety
 * `e` must be NULL or a handle from `va_expansion_new` not yet freed.
 */
void va_expansion_free(struct VaExpansion *e);

/**
 * # Safety
 * `e` must be a live expansion handle and `out` writable.
 */
enum VaStatus va_expansion_max_order(const struct VaExpansion *e, size_t *out);

/**
 * Constant c_k.
 *
 * # Safety
 * `e` must be a live expansion handle and `out` writable.
 */
enum VaStatus va_expansion_constant(const struct VaExpansion *e, size_t k, double *out);

/**
 * Fourier coefficient of order `k` at the mode `nu[0..dim]`.
 *
 * # Safety
 * `e` must be a live expansion handle, `nu` must point to `dim` ints, and
 * `re`/`im` must be writable.
 */
enum VaStatus va_expansion_coeff(const struct VaExpansion *e,
                                 size_t k,
                                 const int32_t *nu,
                                 size_t dim,
                                 double *re,
                                 double *im);

/**
 * x(t) = Σ μᵏ x^(k)(t) with a geometric tail estimate.
 *
 * # Safety
 * `e` must be a live expansion handle; `value` and `error` must be writable.
 */
enum VaStatus va_expansion_evaluate(const struct VaExpansion *e,
                                    double t,
                                    double mu,
                                    double *value,
                                    double *error);

/**
 * Sup norm of the equation residual of the full partial sum.
 *
 * # Safety
 * `e` must be a live expansion handle and `out` writable.
 */
enum VaStatus va_expansion_residual(const struct VaExpansion *e, double *out);

/**
 * Borel–Padé–Laplace sum of the formal series with orders 0…`order`.
 *
 * # Safety
 * `p` must be a live problem handle and `out` writable.
 */
enum VaStatus va_borel_new(const struct VaProblem *p,
                           size_t order,
                           enum VaPrecision precision,
                           struct VaBorel **out);

/**
 * # Safety
 * `b` must be NULL or a handle from `va_borel_new` not yet freed.
 */
void va_borel_free(struct VaBorel *b);

/**
 * Value at time `t` together with the sup-norm error bound.
 *
 * # Safety
 * `b` and `p` must be live handles (the problem the sum was built from);
 * `value` and `error` must be writable.
 */
enum VaStatus va_borel_evaluate(const struct VaBorel *b,
                                const struct VaProblem *p,
                                double t,
                                double *value,
                                double *error);

/**
 * Periodic orbit by Newton shooting on the stroboscopic map.
 *
 * # Safety
 * `p` must be a live problem handle and `out` writable.
 */
enum VaStatus va_orbit_find(const struct VaProblem *p, double tol, struct VaOrbit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VARACTOR_H */

#ifndef SPINLAB_H
#define SPINLAB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum SpinlabDynamicsKind {
  SPINLAB_DYNAMICS_KIND_GLAUBER = 0,
  SPINLAB_DYNAMICS_KIND_BLOCK = 1,
  SPINLAB_DYNAMICS_KIND_FIELD = 2,
  SPINLAB_DYNAMICS_KIND_PROJECTED_BLOCK = 3,
} SpinlabDynamicsKind;

typedef enum SpinlabStatus {
  SPINLAB_STATUS_OK = 0,
  SPINLAB_STATUS_NULL_POINTER = 1,
  SPINLAB_STATUS_INVALID_ARGUMENT = 2,
  SPINLAB_STATUS_INFEASIBLE = 3,
  SPINLAB_STATUS_CAP_EXCEEDED = 4,
  SPINLAB_STATUS_NUMERIC = 5,
  SPINLAB_STATUS_PANIC = 6,
} SpinlabStatus;

/**
 * A running Markov chain with its own random stream.
 */
typedef struct SpinlabChain SpinlabChain;

/**
 * A two-spin system on a graph.
 */
typedef struct SpinlabSystem SpinlabSystem;

/**
 * Chain selector. `theta` is read by field dynamics, `ell` by block and
 * projected block dynamics, `k` by projected block dynamics.
 */
typedef struct SpinlabDynamics {
  enum SpinlabDynamicsKind kind;
  double theta;
  size_t ell;
  size_t k;
} SpinlabDynamics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, or 0 if none.
 */
size_t spinlab_last_error_message(char *buf, size_t len);

/**
 * Static version string.
 */
const char *spinlab_version(void);

/**
 * Builds a system with a uniform field. `edges` holds `2 * m` vertex
 * indices.
 */
enum SpinlabStatus spinlab_system_new(size_t n,
                                      const uint32_t *edges,
                                      size_t m,
                                      double beta,
                                      double gamma,
                                      double lambda,
                                      struct SpinlabSystem **out);

/**
 * Builds a system with per-vertex fields (`n` values).
 */
enum SpinlabStatus spinlab_system_new_with_fields(size_t n,
                                                  const uint32_t *edges,
                                                  size_t m,
                                                  double beta,
                                                  double gamma,
                                                  const double *fields,
                                                  struct SpinlabSystem **out);

void spinlab_system_free(struct SpinlabSystem *sys);

size_t spinlab_system_num_vertices(const struct SpinlabSystem *sys);

/**
 * Exact `Pr[σ_v = +1]`.
 */
enum SpinlabStatus spinlab_marginal(const struct SpinlabSystem *sys, size_t v, double *out);

/**
 * Exact spectral gap `1 − λ₂` of the chosen chain.
 */
enum SpinlabStatus spinlab_spectral_gap(const struct SpinlabSystem *sys,
                                        struct SpinlabDynamics dynamics,
                                        double *out);

/**
 * Starts a chain. `start` holds `n` spins in `{−1, +1}`; null starts from
 * all `−1`.
 */
enum SpinlabStatus spinlab_chain_new(const struct SpinlabSystem *sys,
                                     struct SpinlabDynamics dynamics,
                                     uint64_t seed,
                                     const int8_t *start,
                                     struct SpinlabChain **out);

void spinlab_chain_free(struct SpinlabChain *chain);

/**
 * Advances the chain by `steps` transitions.
 */
enum SpinlabStatus spinlab_chain_step(struct SpinlabChain *chain, uint64_t steps);

/**
 * Copies the current spins into `buf`, which must hold `len >= n` values.
 */
enum SpinlabStatus spinlab_chain_config(const struct SpinlabChain *chain, int8_t *buf, size_t len);

uint64_t spinlab_chain_steps(const struct SpinlabChain *chain);

/**
 * Fixed point of `x ↦ λ((βx+1)/(x+γ))^d`.
 */
enum SpinlabStatus spinlab_fixed_point(double beta,
                                       double gamma,
                                       double lambda,
                                       size_t d,
                                       double *out);

/**
 * Decay rate `f_d` at the fixed point.
 */
enum SpinlabStatus spinlab_decay_at_fixed_point(double beta,
                                                double gamma,
                                                double lambda,
                                                size_t d,
                                                double *out);

/**
 * Hardcore uniqueness threshold for maximum degree `delta_max >= 3`.
 */
enum SpinlabStatus spinlab_lambda_c(size_t delta_max, double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SPINLAB_H */

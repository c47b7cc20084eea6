#ifndef ALF_ENTROPY_H
#define ALF_ENTROPY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AlfStatus {
  ALF_STATUS_OK = 0,
  ALF_STATUS_NULL_POINTER = 1,
  ALF_STATUS_INVALID_ARGUMENT = 2,
  ALF_STATUS_DIMENSION_MISMATCH = 3,
  ALF_STATUS_CAP_EXCEEDED = 4,
  ALF_STATUS_VALIDATION = 5,
  ALF_STATUS_NOT_ERGODIC = 6,
  ALF_STATUS_IO = 7,
  ALF_STATUS_INTERNAL = 8,
} AlfStatus;

// Markov chain of the gauge-invariant Fermion partition on `M` sites.
typedef struct AlfChain AlfChain;

// Product state of one site state on a spin chain, with the Fourier partition.
typedef struct AlfSpinSystem AlfSpinSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *alf_last_error(void);

// Von Neumann entropy (natural log) of a `dim x dim` density matrix given
// row-major as interleaved `(re, im)` pairs, `2 * dim * dim` doubles.
//
// # Safety
// `re_im` must point to `2 * dim * dim` readable doubles and `out` to a
// writable double.
enum AlfStatus alf_von_neumann_entropy(const double *re_im, size_t dim, double *out);

// `(2 - 1/M) ln 2`.
//
// # Safety
// `out` must point to a writable double.
enum AlfStatus alf_closed_form_rate(size_t m, double *out);

// Builds the fine chain (`coarse = false`) or its lumped quotient.
//
// # Safety
// `out` must point to a writable handle slot.
enum AlfStatus alf_chain_new(size_t m, bool coarse, struct AlfChain **out);

// # Safety
// `chain` must be null or a live handle from [`alf_chain_new`].
void alf_chain_free(struct AlfChain *chain);

// # Safety
// `chain` must be a live handle and `out` writable.
enum AlfStatus alf_chain_state_count(const struct AlfChain *chain, size_t *out);

// Entropy rate `-Σ μ∞(a) P_ab ln P_ab`.
//
// # Safety
// `chain` must be a live handle and `out` writable.
enum AlfStatus alf_chain_entropy_rate(const struct AlfChain *chain, double *out);

// Path entropy of the first `n_steps + 1` states.
//
// # Safety
// `chain` must be a live handle and `out` writable.
enum AlfStatus alf_chain_finite_entropy(const struct AlfChain *chain, size_t n_steps, double *out);

// Site state `diag(spectrum)` with `d` levels.
//
// # Safety
// `spectrum` must point to `d` readable doubles and `out` to a writable
// handle slot.
enum AlfStatus alf_spin_new(const double *spectrum, size_t d, struct AlfSpinSystem **out);

// # Safety
// `sys` must be null or a live handle from [`alf_spin_new`].
void alf_spin_free(struct AlfSpinSystem *sys);

// `S(ρ_N)` of the `N`-step Fourier refinement, under the default caps.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum AlfStatus alf_spin_refined_entropy(const struct AlfSpinSystem *sys,
                                        size_t n_steps,
                                        double *out);

// Closed form `(N-1)(ln d + S(σ))` of the reduced refined entropy, `N >= 2`.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum AlfStatus alf_spin_reduced_entropy(const struct AlfSpinSystem *sys,
                                        size_t n_steps,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALF_ENTROPY_H */

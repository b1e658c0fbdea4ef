/*
 * C interface to the ckks-faultlab pipeline.
 *
 * Usage pattern:
 *
 *   FaultlabContext *ctx = NULL;
 *   if (faultlab_context_new(8, 1ull << 40, 3, 59, 3.2,
 *                            FAULTLAB_BACKEND_RNS_NTT, 42, &ctx) != FAULTLAB_OK) {
 *       fprintf(stderr, "%s\n", faultlab_last_error_message());
 *       return 1;
 *   }
 *   uint32_t outcome; double l2;
 *   faultlab_inject(ctx, FAULTLAB_TARGET_C0, FAULTLAB_REPR_RNS_LIMB,
 *                   0, 1, 58, 2.0, &outcome, &l2, NULL);
 *   printf("%s l2=%g\n", faultlab_outcome_name(outcome), l2);
 *   faultlab_context_free(ctx);
 *
 * Every function returns a FaultlabStatus; out parameters are written only
 * on FAULTLAB_OK. Failure details are readable per thread via
 * faultlab_last_error_message() until the next failing call on that thread.
 * All strings returned by this library are static or thread-local and must
 * not be freed.
 */

#ifndef CKKS_FAULTLAB_H
#define CKKS_FAULTLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Opaque pipeline handle; create with faultlab_context_new, release with
 * faultlab_context_free. A context is immutable after creation and may be
 * shared between threads for concurrent faultlab_inject calls. */
typedef struct FaultlabContext FaultlabContext;

/* Status code returned by every entry point. */
enum
#ifdef __cplusplus
    FaultlabStatus : uint32_t
#else
    FaultlabStatus
#endif
{
  /* Success; out parameters are valid. */
  FAULTLAB_OK = 0,
  /* A required pointer argument was null. */
  FAULTLAB_NULL_ARGUMENT = 1,
  /* Parameters or fault address rejected by validation. */
  FAULTLAB_INVALID_ARGUMENT = 2,
  /* A panic was caught at the boundary — a bug, not a usage error. */
  FAULTLAB_INTERNAL_ERROR = 3,
};
#ifndef __cplusplus
typedef uint32_t FaultlabStatus;
#endif

/* Classification values written to out_outcome by faultlab_inject. */
#define FAULTLAB_OUTCOME_BENIGN 0
#define FAULTLAB_OUTCOME_SDC 1
#define FAULTLAB_OUTCOME_DETECTED 2

/* Backend selectors for faultlab_context_new. */
#define FAULTLAB_BACKEND_TEXTBOOK 0
#define FAULTLAB_BACKEND_RNS_NTT 1

/* Fault targets: the encoded plaintext or either ciphertext half. */
#define FAULTLAB_TARGET_PLAINTEXT 0
#define FAULTLAB_TARGET_C0 1
#define FAULTLAB_TARGET_C1 2

/* Word representations a fault can address. BIG addresses the textbook
 * backend's arbitrary-precision coefficients; RNS_LIMB and NTT_LIMB address
 * one residue word of the RNS+NTT backend, in coefficient resp. transform
 * order. */
#define FAULTLAB_REPR_BIG 0
#define FAULTLAB_REPR_RNS_LIMB 1
#define FAULTLAB_REPR_NTT_LIMB 2

/* The conventional BENIGN threshold: errors within this multiple of the
 * fault-free baseline are classified BENIGN. */
#define FAULTLAB_DEFAULT_TAU_BENIGN 2.0

/*
 * Message describing the most recent failure on the calling thread. The
 * pointer stays valid until the next failing call on the same thread; before
 * any failure it points at an empty string. Never null.
 */
const char *faultlab_last_error_message(void);

/* Library version as a static string. Never null. */
const char *faultlab_version(void);

/* Static name for a status code; unknown codes yield "UNKNOWN". */
const char *faultlab_status_name(uint32_t status);

/* Static name for an outcome code; unknown codes yield "UNKNOWN". */
const char *faultlab_outcome_name(uint32_t outcome);

/*
 * Builds a pipeline context and runs the fault-free pipeline once: the ramp
 * message over n/2 slots is encoded, encrypted, decrypted and decoded under
 * `seed`, and the recovery is kept as the baseline every later injection is
 * classified against.
 *
 * n      ring dimension, a power of two >= 2;
 * delta  scale factor, a power of two >= 2 (desk scale: 1ull << 40);
 * levels number of primes in the modulus chain (desk scale: 3);
 * prime_bits  bit width of each chain prime (desk scale: 59);
 * sigma  noise standard deviation (desk scale: 3.2);
 * backend     FAULTLAB_BACKEND_TEXTBOOK or FAULTLAB_BACKEND_RNS_NTT;
 * seed   drives every random draw; equal seeds reproduce bit-identically.
 *
 * On FAULTLAB_OK, *out_context owns the context; release it with
 * faultlab_context_free.
 */
FaultlabStatus faultlab_context_new(size_t n,
                                    uint64_t delta,
                                    size_t levels,
                                    uint32_t prime_bits,
                                    double sigma,
                                    uint32_t backend,
                                    uint64_t seed,
                                    FaultlabContext **out_context);

/* Frees a context returned by faultlab_context_new. Null is a no-op. The
 * pointer must not be used afterwards. */
void faultlab_context_free(FaultlabContext *context);

/*
 * Reports the fault-free recovery error: L2 distance and worst single-slot
 * distance between the decoded message and what was encoded. Either out
 * pointer may be null to skip that value.
 */
FaultlabStatus faultlab_baseline(const FaultlabContext *context,
                                 double *out_l2_error,
                                 double *out_max_slot_error);

/*
 * Re-runs the pipeline under the context's seed with exactly one bit XORed
 * and classifies the result.
 *
 * target, representation  FAULTLAB_TARGET_* / FAULTLAB_REPR_* constants;
 * limb         residue-word index for the limb representations, ignored for
 *              FAULTLAB_REPR_BIG;
 * coeff_index  coefficient to hit, < n;
 * bit_index    bit to XOR: < 64 for limb words, below the modulus bit width
 *              for FAULTLAB_REPR_BIG;
 * tau_benign   BENIGN threshold as a multiple of the baseline L2 error.
 *
 * A plaintext target flips after encoding, a ciphertext target after
 * encryption. On FAULTLAB_OK, *out_outcome holds a FAULTLAB_OUTCOME_* value;
 * the optional error outputs hold the L2 distance of the faulted recovery
 * from the original message resp. from the fault-free recovery, both +inf
 * when the fault was DETECTED and there is no recovery. Addresses that do
 * not exist (wrong backend, limb or bit out of range) come back as
 * FAULTLAB_INVALID_ARGUMENT.
 */
FaultlabStatus faultlab_inject(const FaultlabContext *context,
                               uint32_t target,
                               uint32_t representation,
                               uint32_t limb,
                               uint64_t coeff_index,
                               uint32_t bit_index,
                               double tau_benign,
                               uint32_t *out_outcome,
                               double *out_l2_error,
                               double *out_l2_vs_baseline);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CKKS_FAULTLAB_H */

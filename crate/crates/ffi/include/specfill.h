#ifndef SPECFILL_H
#define SPECFILL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpecfillStatus {
  SPECFILL_STATUS_OK = 0,
  SPECFILL_STATUS_NULL_POINTER = 1,
  SPECFILL_STATUS_INVALID_ARGUMENT = 2,
  SPECFILL_STATUS_PROCESS = 3,
  SPECFILL_STATUS_FILLING = 4,
  SPECFILL_STATUS_SPECTRA = 5,
  SPECFILL_STATUS_VERIFY = 6,
  SPECFILL_STATUS_PANIC = 7,
} SpecfillStatus;

typedef enum SpecfillFillingKind {
  SPECFILL_FILLING_KIND_DIAGONAL = 0,
  SPECFILL_FILLING_KIND_ROW_WISE = 1,
} SpecfillFillingKind;

// A filling bijection of fixed dimension.
typedef struct SpecfillFilling SpecfillFilling;

// A process generator together with its exact moment oracle.
typedef struct SpecfillProcess SpecfillProcess;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *specfill_last_error(void);

// Builds a process from its JSON description, e.g.
// `{"kind": "binary", "p": 0.7}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum SpecfillStatus specfill_process_from_json(const char *json, struct SpecfillProcess **out);

// Binary chain with stay probability `p`.
//
// # Safety
// `out` must be a valid pointer.
enum SpecfillStatus specfill_process_binary(double p, struct SpecfillProcess **out);

// # Safety
// `process` must come from a `specfill_process_*` constructor and not be
// freed twice. NULL is ignored.
void specfill_process_free(struct SpecfillProcess *process);

// Exact `E[Z_{i_1} .. Z_{i_k}]`. Indices may be given in any order.
//
// # Safety
// `indices` must point to `len` readable values (or be NULL with `len` 0).
enum SpecfillStatus specfill_process_mixed_moment(const struct SpecfillProcess *process,
                                                  const uint64_t *indices,
                                                  size_t len,
                                                  double *out);

// Writes a path `Z_1..Z_len` drawn from `seed` into `out`.
//
// # Safety
// `out` must point to `len` writable values.
enum SpecfillStatus specfill_process_sample(const struct SpecfillProcess *process,
                                            size_t len,
                                            uint64_t seed,
                                            double *out);

// # Safety
// `out` must be a valid pointer.
enum SpecfillStatus specfill_filling_new(enum SpecfillFillingKind kind,
                                         size_t n,
                                         struct SpecfillFilling **out);

// Loads a custom table of `m i j` lines.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SpecfillStatus specfill_filling_load(const char *path, struct SpecfillFilling **out);

// # Safety
// `filling` must come from a `specfill_filling_*` constructor and not be
// freed twice. NULL is ignored.
void specfill_filling_free(struct SpecfillFilling *filling);

// Dimension `N` of the filling.
//
// # Safety
// `filling` must be a live handle or NULL (which yields 0).
size_t specfill_filling_dimension(const struct SpecfillFilling *filling);

// Cell `(i, j)`, 1-based with `i <= j`, receiving `Z_m`.
//
// # Safety
// `i` and `j` must be valid pointers.
enum SpecfillStatus specfill_filling_phi(const struct SpecfillFilling *filling,
                                         uint64_t m,
                                         size_t *i,
                                         size_t *j);

// Index `m` of the 1-based cell `(i, j)`; either orientation is accepted.
//
// # Safety
// `out` must be a valid pointer.
enum SpecfillStatus specfill_filling_phi_inv(const struct SpecfillFilling *filling,
                                             size_t i,
                                             size_t j,
                                             uint64_t *out);

// `J`: the number of neighbouring indices `m, m + 1` landing in the same
// row or column.
//
// # Safety
// `out` must be a valid pointer.
enum SpecfillStatus specfill_filling_neighbor_count(const struct SpecfillFilling *filling,
                                                    uint64_t *out);

// Samples one matrix and writes its `N` ascending eigenvalues to `out`.
//
// # Safety
// `out` must point to `len` writable values; `len` must equal `N`.
enum SpecfillStatus specfill_sample_eigenvalues(const struct SpecfillProcess *process,
                                                const struct SpecfillFilling *filling,
                                                uint64_t seed,
                                                double *out,
                                                size_t len);

// Exact `E[(1/N) tr A^k]` by closed-path enumeration (`N^k <= 1e8`).
//
// # Safety
// `out` must be a valid pointer.
enum SpecfillStatus specfill_expected_trace_moment(const struct SpecfillProcess *process,
                                                   const struct SpecfillFilling *filling,
                                                   uint32_t k,
                                                   double *out);

// Catalan number `C_k`, `k <= 30`.
//
// # Safety
// `out` must be a valid pointer.
enum SpecfillStatus specfill_catalan(uint32_t k, uint64_t *out);

double specfill_semicircle_density(double x);

double specfill_semicircle_cdf(double x);

uint64_t specfill_seed_for_trial(uint64_t base, uint64_t trial);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECFILL_H */

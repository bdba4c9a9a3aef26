#ifndef ACGCL_H
#define ACGCL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Form of the classical space.
 */
typedef enum AcgCase {
  ACG_CASE_SYMPLECTIC = 0,
  ACG_CASE_UNITARY = 1,
  ACG_CASE_ORTHOGONAL = 2,
} AcgCase;

/**
 * Status codes.
 */
typedef enum AcgStatus {
  ACG_STATUS_OK = 0,
  ACG_STATUS_NULL_POINTER = 1,
  ACG_STATUS_INVALID_ARGUMENT = 2,
  ACG_STATUS_UNSUPPORTED = 3,
  ACG_STATUS_BOUND_EXCEEDED = 4,
  ACG_STATUS_INTERNAL = 5,
  ACG_STATUS_PANIC = 6,
} AcgStatus;

/**
 * Opaque handle to a classical affine space and its maximal flats.
 */
typedef struct AcgSpace AcgSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds the space of the given form over `F_q` in dimension `2ν`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum AcgStatus acg_space_new(enum AcgCase form, uint32_t q, uint32_t nu, struct AcgSpace **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `space` must come from [`acg_space_new`] and not be used afterwards.
 */
void acg_space_free(struct AcgSpace *space);

/**
 * Number of points `q^{2ν}`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AcgStatus acg_space_num_points(const struct AcgSpace *space, uint64_t *out);

/**
 * Number of maximal totally isotropic flats.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AcgStatus acg_space_num_flats(const struct AcgSpace *space, uint64_t *out);

/**
 * Closed-form number of `(m,0)`-flats.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AcgStatus acg_space_flat_count(const struct AcgSpace *space, uint32_t m, uint64_t *out);

/**
 * Exact rank of the point–flat incidence matrix.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AcgStatus acg_space_incidence_rank(const struct AcgSpace *space, uint64_t *out);

/**
 * Whether the flats `ids[0..len]` form a Cameron-Liebler set.
 *
 * # Safety
 * `ids` must point to `len` readable values (or be null with `len == 0`).
 */
enum AcgStatus acg_cl_test(const struct AcgSpace *space,
                           const uint64_t *ids,
                           uintptr_t len,
                           bool *out);

/**
 * Parameters and counts as JSON; free with [`acg_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum AcgStatus acg_space_info_json(const struct AcgSpace *space, char **out);

/**
 * Eigenmatrices, valencies and multiplicities as JSON; free with [`acg_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum AcgStatus acg_scheme_tables_json(const struct AcgSpace *space, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void acg_string_free(char *s);

/**
 * Message of the last failure on this thread; valid until the next call that fails.
 */
const char *acg_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACGCL_H */

#ifndef TPSLAB_H
#define TPSLAB_H

/* C interface to libtpslab. Complex arrays are interleaved (re, im) doubles;
 * operators are row-major. Every call that can fail returns a tpslab_status
 * and leaves a message retrievable with tpslab_last_error() on the calling
 * thread. */

#include <stddef.h>

#if defined(TPSLAB_BUILDING_LIBRARY)
#define TPSLAB_API __attribute__((visibility("default")))
#else
#define TPSLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tpslab_status {
  TPSLAB_OK = 0,
  TPSLAB_ERR_INVALID_ARGUMENT = 1,
  TPSLAB_ERR_DIMENSION_MISMATCH = 2,
  TPSLAB_ERR_NOT_HERMITIAN = 3,
  TPSLAB_ERR_NOT_UNITARY = 4,
  TPSLAB_ERR_NOT_ORTHONORMAL = 5,
  TPSLAB_ERR_DEGENERATE_LABELS = 6,
  TPSLAB_ERR_NON_COMMUTING = 7,
  TPSLAB_ERR_GRID_INCOMPATIBLE = 8,
  TPSLAB_ERR_CONFIG = 9,
  TPSLAB_ERR_NUMERICAL_GUARD = 10,
  TPSLAB_ERR_IO = 11,
  TPSLAB_ERR_INTERNAL = 12
} tpslab_status;

typedef struct tpslab_state tpslab_state;
typedef struct tpslab_operator tpslab_operator;
typedef struct tpslab_tps tpslab_tps;

TPSLAB_API const char* tpslab_version(void);
/* Message of the last failed call on this thread, "" if none. */
TPSLAB_API const char* tpslab_last_error(void);
TPSLAB_API const char* tpslab_status_name(tpslab_status status);

/* Unit-norm state over subsystems dims[0..n_dims). */
TPSLAB_API tpslab_status tpslab_state_create(const double* amplitudes, size_t n_amplitudes, const size_t* dims,
                                             size_t n_dims, tpslab_state** out);
TPSLAB_API void tpslab_state_destroy(tpslab_state* state);

/* dim x dim operator; dims must multiply to dim. */
TPSLAB_API tpslab_status tpslab_operator_create(const double* entries, size_t dim, const size_t* dims, size_t n_dims,
                                                tpslab_operator** out);
TPSLAB_API void tpslab_operator_destroy(tpslab_operator* op);

TPSLAB_API tpslab_status tpslab_tps_standard(const size_t* factor_dims, size_t n_factors, tpslab_tps** out);
/* `basis` holds dim orthonormal vectors back to back, in mixed-radix order of
 * factor_dims. */
TPSLAB_API tpslab_status tpslab_tps_from_basis(const double* basis, size_t dim, const size_t* factor_dims,
                                               size_t n_factors, tpslab_tps** out);
/* Two-qubit subsystem TPS and the TPS adapted to the Bell basis. */
TPSLAB_API tpslab_status tpslab_tps_qubit_ab(tpslab_tps** out);
TPSLAB_API tpslab_status tpslab_tps_qubit_pq(tpslab_tps** out);
TPSLAB_API void tpslab_tps_destroy(tpslab_tps* tps);

/* Schmidt coefficients across the cut with subsystems left[0..n_left) on the
 * left. Writes min(capacity, total) values, descending; *count gets the
 * total. */
TPSLAB_API tpslab_status tpslab_schmidt_coefficients(const tpslab_state* state, const size_t* left, size_t n_left,
                                                     double* out, size_t capacity, size_t* count);
/* Entropy in bits relative to `tps`; NULL means the state's own subsystems. */
TPSLAB_API tpslab_status tpslab_entanglement_entropy(const tpslab_state* state, const tpslab_tps* tps,
                                                     const size_t* left, size_t n_left, double* bits);
TPSLAB_API tpslab_status tpslab_is_local_unitary(const tpslab_operator* u, const tpslab_tps* tps, const size_t* left,
                                                 size_t n_left, int* is_local, size_t* operator_rank,
                                                 double* residual);
TPSLAB_API tpslab_status tpslab_is_sum_local(const tpslab_operator* h, const tpslab_tps* tps, const size_t* left,
                                             size_t n_left, int* is_split, double* residual);

/* Diagnostics as "location: message" lines, one per violated invariant. */
TPSLAB_API tpslab_status tpslab_validate_config(const char* path, size_t* n_diagnostics, char** report);
/* Runs the suite and writes the result document. *exit_code follows the
 * command-line contract; *report is a human-readable summary. Either
 * override may be NULL. */
TPSLAB_API tpslab_status tpslab_run_config(const char* path, const char* output_override,
                                           const char* format_override, int* exit_code, char** report);
TPSLAB_API void tpslab_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

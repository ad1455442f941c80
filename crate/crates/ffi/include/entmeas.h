#ifndef ENTMEAS_H
#define ENTMEAS_H

#include <stdbool.h>
#include <stddef.h>

typedef enum EmStatus {
  EM_STATUS_OK = 0,
  EM_STATUS_NULL_POINTER = 1,
  EM_STATUS_INVALID_ARGUMENT = 2,
  EM_STATUS_NOT_POSITIVE = 3,
  EM_STATUS_DIMENSION_MISMATCH = 4,
  EM_STATUS_BUFFER_TOO_SMALL = 5,
  EM_STATUS_INTERNAL = 6,
  EM_STATUS_PANIC = 7,
} EmStatus;

/**
 * Opaque entanglement matrix.
 */
typedef struct EmEntanglementMatrix EmEntanglementMatrix;

/**
 * Opaque unitary gate with its subsystem layout.
 */
typedef struct EmGate EmGate;

typedef struct EmComplex {
  double re;
  double im;
} EmComplex;

/**
 * Entropies in bits; see `entmeas::infomeasures::InfoReport`.
 */
typedef struct EmInfoReport {
  double s_red;
  double s_d;
  double s_b;
  double s_ab;
  double i_c_formula;
  double i_c_general;
} EmInfoReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *em_version(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next `em_*` call on the same thread.
 */
const char *em_last_error_message(void);

/**
 * Two-level entanglement matrix whose realized microstates have overlap `q`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum EmStatus em_entanglement_matrix_from_q(double re,
                                            double im,
                                            struct EmEntanglementMatrix **out);

/**
 * Entanglement matrix from `d * d` row-major entries.
 *
 * # Safety
 * `entries` must point to `d * d` values and `out` to storage for one handle.
 */
enum EmStatus em_entanglement_matrix_new(size_t d,
                                         const struct EmComplex *entries,
                                         struct EmEntanglementMatrix **out);

/**
 * Dimension of `r`, or 0 for NULL.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
size_t em_entanglement_matrix_dim(const struct EmEntanglementMatrix *r);

/**
 * # Safety
 * `r` must be NULL or a handle not freed before.
 */
void em_entanglement_matrix_free(struct EmEntanglementMatrix *r);

/**
 * Object-apparatus-internal gate `U_CD` for `r` with the cyclic cloning assignment.
 *
 * # Safety
 * `r` must be a live handle and `out` valid storage for one handle.
 */
enum EmStatus em_combined_unitary(const struct EmEntanglementMatrix *r, struct EmGate **out);

/**
 * Total dimension of the gate, or 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live handle.
 */
size_t em_gate_dim(const struct EmGate *g);

/**
 * Writes the subsystem dimensions into `dims` and their count into `count`.
 *
 * # Safety
 * `dims` must hold `capacity` values; `count` must be writable.
 */
enum EmStatus em_gate_dims(const struct EmGate *g, size_t *dims, size_t capacity, size_t *count);

/**
 * Copies the `dim * dim` row-major gate entries into `entries`.
 *
 * # Safety
 * `entries` must hold `len` values.
 */
enum EmStatus em_gate_entries(const struct EmGate *g, struct EmComplex *entries, size_t len);

/**
 * `max |U†U − I|`, or NaN for NULL.
 *
 * # Safety
 * `g` must be NULL or a live handle.
 */
double em_gate_unitarity_error(const struct EmGate *g);

/**
 * # Safety
 * `g` must be NULL or a handle not freed before.
 */
void em_gate_free(struct EmGate *g);

/**
 * Coherent information of the measurement `r` on the `d × d` row-major state `rho`.
 *
 * # Safety
 * `rho` must hold `d * d` values and `out` must be writable.
 */
enum EmStatus em_coherent_information(const struct EmEntanglementMatrix *r,
                                      const struct EmComplex *rho,
                                      size_t d,
                                      struct EmInfoReport *out);

/**
 * Runs the dilation checks for `r` at tolerance `tol`.
 *
 * # Safety
 * `max_dev` and `pass` must be writable.
 */
enum EmStatus em_verify_dilation(const struct EmEntanglementMatrix *r,
                                 double tol,
                                 double *max_dev,
                                 bool *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENTMEAS_H */

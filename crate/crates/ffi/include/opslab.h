#ifndef OPSLAB_H
#define OPSLAB_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum OpslabStatus {
  OPSLAB_STATUS_OK = 0,
  OPSLAB_STATUS_NULL_POINTER = 1,
  OPSLAB_STATUS_INVALID_ARGUMENT = 2,
  OPSLAB_STATUS_DIMENSION_MISMATCH = 3,
  OPSLAB_STATUS_NOT_POWER_BOUNDED = 4,
  OPSLAB_STATUS_NO_FIXED_POINT = 5,
  OPSLAB_STATUS_NOT_LEFT_INVERSE = 6,
  OPSLAB_STATUS_RANGE_INCLUSION = 7,
  OPSLAB_STATUS_CERTIFICATE_FAILED = 8,
  OPSLAB_STATUS_NUMERICAL_FAILURE = 9,
  OPSLAB_STATUS_JSON = 10,
  OPSLAB_STATUS_PANIC = 11,
} OpslabStatus;

// Opaque conjugation `x ↦ J·conj(x)`.
typedef struct OpslabConjugation OpslabConjugation;

// Opaque complex matrix.
typedef struct OpslabMatrix OpslabMatrix;

// Absolute and relative tolerance. Pass `NULL` for the defaults
// (`1e-10`, `1e-8`).
typedef struct OpslabTolerance {
  double abs_tol;
  double rel_tol;
} OpslabTolerance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *opslab_version(void);

// Message of the last failed call on this thread, or `NULL`. Valid until the
// next failing call on the same thread.
const char *opslab_last_error_message(void);

// Builds a matrix from `2·rows·cols` doubles: row-major entries with real
// and imaginary parts interleaved.
//
// # Safety
// `data` must point to `2·rows·cols` readable doubles; `out` must be writable.
enum OpslabStatus opslab_matrix_new(size_t rows,
                                    size_t cols,
                                    const double *data,
                                    struct OpslabMatrix **out);

// Parses `{"rows": r, "cols": c, "data": [[re, im], ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum OpslabStatus opslab_matrix_from_json(const char *json, struct OpslabMatrix **out);

// Serializes to JSON. Release the string with [`opslab_string_free`].
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum OpslabStatus opslab_matrix_to_json(const struct OpslabMatrix *m, char **out);

// # Safety
// `s` must come from this library or be `NULL`.
void opslab_string_free(char *s);

// Row count, or 0 for `NULL`.
//
// # Safety
// `m` must be a live handle or `NULL`.
size_t opslab_matrix_rows(const struct OpslabMatrix *m);

// Column count, or 0 for `NULL`.
//
// # Safety
// `m` must be a live handle or `NULL`.
size_t opslab_matrix_cols(const struct OpslabMatrix *m);

// Copies the entries in the layout of [`opslab_matrix_new`]; `len` must be
// at least `2·rows·cols`.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum OpslabStatus opslab_matrix_copy_data(const struct OpslabMatrix *m, double *buf, size_t len);

// # Safety
// `m` must come from this library or be `NULL`; it must not be used afterwards.
void opslab_matrix_free(struct OpslabMatrix *m);

// `P_m(S, T) = Σ_{j=0}^m (−1)^{m−j} C(m,j) T^j S^j`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum OpslabStatus opslab_defect(const struct OpslabMatrix *s,
                                const struct OpslabMatrix *t,
                                uint32_t m,
                                struct OpslabMatrix **out);

// Whether `T` is a left m-inverse of `S`, with the defect residual.
//
// # Safety
// Handles must be live; `tol` may be `NULL`; outputs must be writable.
enum OpslabStatus opslab_is_left_m_inverse(const struct OpslabMatrix *s,
                                           const struct OpslabMatrix *t,
                                           uint32_t m,
                                           const struct OpslabTolerance *tol,
                                           bool *holds,
                                           double *residual);

// # Safety
// `m` must be live; `out` must be writable.
enum OpslabStatus opslab_operator_norm(const struct OpslabMatrix *m, double *out);

// # Safety
// `m` must be live; `out` must be writable.
enum OpslabStatus opslab_spectral_radius(const struct OpslabMatrix *m, double *out);

// Power boundedness by the spectral criterion, with `max_{n ≤ horizon} ‖Sⁿ‖`.
//
// # Safety
// `s` must be live; `tol` may be `NULL`; outputs must be writable.
enum OpslabStatus opslab_certify_power_bounded(const struct OpslabMatrix *s,
                                               uint32_t horizon,
                                               const struct OpslabTolerance *tol,
                                               bool *bounded,
                                               double *m1_estimate);

// Positive definite `X` with `S*XS = X` and unit operator norm.
//
// # Safety
// `s` must be live; `tol` may be `NULL`; `out` must be writable.
enum OpslabStatus opslab_invariant_metric(const struct OpslabMatrix *s,
                                          const struct OpslabTolerance *tol,
                                          struct OpslabMatrix **out);

// `S = P⁻¹VP` with `P` positive definite and `V` an isometry. `residuals`
// receives the metric, isometry and similarity residuals.
//
// # Safety
// `s` must be live; `tol` may be `NULL`; outputs must be writable and
// `residuals` must hold 3 doubles.
enum OpslabStatus opslab_similarity_certificate(const struct OpslabMatrix *s,
                                                const struct OpslabTolerance *tol,
                                                struct OpslabMatrix **p_out,
                                                struct OpslabMatrix **v_out,
                                                double *residuals);

// `A = BC` with `C = B⁺A` and `mu2 = inf{μ : AA* ≤ μBB*}`.
//
// # Safety
// Handles must be live; `tol` may be `NULL`; outputs must be writable.
enum OpslabStatus opslab_douglas_factor(const struct OpslabMatrix *a,
                                        const struct OpslabMatrix *b,
                                        const struct OpslabTolerance *tol,
                                        struct OpslabMatrix **c_out,
                                        double *mu2);

// Validates `J` (unitary, symmetric) and returns the conjugation.
//
// # Safety
// `j` must be live; `tol` may be `NULL`; `out` must be writable.
enum OpslabStatus opslab_conjugation_new(const struct OpslabMatrix *j,
                                         const struct OpslabTolerance *tol,
                                         struct OpslabConjugation **out);

// # Safety
// `c` must come from this library or be `NULL`; it must not be used afterwards.
void opslab_conjugation_free(struct OpslabConjugation *c);

// `Σ_{j=0}^m (−1)^{m−j} C(m,j) S*ʲ C Sʲ C`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum OpslabStatus opslab_mc_isometry_defect(const struct OpslabMatrix *s,
                                            const struct OpslabConjugation *c,
                                            uint32_t m,
                                            struct OpslabMatrix **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPSLAB_H */

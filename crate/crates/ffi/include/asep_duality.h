#ifndef ASEP_DUALITY_H
#define ASEP_DUALITY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Conditioning of the driven generator.
 */
typedef enum AsepDriving {
  ASEP_DRIVING_GLOBAL = 0,
  ASEP_DRIVING_BOUNDARY = 1,
} AsepDriving;

/**
 * Shock-measure family.
 */
typedef enum AsepSamKind {
  ASEP_SAM_KIND_I = 1,
  ASEP_SAM_KIND_II = 2,
} AsepSamKind;

/**
 * Outcome of a call.
 */
typedef enum AsepStatus {
  ASEP_STATUS_OK = 0,
  ASEP_STATUS_NULL_POINTER = 1,
  ASEP_STATUS_INVALID_ARGUMENT = 2,
  ASEP_STATUS_NUMERICAL = 3,
  /**
   * A verification ran and at least one check failed.
   */
  ASEP_STATUS_CHECK_FAILED = 4,
  ASEP_STATUS_PANIC = 5,
} AsepStatus;

/**
 * Numeric generator restricted to one particle-number sector.
 */
typedef struct AsepGenerator AsepGenerator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *asep_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void asep_string_free(char *s);

/**
 * Periodic generator `H(q, α, β)` on the `particles` sector.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum AsepStatus asep_generator_new(size_t sites,
                                   size_t particles,
                                   double q,
                                   double alpha,
                                   double beta,
                                   struct AsepGenerator **out);

/**
 * Generator conditioned on `conditioning` particles under `driving`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum AsepStatus asep_generator_driven(size_t sites,
                                      size_t particles,
                                      enum AsepDriving driving,
                                      size_t conditioning,
                                      double q,
                                      struct AsepGenerator **out);

/**
 * Sector dimension, 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t asep_generator_dim(const struct AsepGenerator *h);

/**
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void asep_generator_free(struct AsepGenerator *h);

/**
 * `out = e^{−Ht} v`; both buffers hold `len` = dimension entries in
 * sector order and may not overlap.
 *
 * # Safety
 * `h` must be live; `v` readable and `out` writable for `len` doubles.
 */
enum AsepStatus asep_generator_evolve(const struct AsepGenerator *h,
                                      double t,
                                      const double *v,
                                      double *out,
                                      size_t len);

/**
 * Unnormalized `𝟙_N |SAM_x⃗⟩` in sector order; `positions` holds `shocks`
 * increasing 1-based sites and `out` has room for `len` = dimension.
 *
 * # Safety
 * `positions` readable for `shocks` entries, `out` writable for `len`.
 */
enum AsepStatus asep_sam_vector(size_t sites,
                                size_t particles,
                                const size_t *positions,
                                size_t shocks,
                                double z,
                                double q,
                                enum AsepSamKind kind,
                                double *out,
                                size_t len);

/**
 * Runs a verification suite. `config_json` is null or a JSON object with
 * suite settings; the report array is written to `*report_json`, to be
 * released with [`asep_string_free`]. Returns `CheckFailed` when any
 * check fails.
 *
 * # Safety
 * `name` and a non-null `config_json` must be nul-terminated strings;
 * `report_json` must be valid for a pointer write.
 */
enum AsepStatus asep_run_suite(const char *name, const char *config_json, char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASEP_DUALITY_H */

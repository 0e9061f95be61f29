#ifndef CRAFT_H
#define CRAFT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum craft_status_t {
  CRAFT_OK = 0,
  CRAFT_ERR_INVALID_ARG = 1,
  CRAFT_ERR_DATA = 2,
  CRAFT_ERR_CONFIG = 3,
  CRAFT_ERR_IO = 4,
} craft_status_t;

/**
 * Opaque dataset handle.
 */
typedef struct craft_dataset_t craft_dataset_t;

/**
 * Opaque fit-result handle.
 */
typedef struct craft_result_t craft_result_t;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. The pointer stays valid
 * until the next failing call on the same thread; never free it.
 */
const char *craft_last_error(void);

/**
 * Load a CSV + schema JSON pair into a dataset handle. On success writes
 * the handle to `out` and returns CraftOk; the handle must be released with
 * craft_dataset_free.
 *
 * # Safety
 * `data_path` and `schema_path` must be valid NUL-terminated strings and
 * `out` a valid pointer.
 */
enum craft_status_t craft_dataset_load(const char *data_path,
                                       const char *schema_path,
                                       struct craft_dataset_t **out);

/**
 * # Safety
 * `handle` must come from craft_dataset_load and not be freed twice.
 */
void craft_dataset_free(struct craft_dataset_t *handle);

/**
 * Number of rows, or 0 if the handle is null.
 *
 * # Safety
 * `handle` must be a live dataset handle or null.
 */
size_t craft_dataset_rows(const struct craft_dataset_t *handle);

/**
 * Number of feature columns, or 0 if the handle is null.
 *
 * # Safety
 * `handle` must be a live dataset handle or null.
 */
size_t craft_dataset_features(const struct craft_dataset_t *handle);

/**
 * Run the fixed-budget fit with default smoothing and iteration settings.
 * On success writes a result handle to `out`; release it with
 * craft_result_free.
 *
 * # Safety
 * `dataset` must be a live dataset handle and `out` a valid pointer.
 */
enum craft_status_t craft_fit_fixed(const struct craft_dataset_t *dataset,
                                    double lambda,
                                    double m,
                                    uint64_t seed,
                                    struct craft_result_t **out);

/**
 * # Safety
 * `handle` must come from craft_fit_fixed and not be freed twice.
 */
void craft_result_free(struct craft_result_t *handle);

/**
 * Number of clusters found, or 0 if the handle is null.
 *
 * # Safety
 * `handle` must be a live result handle or null.
 */
size_t craft_result_k(const struct craft_result_t *handle);

/**
 * Final objective value, or NaN if the handle is null.
 *
 * # Safety
 * `handle` must be a live result handle or null.
 */
double craft_result_objective(const struct craft_result_t *handle);

/**
 * Passes executed, or 0 if the handle is null.
 *
 * # Safety
 * `handle` must be a live result handle or null.
 */
size_t craft_result_iterations(const struct craft_result_t *handle);

/**
 * 1 if the fit converged before the iteration cap, else 0.
 *
 * # Safety
 * `handle` must be a live result handle or null.
 */
int32_t craft_result_converged(const struct craft_result_t *handle);

/**
 * Copy the per-row cluster assignments into `buf` (capacity `len`, must be
 * at least the row count).
 *
 * # Safety
 * `handle` must be a live result handle; `buf` must point to `len` usizes.
 */
enum craft_status_t craft_result_assignments(const struct craft_result_t *handle,
                                             size_t *buf,
                                             size_t len);

/**
 * Copy cluster `k`'s feature mask into `buf` as 0/1 bytes (capacity `len`,
 * must be at least the feature count).
 *
 * # Safety
 * `handle` must be a live result handle; `buf` must point to `len` bytes.
 */
enum craft_status_t craft_result_mask(const struct craft_result_t *handle,
                                      size_t k,
                                      uint8_t *buf,
                                      size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRAFT_H */

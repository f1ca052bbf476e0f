#ifndef RCG_H
#define RCG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcgStatus {
  RCG_STATUS_OK = 0,
  /**
   * Invalid argument or configuration.
   */
  RCG_STATUS_USAGE = 1,
  /**
   * Unreadable or malformed data.
   */
  RCG_STATUS_DATA = 2,
  /**
   * Single-class sample or non-positive degrees of freedom.
   */
  RCG_STATUS_DEGENERATE = 3,
  RCG_STATUS_NULL_POINTER = 4,
  RCG_STATUS_PANIC = 5,
} RcgStatus;

typedef enum RcgAlgorithm {
  RCG_ALGORITHM_NONE = 0,
  RCG_ALGORITHM_FSRCG = 1,
  RCG_ALGORITHM_PSRCG = 2,
  RCG_ALGORITHM_FSPS = 3,
  RCG_ALGORITHM_FSRCG_THEN_PSRCG = 4,
  RCG_ALGORITHM_CNN = 5,
  RCG_ALGORITHM_RNN = 6,
} RcgAlgorithm;

/**
 * Opaque labeled dataset.
 */
typedef struct RcgDataset RcgDataset;

/**
 * Opaque reduction result.
 */
typedef struct RcgReduction RcgReduction;

/**
 * Reduction settings. Obtain defaults from `rcg_config_default`.
 */
typedef struct RcgConfig {
  size_t k;
  /**
   * True selects the fixed `epsilon` margin instead of the chi-square
   * test at level `alpha`.
   */
  bool use_epsilon;
  double alpha;
  double epsilon;
  bool rollback_last_deletion;
  /**
   * 0 means `max(c, k + 2)`.
   */
  size_t min_alive;
  bool normalize;
  bool literal_min;
  bool final_centers_pass;
  bool pre_purge_baseline;
} RcgConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct RcgConfig rcg_config_default(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rcg_version(void);

/**
 * Message of the last failed call on this thread, or "" if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *rcg_last_error_message(void);

/**
 * Loads a CSV with a header row. Column kinds are inferred.
 *
 * # Safety
 * `path` and `class_column` must be NUL-terminated strings; `out` must be
 * writable.
 */
enum RcgStatus rcg_dataset_load_csv(const char *path,
                                    const char *class_column,
                                    struct RcgDataset **out);

/**
 * Builds a numeric dataset from a row-major `n_rows x n_features` matrix
 * and one label per row (labels must cover `0..c` for some `c >= 2`).
 *
 * # Safety
 * `values` must point to `n_rows * n_features` doubles, `labels` to
 * `n_rows` entries; `out` must be writable.
 */
enum RcgStatus rcg_dataset_from_numeric(const double *values,
                                        size_t n_rows,
                                        size_t n_features,
                                        const size_t *labels,
                                        struct RcgDataset **out);

/**
 * # Safety
 * `ds` must be null or a handle from this library not yet freed.
 */
void rcg_dataset_free(struct RcgDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t rcg_dataset_rows(const struct RcgDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t rcg_dataset_features(const struct RcgDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t rcg_dataset_classes(const struct RcgDataset *ds);

/**
 * Runs `algorithm` over every row of `ds`.
 *
 * # Safety
 * `ds` must be a live dataset handle, `config` null (defaults) or valid,
 * and `out` writable.
 */
enum RcgStatus rcg_reduce(const struct RcgDataset *ds,
                          enum RcgAlgorithm algorithm,
                          const struct RcgConfig *config,
                          struct RcgReduction **out);

/**
 * # Safety
 * `r` must be null or a reduction handle from this library not yet freed.
 */
void rcg_reduction_free(struct RcgReduction *r);

/**
 * # Safety
 * `r` must be null or a live reduction handle.
 */
size_t rcg_reduction_kept_instances(const struct RcgReduction *r);

/**
 * # Safety
 * `r` must be null or a live reduction handle.
 */
size_t rcg_reduction_selected_features(const struct RcgReduction *r);

/**
 * Writes 1 for every kept row and 0 otherwise; `len` must equal the
 * dataset's row count.
 *
 * # Safety
 * `r` must be a live reduction handle and `out` must hold `len` bytes.
 */
enum RcgStatus rcg_reduction_instance_mask(const struct RcgReduction *r, uint8_t *out, size_t len);

/**
 * Writes 1 for every selected feature and 0 otherwise; `len` must equal
 * the dataset's feature count.
 *
 * # Safety
 * `r` must be a live reduction handle and `out` must hold `len` bytes.
 */
enum RcgStatus rcg_reduction_feature_mask(const struct RcgReduction *r, uint8_t *out, size_t len);

/**
 * RCG of the reduced set. Fails with `RCG_STATUS_DEGENERATE` when it is
 * undefined (fewer than two classes survive).
 *
 * # Safety
 * `r` must be a live reduction handle and `out` writable.
 */
enum RcgStatus rcg_reduction_final_rcg(const struct RcgReduction *r, double *out);

/**
 * Quadratic entropy `sum g (1 - g)` of a probability vector.
 *
 * # Safety
 * `dist` must point to `len` doubles and `out` be writable.
 */
enum RcgStatus rcg_quadratic_entropy(const double *dist, size_t len, double *out);

/**
 * Quantile of the chi-square distribution with `df` degrees of freedom.
 *
 * # Safety
 * `out` must be writable.
 */
enum RcgStatus rcg_chi_square_quantile(double p, double df, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RCG_H */

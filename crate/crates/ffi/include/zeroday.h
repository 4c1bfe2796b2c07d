#ifndef ZERODAY_H
#define ZERODAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  ZD_STATUS_OK = 0,
  ZD_STATUS_NULL_POINTER = 1,
  ZD_STATUS_INVALID_ARGUMENT = 2,
  ZD_STATUS_IO = 3,
  ZD_STATUS_RUNTIME = 4,
  ZD_STATUS_PANIC = 5,
} ZdStatus;

/**
 * Loaded, cleaned dataset.
 */
typedef struct ZdDataset ZdDataset;

/**
 * Fitted classifier.
 */
typedef struct ZdModel ZdModel;

typedef struct {
  uint64_t tp;
  uint64_t fp;
  uint64_t fn_;
  uint64_t tn;
  double accuracy;
  double recall;
  double precision;
  double f1;
  double fpr;
  /**
   * Nonzero when a ratio had a zero denominator and was reported as 0.
   */
  uint8_t undefined;
} ZdMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t zd_last_error(char *buf, size_t len);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void zd_string_free(char *s);

/**
 * Loads and cleans a NetFlow CSV.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
ZdStatus zd_dataset_load_csv(const char *path, bool has_header, ZdDataset **out);

/**
 * Generates a synthetic dataset with the default category mix.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
ZdStatus zd_dataset_synthesize(size_t n_rows,
                               size_t n_features,
                               double attack_fraction,
                               uint64_t seed,
                               ZdDataset **out);

/**
 * # Safety
 * `ds` must be a live dataset handle.
 */
size_t zd_dataset_n_rows(const ZdDataset *ds);

/**
 * # Safety
 * `ds` must be a live dataset handle.
 */
size_t zd_dataset_n_features(const ZdDataset *ds);

/**
 * Copies the feature matrix (row-major) and labels out of a dataset.
 * Either output may be null to skip it.
 *
 * # Safety
 * `features` must hold `n_rows * n_features` doubles and `labels` `n_rows` bytes.
 */
ZdStatus zd_dataset_copy(const ZdDataset *ds, double *features, uint8_t *labels);

/**
 * # Safety
 * `ds` must be null or a handle from this library, freed once.
 */
void zd_dataset_free(ZdDataset *ds);

/**
 * Fits a model. `family` is LR, DT, RF, GBT (or XGB) or MLP;
 * `params_json` is a JSON object of hyperparameters or null for defaults.
 *
 * # Safety
 * `x` must hold `rows * cols` doubles, `y` `rows` labels (0 or 1).
 */
ZdStatus zd_model_fit(const char *family,
                      const char *params_json,
                      uint64_t seed,
                      const double *x,
                      size_t rows,
                      size_t cols,
                      const uint8_t *y,
                      ZdModel **out);

/**
 * Hard 0/1 predictions into `labels` (`rows` bytes).
 *
 * # Safety
 * `x` must hold `rows * cols` doubles and `labels` `rows` bytes.
 */
ZdStatus zd_model_predict(const ZdModel *model,
                          const double *x,
                          size_t rows,
                          size_t cols,
                          uint8_t *labels);

/**
 * Attack scores in `[0, 1]` into `scores` (`rows` doubles).
 *
 * # Safety
 * `x` must hold `rows * cols` doubles and `scores` `rows` doubles.
 */
ZdStatus zd_model_predict_score(const ZdModel *model,
                                const double *x,
                                size_t rows,
                                size_t cols,
                                double *scores);

/**
 * Serializes a model; free the result with [`zd_string_free`].
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
ZdStatus zd_model_to_json(const ZdModel *model, char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
ZdStatus zd_model_from_json(const char *json, ZdModel **out);

/**
 * # Safety
 * `model` must be null or a handle from this library, freed once.
 */
void zd_model_free(ZdModel *model);

/**
 * Area under the ROC curve, ties counted as half.
 *
 * # Safety
 * `y` and `scores` must each hold `n` elements.
 */
ZdStatus zd_roc_auc(const uint8_t *y, const double *scores, size_t n, double *out);

/**
 * # Safety
 * `y_true` and `y_pred` must each hold `n` labels.
 */
ZdStatus zd_confusion_metrics(const uint8_t *y_true,
                              const uint8_t *y_pred,
                              size_t n,
                              ZdMetrics *out);

/**
 * Runs an experiment from a JSON config and returns metrics.csv as a string
 * (free with [`zd_string_free`]). With `out_dir` non-null every report file
 * is also written there.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string, `out_dir` null or one, and
 * `metrics_out` a valid pointer.
 */
ZdStatus zd_run_experiment(const char *config_json, const char *out_dir, char **metrics_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZERODAY_H */

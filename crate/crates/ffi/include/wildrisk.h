#ifndef WILDRISK_H
#define WILDRISK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

// Result codes.
typedef enum WrStatus {
  WR_STATUS_OK = 0,
  // A required pointer was NULL.
  WR_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not UTF-8.
  WR_STATUS_INVALID_UTF8 = 2,
  // Bad input: malformed model, wrong row width, invalid scenario.
  WR_STATUS_INVALID_INPUT = 3,
  // A valid request failed while running.
  WR_STATUS_RUNTIME = 4,
  // The caller's buffer cannot hold the result.
  WR_STATUS_BUFFER_TOO_SMALL = 5,
  // A Rust panic was caught at the boundary.
  WR_STATUS_PANIC = 6,
} WrStatus;

// Opaque handle to a loaded model.
typedef struct WrModel WrModel;

// Counts from one counterfactual scenario.
typedef struct WrScenarioCounts {
  size_t baseline;
  size_t treated;
  size_t flips;
} WrScenarioCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *wr_version(void);

// Message for the last failure on this thread; empty after a success.
// Valid until the next wildrisk call on the same thread.
const char *wr_last_error(void);

// Loads a model document from a file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum WrStatus wr_model_load(const char *path, struct WrModel **out);

// Parses a model document held in memory.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum WrStatus wr_model_from_json(const char *json, struct WrModel **out);

// Releases a model. NULL is ignored.
//
// # Safety
// `model` must come from a wildrisk loader and not be used afterwards.
void wr_model_free(struct WrModel *model);

// Number of output classes (2 for the dynamic task, 3 for the static one).
//
// # Safety
// `model` must be a live handle or NULL (returns 0).
size_t wr_model_n_classes(const struct WrModel *model);

// True when the model predicts per-year binary risk.
//
// # Safety
// `model` must be a live handle or NULL (returns false).
bool wr_model_is_dynamic(const struct WrModel *model);

// Copies the hex content hash (64 characters plus NUL) into `buf`.
//
// # Safety
// `model` must be a live handle and `buf` writable for `len` bytes.
enum WrStatus wr_model_hash(const struct WrModel *model, char *buf, size_t len);

// Predicted class index per row.
//
// # Safety
// `rows` must hold `n_rows * n_features` doubles and `out_classes`
// `n_rows` writable slots.
enum WrStatus wr_model_predict(const struct WrModel *model,
                               const double *rows,
                               size_t n_rows,
                               size_t n_features,
                               uint32_t *out_classes);

// Class scores, `n_rows × n_classes` row-major.
//
// # Safety
// `rows` must hold `n_rows * n_features` doubles and `out_scores`
// `n_rows * wr_model_n_classes(model)` writable slots.
enum WrStatus wr_model_predict_proba(const struct WrModel *model,
                                     const double *rows,
                                     size_t n_rows,
                                     size_t n_features,
                                     double *out_scores);

// Number of rows a dynamic model predicts at risk.
//
// # Safety
// `rows` must hold `n_rows * n_features` doubles; `out_count` must be
// writable.
enum WrStatus wr_count_risk(const struct WrModel *model,
                            const double *rows,
                            size_t n_rows,
                            size_t n_features,
                            size_t *out_count);

// Applies one scenario to one year's rows and compares at-risk counts.
//
// `kind` is `pdsi_delta`, `clear_mortality`, `ndvi_scale` or
// `population_scale`; `parameter` is ignored when `has_parameter` is false.
//
// # Safety
// `kind` must be NUL-terminated, `rows` must hold `n_rows * n_features`
// doubles and `out` must be writable.
enum WrStatus wr_counterfactual(const struct WrModel *model,
                                const double *rows,
                                size_t n_rows,
                                size_t n_features,
                                const char *kind,
                                double parameter,
                                bool has_parameter,
                                struct WrScenarioCounts *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WILDRISK_H */

#ifndef ROBUSTFIT_H
#define ROBUSTFIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RfFamily {
  RF_FAMILY_LINE2D = 0,
  RF_FAMILY_BSPLINE2D = 1,
  RF_FAMILY_ROAD_CIRCLE_PARABOLA = 2,
  RF_FAMILY_ROAD_SPIRAL_PARABOLA = 3,
} RfFamily;

// Status codes returned by every fallible function.
typedef enum RfStatus {
  RF_STATUS_OK = 0,
  RF_STATUS_NULL_POINTER = 1,
  RF_STATUS_USAGE = 2,
  RF_STATUS_DOMAIN = 3,
  RF_STATUS_DEGENERATE = 4,
  RF_STATUS_INSUFFICIENT_DATA = 5,
  RF_STATUS_CONFIG = 6,
  RF_STATUS_FORMAT = 7,
  RF_STATUS_IO = 8,
  // Output buffer too small; the required length was still written.
  RF_STATUS_BUFFER_TOO_SMALL = 9,
  RF_STATUS_PANIC = 10,
} RfStatus;

// Deduplicated point data with its search index.
typedef struct RfDataset RfDataset;

// Result of [`rf_fit`].
typedef struct RfReport RfReport;

// Fitting configuration. Obtain defaults from [`rf_fit_config_default`].
typedef struct RfFitConfig {
  uint32_t population;
  uint32_t max_iterations;
  double discovery_rate;
  double lambda;
  double sample_resolution_factor;
  uint32_t instance_count;
  uint64_t seed;
  // Minimum coverage gain for a new instance; negative disables early stopping.
  double early_stop_gain;
  // 0 keeps a recombined solution only if it improves, 1 always keeps it.
  uint32_t replacement;
} RfFitConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into this library on the same thread.
const char *rf_last_error_message(void);

struct RfFitConfig rf_fit_config_default(void);

// Number of parameters of a model family.
size_t rf_family_param_count(enum RfFamily family);

// Builds a dataset from `count` points of `dim` (2 or 3) interleaved coordinates.
//
// # Safety
// `coords` must point to `count * dim` readable doubles; `out` must be writable.
enum RfStatus rf_dataset_new(const double *coords,
                             size_t count,
                             uint32_t dim,
                             struct RfDataset **out);

// # Safety
// `dataset` must come from [`rf_dataset_new`] and not be freed twice. Null is ignored.
void rf_dataset_free(struct RfDataset *dataset);

// Number of points after deduplication.
//
// # Safety
// `dataset` must be a live handle or null (returns 0).
size_t rf_dataset_len(const struct RfDataset *dataset);

// Data resolution (closest-pair distance).
//
// # Safety
// `dataset` must be a live handle; `out` must be writable.
enum RfStatus rf_dataset_delta_d(const struct RfDataset *dataset, double *out);

// Estimator value of one model instance, sampled at
// `resolution_factor` times the data resolution.
//
// # Safety
// `params` must point to `n_params` doubles; `dataset` live; `out` writable.
enum RfStatus rf_npre(const struct RfDataset *dataset,
                      enum RfFamily family,
                      const double *params,
                      size_t n_params,
                      double lambda,
                      double resolution_factor,
                      double *out);

// Fits `config->instance_count` instances of `family`.
//
// # Safety
// `dataset` live, `config` readable (null uses defaults), `out` writable.
enum RfStatus rf_fit(const struct RfDataset *dataset,
                     enum RfFamily family,
                     const struct RfFitConfig *config,
                     struct RfReport **out);

// # Safety
// `report` must come from [`rf_fit`] and not be freed twice. Null is ignored.
void rf_report_free(struct RfReport *report);

// # Safety
// `report` must be a live handle or null (returns 0).
size_t rf_report_instance_count(const struct RfReport *report);

// # Safety
// `report` live; `out` writable.
enum RfStatus rf_report_union_fitness(const struct RfReport *report, double *out);

// Union fitness after instance `k` was added.
//
// # Safety
// `report` live; `out` writable.
enum RfStatus rf_report_fitness(const struct RfReport *report, size_t k, double *out);

// # Safety
// `report` live; `out` writable.
enum RfStatus rf_report_evaluations(const struct RfReport *report, size_t k, uint64_t *out);

// Copies the parameters of instance `k` into `buf` (capacity `cap`). The
// parameter count is written to `len` even when the buffer is too small.
//
// # Safety
// `report` live; `buf` writable for `cap` doubles (may be null when `cap` is 0); `len` writable.
enum RfStatus rf_report_params(const struct RfReport *report,
                               size_t k,
                               double *buf,
                               size_t cap,
                               size_t *len);

// Full report as JSON. Release the string with [`rf_string_free`].
//
// # Safety
// `report` live; `out` writable.
enum RfStatus rf_report_to_json(const struct RfReport *report, char **out);

// # Safety
// `s` must come from this library and not be freed twice. Null is ignored.
void rf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUSTFIT_H */

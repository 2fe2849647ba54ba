#ifndef SDYM_H
#define SDYM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SdymStatus {
  SDYM_STATUS_OK = 0,
  SDYM_STATUS_NULL_POINTER = 1,
  SDYM_STATUS_INVALID_ARGUMENT = 2,
  SDYM_STATUS_CONFIG_ERROR = 3,
  SDYM_STATUS_COMPUTE_ERROR = 4,
  SDYM_STATUS_BUFFER_TOO_SMALL = 5,
  SDYM_STATUS_OUT_OF_RANGE = 6,
  SDYM_STATUS_PANIC = 7,
} SdymStatus;

typedef enum SdymSuite {
  SDYM_SUITE_SDYM = 0,
  SDYM_SUITE_MANIFEST = 1,
  SDYM_SUITE_HIDDEN = 2,
  SDYM_SUITE_RH = 3,
  SDYM_SUITE_ALL = 4,
} SdymSuite;

/**
 * Run configuration handle.
 */
typedef struct SdymConfig SdymConfig;

/**
 * Report handle: check results sorted by id.
 */
typedef struct SdymReport SdymReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *sdym_status_str(enum SdymStatus status);

/**
 * Message of the most recent failure on this thread.
 * `buf` must be valid for `cap` bytes; `needed` may be null.
 */
enum SdymStatus sdym_last_error(char *buf, size_t cap, size_t *needed);

/**
 * Default configuration.
 * `out` must be a valid pointer.
 */
enum SdymStatus sdym_config_new(struct SdymConfig **out);

/**
 * Configuration from a JSON document; missing fields take defaults.
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SdymStatus sdym_config_from_json(const char *json, struct SdymConfig **out);

/**
 * `cfg` must come from `sdym_config_new` or `sdym_config_from_json`, or be null.
 */
void sdym_config_free(struct SdymConfig *cfg);

/**
 * `cfg` must be a live config handle.
 */
enum SdymStatus sdym_config_set_seed(struct SdymConfig *cfg, uint64_t seed);

/**
 * `cfg` must be a live config handle.
 */
enum SdymStatus sdym_config_set_orders(struct SdymConfig *cfg,
                                       int32_t jet_order,
                                       uint32_t lambda_order);

/**
 * `cfg` must be a live config handle.
 */
enum SdymStatus sdym_config_set_tolerance_scale(struct SdymConfig *cfg, double scale);

/**
 * Checks the configuration without running anything.
 * `cfg` must be a live config handle.
 */
enum SdymStatus sdym_config_validate(const struct SdymConfig *cfg);

/**
 * Runs a suite. On success `*out` owns a report handle.
 * `cfg` must be a live config handle and `out` a valid pointer.
 */
enum SdymStatus sdym_run(const struct SdymConfig *cfg,
                         enum SdymSuite suite,
                         struct SdymReport **out);

/**
 * `report` must come from `sdym_run`, or be null.
 */
void sdym_report_free(struct SdymReport *report);

/**
 * `report` must be a live report handle and `len` a valid pointer.
 */
enum SdymStatus sdym_report_len(const struct SdymReport *report, size_t *len);

/**
 * `report` must be a live report handle and `pass` a valid pointer.
 */
enum SdymStatus sdym_report_all_pass(const struct SdymReport *report, bool *pass);

/**
 * Residual, tolerance and verdict of one check.
 * `report` must be a live report handle; out pointers may be null.
 */
enum SdymStatus sdym_report_entry(const struct SdymReport *report,
                                  size_t index,
                                  double *residual,
                                  double *tolerance,
                                  bool *pass);

/**
 * Check id of one entry as a NUL-terminated string.
 * `report` must be a live report handle, `buf` valid for `cap` bytes.
 */
enum SdymStatus sdym_report_check_id(const struct SdymReport *report,
                                     size_t index,
                                     char *buf,
                                     size_t cap,
                                     size_t *needed);

/**
 * The whole report in JSON Lines form.
 * `report` must be a live report handle, `buf` valid for `cap` bytes.
 */
enum SdymStatus sdym_report_jsonl(const struct SdymReport *report,
                                  char *buf,
                                  size_t cap,
                                  size_t *needed);

/**
 * Anti-self-dual part of the SU(2) instanton curvature at seeded probes in
 * a ball of radius `2·scale` around `center`.
 * `center` must point to 4 doubles and `residual` be a valid pointer.
 */
enum SdymStatus sdym_bpst_residual(const double *center,
                                   double scale,
                                   size_t probes,
                                   uint64_t seed,
                                   double *residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDYM_H */

#ifndef HOAMP_H
#define HOAMP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HoampStatus {
  HOAMP_STATUS_OK = 0,
  HOAMP_STATUS_NULL_POINTER = 1,
  HOAMP_STATUS_INVALID_UTF8 = 2,
  HOAMP_STATUS_INVALID_ARGUMENT = 3,
  /**
   * No factor in range, infeasible system or no solution found.
   */
  HOAMP_STATUS_INFEASIBLE = 4,
  HOAMP_STATUS_OUT_OF_RANGE = 5,
  HOAMP_STATUS_RUNTIME = 6,
  HOAMP_STATUS_PANIC = 7,
} HoampStatus;

typedef enum HoampWeightMode {
  HOAMP_WEIGHT_MODE_MAX = 0,
  HOAMP_WEIGHT_MODE_SUM_CLIPPED = 1,
} HoampWeightMode;

typedef struct HoampFactorReport HoampFactorReport;

typedef struct HoampSearchReport HoampSearchReport;

typedef struct HoampSolveReport HoampSolveReport;

/**
 * One factoring iteration.
 */
typedef struct HoampRecord {
  uint64_t l;
  double t_l;
  double alpha;
  double pr_e;
  double c_l;
  double lambda_l;
  double fidelity;
} HoampRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *hoamp_last_error(void);

/**
 * Library version, a static string.
 */
const char *hoamp_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void hoamp_string_free(char *s);

/**
 * `|ε|²` for marker magnitude `alpha` and reduced phase difference `angle`.
 */
double hoamp_overlap_weight(double alpha, double angle);

/**
 * Reduced phase `g·t·(target − trial)` in (−π, π].
 *
 * # Safety
 * `angle` must be valid for writing.
 */
enum HoampStatus hoamp_phase_delta(double g,
                                   int64_t target,
                                   int64_t trial,
                                   double t,
                                   double *angle);

/**
 * Factor `n` with random times, constant `|α|`, stopping at `stop_fidelity`
 * or after `l_max` iterations.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum HoampStatus hoamp_factor(uint64_t n,
                              uint64_t seed,
                              double alpha,
                              uint32_t l_max,
                              double stop_fidelity,
                              struct HoampFactorReport **out);

/**
 * # Safety
 * `report` must be null or come from [`hoamp_factor`] and not have been freed.
 */
void hoamp_factor_report_free(struct HoampFactorReport *report);

/**
 * Number of iterations performed; 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
uint64_t hoamp_factor_report_len(const struct HoampFactorReport *report);

/**
 * # Safety
 * `report` must be null or a live handle; `record` must be valid for writing.
 */
enum HoampStatus hoamp_factor_report_record(const struct HoampFactorReport *report,
                                            uint64_t index,
                                            struct HoampRecord *record);

/**
 * Final fidelity with the factor state; NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double hoamp_factor_report_fidelity(const struct HoampFactorReport *report);

/**
 * The sampled pair. Returns `Infeasible` when its product is not `n`.
 *
 * # Safety
 * `report` must be null or a live handle; `r` and `s` must be valid for writing.
 */
enum HoampStatus hoamp_factor_report_factors(const struct HoampFactorReport *report,
                                             uint64_t *r,
                                             uint64_t *s);

/**
 * Full report as JSON; free with [`hoamp_string_free`].
 *
 * # Safety
 * `report` must be null or a live handle; `out` must be valid for writing.
 */
enum HoampStatus hoamp_factor_report_json(const struct HoampFactorReport *report, char **out);

/**
 * Search `0..domain` for the `count` indices in `solutions`.
 *
 * # Safety
 * `solutions` must point to `count` values (or be null when `count` is 0);
 * `out` must be valid for writing.
 */
enum HoampStatus hoamp_search(uint64_t domain,
                              const uint64_t *solutions,
                              uint64_t count,
                              uint64_t seed,
                              double alpha,
                              struct HoampSearchReport **out);

/**
 * # Safety
 * `report` must be null or come from [`hoamp_search`] and not have been freed.
 */
void hoamp_search_report_free(struct HoampSearchReport *report);

/**
 * Number of reported solutions; 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
uint64_t hoamp_search_report_count(const struct HoampSearchReport *report);

/**
 * # Safety
 * `report` must be null or a live handle; `value` must be valid for writing.
 */
enum HoampStatus hoamp_search_report_solution(const struct HoampSearchReport *report,
                                              uint64_t index,
                                              uint64_t *value);

/**
 * # Safety
 * `report` must be null or a live handle; `out` must be valid for writing.
 */
enum HoampStatus hoamp_search_report_json(const struct HoampSearchReport *report, char **out);

/**
 * Solve the constraint system given as JSON (`variables`, `constraints`).
 *
 * # Safety
 * `system_json` must be a NUL-terminated string; `out` must be valid for writing.
 */
enum HoampStatus hoamp_solve(const char *system_json,
                             uint64_t seed,
                             double alpha,
                             enum HoampWeightMode mode,
                             struct HoampSolveReport **out);

/**
 * # Safety
 * `report` must be null or come from [`hoamp_solve`] and not have been freed.
 */
void hoamp_solve_report_free(struct HoampSolveReport *report);

/**
 * Number of reported tuples; 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
uint64_t hoamp_solve_report_count(const struct HoampSolveReport *report);

/**
 * Copy tuple `index` into `values`, which holds `capacity` entries. The
 * tuple's arity is written to `arity` even when `capacity` is too small.
 *
 * # Safety
 * `report` must be null or a live handle; `values` must hold `capacity`
 * entries; `arity` must be valid for writing.
 */
enum HoampStatus hoamp_solve_report_tuple(const struct HoampSolveReport *report,
                                          uint64_t index,
                                          uint64_t *values,
                                          uint64_t capacity,
                                          uint64_t *arity);

/**
 * # Safety
 * `report` must be null or a live handle; `out` must be valid for writing.
 */
enum HoampStatus hoamp_solve_report_json(const struct HoampSolveReport *report, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOAMP_H */

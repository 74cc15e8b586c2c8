#ifndef DAK_H
#define DAK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum DakStatus {
  DAK_STATUS_OK = 0,
  DAK_STATUS_NULL_POINTER = 1,
  DAK_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed instance JSON or an invalid graph.
   */
  DAK_STATUS_INVALID_INSTANCE = 3,
  DAK_STATUS_UNKNOWN_NAME = 4,
  /**
   * The mechanism cannot be evaluated on this instance.
   */
  DAK_STATUS_MECHANISM = 5,
  DAK_STATUS_INVALID_CONFIG = 6,
  DAK_STATUS_OUT_OF_RANGE = 7,
  DAK_STATUS_PANIC = 8,
} DakStatus;

/**
 * A validated auction instance.
 */
typedef struct DakInstance DakInstance;

/**
 * The outcome of one mechanism run.
 */
typedef struct DakOutcome DakOutcome;

/**
 * Message of the last failed call on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *dak_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string obtained from this library, not yet freed.
 */
void dak_string_free(char *s);

/**
 * Parses an instance from its JSON form.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum DakStatus dak_instance_from_json(const char *json, struct DakInstance **out);

/**
 * Serializes an instance to JSON.
 *
 * # Safety
 * `instance` must be a live handle; `out` must be writable.
 */
enum DakStatus dak_instance_to_json(const struct DakInstance *instance, char **out);

/**
 * Number of buyers, or 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
uintptr_t dak_instance_buyer_count(const struct DakInstance *instance);

/**
 * # Safety
 * `instance` must be null or a handle from [`dak_instance_from_json`], not yet freed.
 */
void dak_instance_free(struct DakInstance *instance);

/**
 * Runs the named mechanism on the instance's truthful profile.
 *
 * # Safety
 * `instance` must be a live handle, `policy` and `payment` nul-terminated
 * strings and `out` writable.
 */
enum DakStatus dak_run(const struct DakInstance *instance,
                       const char *policy,
                       const char *payment,
                       struct DakOutcome **out);

/**
 * # Safety
 * `outcome` must be null or a handle from [`dak_run`], not yet freed.
 */
void dak_outcome_free(struct DakOutcome *outcome);

/**
 * Winner id, or -1 when the item is not sold or the handle is null.
 *
 * # Safety
 * `outcome` must be null or a live handle.
 */
int64_t dak_outcome_winner(const struct DakOutcome *outcome);

/**
 * Payment of `buyer` as an exact money string.
 *
 * # Safety
 * `outcome` must be a live handle; `out` must be writable.
 */
enum DakStatus dak_outcome_payment(const struct DakOutcome *outcome, uint32_t buyer, char **out);

/**
 * Seller revenue as an exact money string.
 *
 * # Safety
 * `outcome` must be a live handle; `out` must be writable.
 */
enum DakStatus dak_outcome_revenue(const struct DakOutcome *outcome, char **out);

/**
 * Winner's reported value as an exact money string.
 *
 * # Safety
 * `outcome` must be a live handle; `out` must be writable.
 */
enum DakStatus dak_outcome_welfare(const struct DakOutcome *outcome, char **out);

/**
 * The outcome as JSON with `winner`, `payments`, `revenue` and `welfare`.
 *
 * # Safety
 * `outcome` must be a live handle; `out` must be writable.
 */
enum DakStatus dak_outcome_to_json(const struct DakOutcome *outcome, char **out);

/**
 * Certifies the named mechanism on `count` instances.
 *
 * `grid` is a comma-separated bid grid; null uses the distinct valuations of
 * the instances. Writes the certification report as JSON to `out_json` and
 * whether IC and IR were certified to `out_certified`.
 *
 * # Safety
 * `instances` must point to `count` live handles; string arguments must be
 * nul-terminated (or null for `grid`); the out pointers must be writable.
 */
enum DakStatus dak_verify(const struct DakInstance *const *instances,
                          uintptr_t count,
                          const char *policy,
                          const char *payment,
                          const char *grid,
                          char **out_json,
                          bool *out_certified);

#endif  /* DAK_H */

#ifndef CSN_H
#define CSN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CsnStatus {
  CSN_STATUS_OK = 0,
  CSN_STATUS_NULL_ARGUMENT = 1,
  CSN_STATUS_INVALID_UTF8 = 2,
  CSN_STATUS_PARSE = 3,
  CSN_STATUS_IO = 4,
  CSN_STATUS_CONFIG = 5,
  CSN_STATUS_ENGINE = 6,
  CSN_STATUS_PANIC = 7,
} CsnStatus;

/**
 * A parsed network.
 */
typedef struct CsnNetwork CsnNetwork;

/**
 * The result of a run.
 */
typedef struct CsnTrace CsnTrace;

/**
 * Options for [`csn_run`]. Obtain defaults from [`csn_run_options_default`].
 */
typedef struct CsnRunOptions {
  uint64_t seed;
  uint64_t max_steps;
  /**
   * Cost of an internal step, in millionths of a battery unit.
   */
  int64_t c_in_micros;
  /**
   * Cost of a broadcast release, in millionths of a battery unit.
   */
  int64_t c_out_micros;
  /**
   * Release broadcasts before every receiver in range has the message.
   */
  bool nondeterministic_delivery;
  bool ext_state;
  bool ext_events;
  bool ext_nonce;
} CsnRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *csn_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void csn_string_free(char *s);

/**
 * Parses network source text.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CsnStatus csn_network_parse(const char *source, struct CsnNetwork **out);

/**
 * Reads and parses a network file. Grid files are resolved relative to it.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CsnStatus csn_network_parse_file(const char *path, struct CsnNetwork **out);

/**
 * Releases a network. Null is ignored.
 *
 * # Safety
 * `net` must come from this library and not have been freed.
 */
void csn_network_free(struct CsnNetwork *net);

/**
 * Number of live sensors, including those captured in a broadcast.
 * Returns 0 for null.
 *
 * # Safety
 * `net` must be null or a live network.
 */
size_t csn_network_sensor_count(const struct CsnNetwork *net);

/**
 * Sum of all batteries in millionths of a unit, counting the residue of
 * expired sensors.
 *
 * # Safety
 * `net` must be a live network and `out` a valid pointer.
 */
enum CsnStatus csn_network_total_battery_micros(const struct CsnNetwork *net, int64_t *out);

/**
 * Canonical form of a network under the given energy costs. Free the result
 * with [`csn_string_free`]. Returns null on error.
 *
 * # Safety
 * `net` and `options` must be valid pointers.
 */
char *csn_network_canonical(const struct CsnNetwork *net, const struct CsnRunOptions *options);

/**
 * Stable 64-bit hash of the canonical form.
 *
 * # Safety
 * `net`, `options` and `out` must be valid pointers.
 */
enum CsnStatus csn_network_hash(const struct CsnNetwork *net,
                                const struct CsnRunOptions *options,
                                uint64_t *out);

/**
 * Structural congruence of two networks.
 *
 * # Safety
 * All pointers must be valid.
 */
enum CsnStatus csn_network_congruent(const struct CsnNetwork *a,
                                     const struct CsnNetwork *b,
                                     const struct CsnRunOptions *options,
                                     bool *out);

/**
 * Defaults: seed 0, 10000 steps, c_in 1, c_out 10, all-in-range delivery,
 * no extensions.
 */
struct CsnRunOptions csn_run_options_default(void);

/**
 * Runs a network with a seeded random scheduler. The network is not
 * modified.
 *
 * # Safety
 * `net`, `options` and `out` must be valid pointers.
 */
enum CsnStatus csn_run(const struct CsnNetwork *net,
                       const struct CsnRunOptions *options,
                       struct CsnTrace **out);

/**
 * Releases a trace. Null is ignored.
 *
 * # Safety
 * `trace` must come from this library and not have been freed.
 */
void csn_trace_free(struct CsnTrace *trace);

/**
 * Number of steps taken. Returns 0 for null.
 *
 * # Safety
 * `trace` must be null or a live trace.
 */
size_t csn_trace_step_count(const struct CsnTrace *trace);

/**
 * Name of the outcome, such as `Quiescent`. The string is static. Returns
 * null for null.
 *
 * # Safety
 * `trace` must be null or a live trace.
 */
const char *csn_trace_outcome(const struct CsnTrace *trace);

/**
 * The trace in the textual line format. Free with [`csn_string_free`].
 *
 * # Safety
 * `trace` must be null or a live trace.
 */
char *csn_trace_render(const struct CsnTrace *trace);

/**
 * Number of log entries written by intrinsics during the run.
 *
 * # Safety
 * `trace` must be null or a live trace.
 */
size_t csn_trace_log_count(const struct CsnTrace *trace);

/**
 * Copies the final network of a run into a new handle.
 *
 * # Safety
 * `trace` and `out` must be valid pointers.
 */
enum CsnStatus csn_trace_final_network(const struct CsnTrace *trace, struct CsnNetwork **out);

/**
 * Battery drop of the run in millionths of a unit.
 *
 * # Safety
 * `trace` and `out` must be valid pointers.
 */
enum CsnStatus csn_trace_energy_spent_micros(const struct CsnTrace *trace, int64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CSN_H */

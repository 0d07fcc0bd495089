#ifndef ELLIPSEPERC_H
#define ELLIPSEPERC_H

/* Generated by cbindgen from ellipseperc-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Grain shapes accepted by the samplers.
typedef enum EpGrainKind {
  EP_GRAIN_KIND_ELLIPSE = 0,
  EP_GRAIN_KIND_DISK = 1,
} EpGrainKind;

// Status codes returned by every fallible function.
typedef enum EpStatus {
  // Success.
  EP_STATUS_OK = 0,
  // A parameter violated a precondition.
  EP_STATUS_INVALID_ARGUMENT = 1,
  // The model refused the run (e.g. infinite hitting intensity).
  EP_STATUS_MODEL_ERROR = 2,
  // A null pointer was passed where a value is required.
  EP_STATUS_NULL_POINTER = 3,
  // Internal panic; state is unspecified but memory-safe.
  EP_STATUS_PANIC = 4,
} EpStatus;

// Opaque sampled configuration.
typedef struct EpConfig EpConfig;

// Result record of a replicated estimate.
typedef struct EpEstimate {
  uint64_t n;
  uint64_t successes;
  double phat;
  double ci_lo;
  double ci_hi;
} EpEstimate;

// Result record of the recursion certification.
typedef struct EpRecursion {
  double epsilon;
  uint64_t k0;
  double u0;
  // 1 when the decay envelope holds up to `k_max`.
  int32_t pass;
} EpRecursion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string of the library; static storage, do not free.
const char *ep_version(void);

// Most recent error message on this thread, or NULL; static until the next
// failing call, do not free.
const char *ep_last_error_message(void);

// Release a string returned by this library.
//
// # Safety
// `s` must come from this library and not have been freed before.
void ep_string_free(char *s);

// Sample the exact hit process on the box of height `l` and width `k*l`.
// Pass `law_json = NULL` to use `pareto(alpha)`; otherwise `alpha` is
// ignored and the law comes from the JSON object (same schema as the
// configuration files).
//
// # Safety
// `out` must be a valid pointer; `law_json`, when non-null, must be a valid
// NUL-terminated string.
enum EpStatus ep_config_sample(double alpha,
                               const char *law_json,
                               double u,
                               double l,
                               double k,
                               enum EpGrainKind grain,
                               uint64_t seed,
                               struct EpConfig **out);

// Truncated variant: homogeneous centers on a disk of `trunc_radius`.
//
// # Safety
// As [`ep_config_sample`]; `error_bound_out` may be NULL.
enum EpStatus ep_config_sample_truncated(double alpha,
                                         const char *law_json,
                                         double u,
                                         double l,
                                         double k,
                                         enum EpGrainKind grain,
                                         double trunc_radius,
                                         uint64_t seed,
                                         struct EpConfig **out,
                                         double *error_bound_out);

// Parse a configuration from its JSON representation.
//
// # Safety
// `json` must be a valid NUL-terminated string, `out` a valid pointer.
enum EpStatus ep_config_from_json(const char *json, struct EpConfig **out);

// Serialize a configuration to JSON (free with [`ep_string_free`]).
//
// # Safety
// `config` must be a live handle, `out` a valid pointer.
enum EpStatus ep_config_to_json(const struct EpConfig *config, char **out);

// Number of grains in the configuration.
//
// # Safety
// `config` must be a live handle.
uint64_t ep_config_grain_count(const struct EpConfig *config);

// Release a configuration handle.
//
// # Safety
// `config` must come from this library and not have been freed before.
void ep_config_free(struct EpConfig *config);

// Evaluate a named event on a configuration (1 = occurred, 0 = not).
//
// # Safety
// `config` must be a live handle, `event` a valid NUL-terminated string,
// `out` a valid pointer.
enum EpStatus ep_event_eval(const struct EpConfig *config,
                            const char *event,
                            double l,
                            double k,
                            double a,
                            double eps,
                            int32_t *out);

// Replicated probability estimate with a Wilson interval at `level`.
// Grain kind, truncation (`trunc_radius <= 0` means the exact sampler) and
// the event geometry mirror the CLI flags.
//
// # Safety
// `event` must be a valid NUL-terminated string, `out` a valid pointer.
enum EpStatus ep_estimate(const char *event,
                          double alpha,
                          const char *law_json,
                          double u,
                          double l,
                          double k,
                          double a,
                          double eps,
                          enum EpGrainKind grain,
                          double trunc_radius,
                          uint64_t n,
                          uint64_t seed,
                          double level,
                          struct EpEstimate *out);

// Certify the annulus-connection decay envelope: computes `(epsilon, k0,
// u0)` for `(c7, alpha)` and checks `q_k <= exp(-epsilon k)` up to `k_max`
// at intensity `u` (pass `u < 0` to check the computed `u0`).
//
// # Safety
// `out` must be a valid pointer.
enum EpStatus ep_recursion_check(double c7,
                                 double alpha,
                                 double u,
                                 uint64_t k_max,
                                 struct EpRecursion *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ELLIPSEPERC_H */

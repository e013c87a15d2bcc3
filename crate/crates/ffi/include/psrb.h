#ifndef PSRB_H
#define PSRB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PsrbStatus {
  PSRB_STATUS_OK = 0,
  PSRB_STATUS_NULL_ARGUMENT = 1,
  PSRB_STATUS_INVALID_ARGUMENT = 2,
  PSRB_STATUS_NOT_FOUND = 3,
  PSRB_STATUS_PARSE_ERROR = 4,
  PSRB_STATUS_RUNTIME_ERROR = 5,
  PSRB_STATUS_PANIC = 6,
} PsrbStatus;

typedef enum PsrbRiskMode {
  PSRB_RISK_MODE_HARM = 0,
  PSRB_RISK_MODE_LITERAL = 1,
} PsrbRiskMode;

/**
 * Opaque expert case base.
 */
typedef struct PsrbCaseBase PsrbCaseBase;

/**
 * Opaque character profile.
 */
typedef struct PsrbProfile PsrbProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *psrb_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void psrb_string_free(char *s);

/**
 * Loads a case-base file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PsrbStatus psrb_case_base_load(const char *path, struct PsrbCaseBase **out);

/**
 * An empty case base: the governor then follows the rules strictly.
 *
 * # Safety
 * `out` must be writable.
 */
enum PsrbStatus psrb_case_base_empty(struct PsrbCaseBase **out);

/**
 * Number of cases, or 0 for NULL.
 *
 * # Safety
 * `kb` must be NULL or a live handle.
 */
size_t psrb_case_base_len(const struct PsrbCaseBase *kb);

/**
 * # Safety
 * `kb` must be NULL or a handle not yet freed.
 */
void psrb_case_base_free(struct PsrbCaseBase *kb);

/**
 * Creates a profile; each parameter must lie in [0, 10].
 *
 * # Safety
 * `out` must be writable.
 */
enum PsrbStatus psrb_profile_new(double c_w, double c_au, double c_rp, struct PsrbProfile **out);

/**
 * Looks a named profile up in a profiles TOML file.
 *
 * # Safety
 * `path` and `name` must be NUL-terminated strings; `out` must be writable.
 */
enum PsrbStatus psrb_profile_load(const char *path, const char *name, struct PsrbProfile **out);

/**
 * # Safety
 * `p` must be NULL or a handle not yet freed.
 */
void psrb_profile_free(struct PsrbProfile *p);

/**
 * Runs one episode. `responses` is a comma-separated cycle such as
 * `"SNOOZE,ACKNOWLEDGE"`; NULL selects that default. On success
 * `*out_json` receives the episode log (free with `psrb_string_free`) and
 * `*out_behaviour_id` its behaviour class. Either out-pointer may be NULL.
 *
 * # Safety
 * Handles must be live; strings NUL-terminated; out-pointers NULL or writable.
 */
enum PsrbStatus psrb_run_episode(const struct PsrbCaseBase *kb,
                                 const struct PsrbProfile *profile,
                                 uint8_t epsilon_m,
                                 uint32_t d,
                                 const char *responses,
                                 bool takes_medication,
                                 enum PsrbRiskMode risk_mode,
                                 char **out_json,
                                 uint32_t *out_behaviour_id);

/**
 * Shifted Gamma density (location -1) at `x`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PsrbStatus psrb_gamma_pdf(double x, double alpha, double beta, double *out);

/**
 * Most probable utility on the 0.05 grid over [-1, 1].
 *
 * # Safety
 * `out` must be writable.
 */
enum PsrbStatus psrb_pmax_util(double alpha, double beta, double *out);

/**
 * Risk figure of a wellbeing density.
 *
 * # Safety
 * `out` must be writable.
 */
enum PsrbStatus psrb_behaviour_risk(double alpha, double beta, enum PsrbRiskMode mode, double *out);

/**
 * Shape parameter for medicine impact 1, 2 or 3.
 *
 * # Safety
 * `out` must be writable.
 */
enum PsrbStatus psrb_shape_param(uint8_t epsilon_m, double *out);

double psrb_scale_param(double dose_count);

double psrb_risk_threshold(double c_rp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSRB_H */

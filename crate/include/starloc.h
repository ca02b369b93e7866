#ifndef STARLOC_H
#define STARLOC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StarlocStatus {
  STARLOC_STATUS_OK = 0,
  STARLOC_STATUS_NULL_POINTER = 1,
  STARLOC_STATUS_INVALID_UTF8 = 2,
  STARLOC_STATUS_PARSE_ERROR = 3,
  STARLOC_STATUS_INVALID_ARGUMENT = 4,
  STARLOC_STATUS_NOT_INVERTIBLE = 5,
  STARLOC_STATUS_VERIFICATION_FAILED = 6,
  STARLOC_STATUS_UNSUPPORTED = 7,
  STARLOC_STATUS_IO = 8,
  STARLOC_STATUS_INTERNAL = 9,
} StarlocStatus;

typedef enum StarlocSide {
  STARLOC_SIDE_RIGHT = 0,
  STARLOC_SIDE_LEFT = 1,
} StarlocSide;

/**
 * Opaque session handle.
 */
typedef struct StarlocSession StarlocSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a session from a JSON configuration, or the default one when
 * `config_json` is null.
 *
 * # Safety
 * `config_json` must be null or a NUL-terminated string; `out` must be a
 * writable pointer.
 */
enum StarlocStatus starloc_session_new(const char *config_json, struct StarlocSession **out);

/**
 * # Safety
 * `session` must be null or a handle from [`starloc_session_new`] not yet freed.
 */
void starloc_session_free(struct StarlocSession *session);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void starloc_string_free(char *s);

/**
 * Message for the most recent failed call on this thread, or null. The
 * pointer stays valid until the next call into this library on the thread.
 */
const char *starloc_last_error(void);

/**
 * Star product `u ⋆ v`, over the localization at `set` when it is non-null.
 *
 * # Safety
 * Pointers must be valid as described in the module documentation.
 */
enum StarlocStatus starloc_eval(const struct StarlocSession *session,
                                const char *u,
                                const char *v,
                                const char *set,
                                char **out);

/**
 * Star inverse of `g`, over the localization at `set` when it is non-null.
 *
 * # Safety
 * Pointers must be valid as described in the module documentation.
 */
enum StarlocStatus starloc_invert(const struct StarlocSession *session,
                                  const char *g,
                                  const char *set,
                                  char **out);

/**
 * Poisson bracket `{f, g}`.
 *
 * # Safety
 * Pointers must be valid as described in the module documentation.
 */
enum StarlocStatus starloc_bracket(const struct StarlocSession *session,
                                   const char *f,
                                   const char *g,
                                   char **out);

/**
 * Localization report (JSON) at `set`; `u` and `v` are both null or both set.
 *
 * # Safety
 * Pointers must be valid as described in the module documentation.
 */
enum StarlocStatus starloc_localize(const struct StarlocSession *session,
                                    const char *set,
                                    const char *u,
                                    const char *v,
                                    char **out);

/**
 * Bounded Ore witness search; writes the JSON report.
 *
 * # Safety
 * Pointers must be valid as described in the module documentation.
 */
enum StarlocStatus starloc_ore(const struct StarlocSession *session,
                               const char *r,
                               const char *s,
                               const char *set,
                               enum StarlocSide side,
                               uint32_t degree,
                               uint32_t exponent_bound,
                               char **out);

/**
 * Runs a verification suite (or `all`) and writes the results as a JSON array.
 *
 * # Safety
 * Pointers must be valid as described in the module documentation.
 */
enum StarlocStatus starloc_verify(const struct StarlocSession *session,
                                  const char *suite,
                                  char **out);

/**
 * The session product gauged by `exp(cλΔ)`, as star-product JSON.
 *
 * # Safety
 * Pointers must be valid as described in the module documentation.
 */
enum StarlocStatus starloc_gauge(const struct StarlocSession *session, const char *c, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STARLOC_H */

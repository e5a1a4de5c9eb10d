#ifndef ROAMAUTH_H
#define ROAMAUTH_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RaStatus {
  RA_STATUS_OK = 0,
  RA_STATUS_NULL_ARGUMENT = 1,
  RA_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The run finished and a party aborted; the JSON result is still set.
   */
  RA_STATUS_PROTOCOL_ABORT = 3,
  RA_STATUS_ATTACK_ERROR = 4,
  RA_STATUS_PANIC = 5,
} RaStatus;

/**
 * CA, home agent and foreign agent of the proposed scheme.
 */
typedef struct RaDeployment RaDeployment;

/**
 * Curve and algorithm choices.
 */
typedef struct RaSuite RaSuite;

/**
 * A registered mobile user: identity, password and card.
 */
typedef struct RaUser RaUser;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a suite for `curve` ("toy" or "p256").
 *
 * # Safety
 * `curve` must be NUL-terminated; `out` must be writable.
 */
enum RaStatus ra_suite_new(const char *curve, struct RaSuite **out_suite);

/**
 * # Safety
 * `suite` must come from [`ra_suite_new`] or be null.
 */
void ra_suite_free(struct RaSuite *suite);

/**
 * Generates a deployment deterministically from `seed`.
 *
 * # Safety
 * `suite` must be a live handle; `out` must be writable.
 */
enum RaStatus ra_deployment_new(const struct RaSuite *suite,
                                uint64_t seed,
                                struct RaDeployment **out_deployment);

/**
 * # Safety
 * `deployment` must come from [`ra_deployment_new`] or be null.
 */
void ra_deployment_free(struct RaDeployment *deployment);

/**
 * Registers `id` with the deployment's home agent.
 *
 * # Safety
 * `id` must be NUL-terminated, `password` readable for `password_len`
 * bytes and `out_user` writable.
 */
enum RaStatus ra_register(const struct RaDeployment *deployment,
                          const char *id,
                          const uint8_t *password,
                          size_t password_len,
                          uint64_t seed,
                          struct RaUser **out_user);

/**
 * Replaces the password the user types at login. The card is unchanged, so
 * a wrong value makes the next handshake fail locally.
 *
 * # Safety
 * `user` must be a live handle and `password` readable for `password_len`.
 */
enum RaStatus ra_user_set_password(struct RaUser *user,
                                   const uint8_t *password,
                                   size_t password_len);

/**
 * The user's smart card as JSON.
 *
 * # Safety
 * `user` must be a live handle; `out_json` must be writable.
 */
enum RaStatus ra_user_card_json(const struct RaUser *user, char **out_json);

/**
 * # Safety
 * `user` must come from [`ra_register`] or be null.
 */
void ra_user_free(struct RaUser *user);

/**
 * Runs `scenario` of the proposed scheme for a registered user. The result
 * JSON (rounds, bits, outcome, transcript) is written even when a party
 * aborts, in which case `RA_STATUS_PROTOCOL_ABORT` is returned.
 *
 * # Safety
 * Handles must be live; `scenario` NUL-terminated; `out_json` writable.
 */
enum RaStatus ra_handshake(const struct RaDeployment *deployment,
                           const struct RaUser *user,
                           const char *scenario,
                           uint64_t seed,
                           char **out_json);

/**
 * Generates a deployment and user from `seed` and runs one scenario.
 *
 * # Safety
 * `suite` must be live; strings NUL-terminated; `out_json` writable.
 */
enum RaStatus ra_run_session(const struct RaSuite *suite,
                             const char *scheme,
                             const char *scenario,
                             uint64_t seed,
                             char **out_json);

/**
 * Runs attack `attack` against `scheme`. `*out_succeeded` is 1 when the
 * attack succeeded with sound evidence, 0 otherwise.
 *
 * # Safety
 * `suite` must be live; strings NUL-terminated; outputs writable.
 */
enum RaStatus ra_run_attack(const struct RaSuite *suite,
                            const char *scheme,
                            const char *attack,
                            uint64_t seed,
                            int *out_succeeded,
                            char **out_json);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void ra_string_free(char *s);

/**
 * Message for the last failed call on this thread. Valid until the next
 * call into the library from the same thread; never null.
 */
const char *ra_last_error_message(void);

/**
 * Library version, static.
 */
const char *ra_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ROAMAUTH_H */

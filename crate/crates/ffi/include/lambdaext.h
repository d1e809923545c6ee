#ifndef LAMBDAEXT_H
#define LAMBDAEXT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LX_ABI_VERSION 1

typedef enum LxStatus {
  LX_STATUS_OK = 0,
  LX_STATUS_NULL_POINTER = 1,
  LX_STATUS_INVALID_UTF8 = 2,
  LX_STATUS_PARSE = 3,
  LX_STATUS_UNKNOWN_NAME = 4,
  LX_STATUS_DOMAIN = 5,
  LX_STATUS_INVALID_MODULE = 6,
  LX_STATUS_WINDOW_TOO_LARGE = 7,
  LX_STATUS_NOT_A_CYCLE = 8,
  LX_STATUS_CACHE_CORRUPT = 9,
  LX_STATUS_IO = 10,
  LX_STATUS_INTERNAL = 11,
} LxStatus;

/**
 * A module of cells with a Steenrod action.
 */
typedef struct LxModule LxModule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t lx_abi_version(void);

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *lx_last_error(void);

/**
 * Build a module from a spec such as `S0`, `P(1,8)`, `Pt62` or `file:<path>`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LxStatus lx_module_new(const char *spec, struct LxModule **out);

/**
 * Build a module from the text of a module file.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LxStatus lx_module_from_toml(const char *text, struct LxModule **out);

/**
 * # Safety
 * `m` must come from a module constructor and not be freed already. Null
 * is ignored.
 */
void lx_module_free(struct LxModule *m);

/**
 * Name of the module, to be freed with [`lx_string_free`].
 *
 * # Safety
 * `m` must be a live module and `out` a valid pointer.
 */
enum LxStatus lx_module_name(const struct LxModule *m, char **out);

/**
 * `dim Ext^{s,t}` of the module.
 *
 * # Safety
 * `m` must be a live module and `out` a valid pointer.
 */
enum LxStatus lx_ext_dim(const struct LxModule *m, uint32_t s, uint32_t t, size_t *out);

/**
 * Admissible form of a lambda algebra expression such as `l3 l7 + l5^2`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LxStatus lx_chain_normalize(const char *text, char **out);

/**
 * Differential of a chain. With a null module the chain is a lambda
 * algebra expression, otherwise a chain like `e2 l1 + e1 l2` in `m`.
 *
 * # Safety
 * `m` must be null or a live module, `text` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum LxStatus lx_chain_delta(const struct LxModule *m, const char *text, char **out);

/**
 * The vector-field number of `n >= 2`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum LxStatus lx_rho(uint64_t n, uint64_t *out);

/**
 * Cap on the chain basis of a single bidegree.
 */
void lx_set_max_basis(size_t cap);

/**
 * # Safety
 * `s` must come from this library and not be freed already. Null is
 * ignored.
 */
void lx_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAMBDAEXT_H */

/* mfld: mean-field / gradient-complexity toolkit, C interface.
 *
 * Every function returns an mfld_status. On failure a message is available
 * from mfld_last_error() (thread-local, valid until the next call on the
 * same thread). Strings handed out by the library are released with
 * mfld_string_free; measures with mfld_measure_free.
 *
 * Vertices of {-1,1}^n are uint32 indices: bit i set <=> coordinate i is +1.
 */
#ifndef MFLD_H
#define MFLD_H

#include <stddef.h>
#include <stdint.h>

#if defined(MFLD_BUILDING_LIBRARY)
#define MFLD_API __attribute__((visibility("default")))
#else
#define MFLD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfld_status {
    MFLD_OK = 0,
    MFLD_E_INVALID_ARGUMENT = 1,
    MFLD_E_DOMAIN = 2,   /* hypothesis of a formula fails */
    MFLD_E_CAPACITY = 3, /* dimension or enumeration cap exceeded */
    MFLD_E_NUMERICAL = 4,
    MFLD_E_IO = 5,
    MFLD_E_INTERNAL = 6
} mfld_status;

typedef struct mfld_measure mfld_measure;

MFLD_API const char* mfld_version(void);
MFLD_API const char* mfld_last_error(void);
MFLD_API void mfld_string_free(char* s);
/* 0 = MFLD_THREADS or hardware concurrency; results never depend on it */
MFLD_API mfld_status mfld_set_threads(int threads);

/* JSON request/response entry point used by the command-line tool.
 * commands: complexity, meanfield.solve, meanfield.phi, transport.w1,
 * ld.bound, ld.tail, localize, gaussian.lsi, gaussian.tilt,
 * gaussian.follmer, ergm.decompose, verify.
 * *response is set only on MFLD_OK. */
MFLD_API mfld_status mfld_run(const char* command, const char* request_json, char** response_json);

/* Measures. values has 2^n entries of log-density (relative to uniform,
 * unnormalized); -INFINITY marks atoms of zero mass. */
MFLD_API mfld_status mfld_measure_from_log_density(int n, const double* values, mfld_measure** out);
MFLD_API mfld_status mfld_measure_from_json(const char* json, mfld_measure** out);
MFLD_API mfld_status mfld_measure_uniform(int n, mfld_measure** out);
MFLD_API mfld_status mfld_measure_tilt(const mfld_measure* nu, const double* theta, mfld_measure** out);
MFLD_API void mfld_measure_free(mfld_measure* nu);

MFLD_API mfld_status mfld_measure_dim(const mfld_measure* nu, int* n);
/* out has 2^n slots */
MFLD_API mfld_status mfld_measure_probabilities(const mfld_measure* nu, double* out);
/* out has n slots */
MFLD_API mfld_status mfld_measure_g(const mfld_measure* nu, uint32_t vertex, double* out);
MFLD_API mfld_status mfld_measure_center(const mfld_measure* nu, double* out);
/* n*n, row-major */
MFLD_API mfld_status mfld_measure_h_matrix(const mfld_measure* nu, double* out);
/* +INFINITY when a is not absolutely continuous w.r.t. b */
MFLD_API mfld_status mfld_measure_kl(const mfld_measure* a, const mfld_measure* b, double* out);
MFLD_API mfld_status mfld_measure_w1(const mfld_measure* a, const mfld_measure* b, double* out);
/* sqrt(n Tr H(nu)) */
MFLD_API mfld_status mfld_measure_step1_bound(const mfld_measure* nu, double* out);
/* u in [-1,1]^n; deterministic threshold sampler */
MFLD_API mfld_status mfld_measure_sample(const mfld_measure* nu, const double* u, uint32_t* out);
MFLD_API mfld_status mfld_measure_to_json(const mfld_measure* nu, char** out);

#ifdef __cplusplus
}
#endif

#endif

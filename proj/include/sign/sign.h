/* Public C API for the SIGN graph-learning engine.
 *
 * Everything is exposed through opaque handles and integer status codes so
 * the shared library keeps a stable ABI. On any SIGN_* failure status the
 * thread-local message from sign_last_error() describes the problem.
 */
#ifndef SIGN_SIGN_H
#define SIGN_SIGN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sign_status {
    SIGN_OK = 0,
    SIGN_ERR_INVALID_ARGUMENT = 1,
    SIGN_ERR_IO = 2,
    SIGN_ERR_PARSE = 3,
    SIGN_ERR_CORRUPT = 4,
    SIGN_ERR_INTERNAL = 5
} sign_status;

/* Library version string, e.g. "0.1.0". */
const char* sign_version(void);

/* Thread-local message for the most recent failing call on this thread.
 * Never NULL; empty string when no error has occurred. */
const char* sign_last_error(void);

/* Global math thread-count hint. Results are identical for any value. */
sign_status sign_set_threads(int num_threads);

/* ------------------------------------------------------------------ */
/* Run configuration (flat key = value file).                          */

typedef struct sign_config sign_config;

sign_status sign_config_load(const char* path, sign_config** out);
sign_status sign_config_create(sign_config** out); /* empty config */
/* Insert or overwrite one key (how --seed/--rows overrides are applied). */
sign_status sign_config_set(sign_config* cfg, const char* key, const char* value);
void sign_config_free(sign_config* cfg);

/* ------------------------------------------------------------------ */
/* Batch commands. Human-readable progress/timing lines go to stdout.  */

sign_status sign_run_precompute(const sign_config* cfg);
sign_status sign_run_train(const sign_config* cfg);
sign_status sign_run_infer(const sign_config* cfg);
sign_status sign_run_eval(const sign_config* cfg);
sign_status sign_run_bench(const sign_config* cfg);
sign_status sign_run_gen_sbm(const sign_config* cfg);
sign_status sign_run_analyze_triangles(const sign_config* cfg);

/* ------------------------------------------------------------------ */
/* In-process serving: open a precomputed bundle and a trained model,  */
/* then predict for arbitrary row subsets. No graph access anywhere.   */

typedef struct sign_bundle sign_bundle;
typedef struct sign_model sign_model;

sign_status sign_bundle_open(const char* dir, sign_bundle** out);
void sign_bundle_free(sign_bundle* bundle);
sign_status sign_bundle_info(const sign_bundle* bundle, uint64_t* num_nodes,
                             uint64_t* feature_dim, uint64_t* num_operators);

sign_status sign_model_open(const char* dir, sign_model** out);
void sign_model_free(sign_model* model);
/* task_is_multilabel: 0 = multiclass, 1 = multilabel. */
sign_status sign_model_info(const sign_model* model, uint64_t* num_classes,
                            int* task_is_multilabel);

/* Predict for `num_rows` node indices.
 * Multiclass: writes num_rows values (class ids) into `out`.
 * Multilabel: writes num_rows * num_classes 0/1 flags, row-major.
 * `out_capacity` is the number of doubles available at `out`. */
sign_status sign_predict(sign_model* model, const sign_bundle* bundle,
                         const uint64_t* rows, size_t num_rows, double* out,
                         size_t out_capacity);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SIGN_SIGN_H */

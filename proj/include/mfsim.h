/*
 * mfsim - flow-level simulator of multi-stage prefill communication in
 * disaggregated LLM serving, with deadline-aware scheduling policies.
 *
 * C API: opaque handles, integer error codes, thread-local error strings.
 */
#ifndef MFSIM_H
#define MFSIM_H

#ifdef __cplusplus
extern "C" {
#endif

#define MFSIM_OK 0
#define MFSIM_ERR_INVALID_ARG 1
#define MFSIM_ERR_CONFIG 2
#define MFSIM_ERR_WORKLOAD 3
#define MFSIM_ERR_IO 4
#define MFSIM_ERR_SIM 5
#define MFSIM_ERR_INTERNAL 6

typedef struct mfsim_config mfsim_config;

/* Library version string, static storage. */
const char* mfsim_version(void);

/* Message for the last failing call on this thread, static storage. */
const char* mfsim_last_error(void);

/* Empty config (library defaults for every key). Never fails. */
mfsim_config* mfsim_config_create(void);

/* Parse a `key = value` config file; NULL on error (see mfsim_last_error). */
mfsim_config* mfsim_config_load(const char* path);

int mfsim_config_set(mfsim_config* cfg, const char* key, const char* value);

/* Value for a key, or NULL when unset. The pointer lives until the next
 * mfsim_config_set/destroy on this handle. */
const char* mfsim_config_get(const mfsim_config* cfg, const char* key);

void mfsim_config_destroy(mfsim_config* cfg);

/*
 * Run one simulation.
 *   out_dir          optional; when set, writes requests.csv + summary.json
 *   summary_json_out optional; when set, receives a malloc'd summary string
 *                    to release with mfsim_string_free
 * Policy, load, and seed come from the config keys `policy`,
 * `workload.rate_rps`, and `sim.seed`.
 */
int mfsim_run(const mfsim_config* cfg, const char* out_dir, char** summary_json_out);

void mfsim_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* MFSIM_H */

/* C interface to the joint dynamic frailty model engine.
 *
 * Conventions:
 *   - Every fallible function returns a jdfm_status; JDFM_OK is 0.
 *   - On failure, jdfm_last_error() returns a thread-local message describing
 *     the most recent error on the calling thread.
 *   - Objects returned through out-parameters are owned by the caller and
 *     released with the matching *_free function. Strings returned through
 *     char** are released with jdfm_string_free.
 *   - Configuration documents are JSON text; see the README for the schema.
 */
#ifndef JDFM_H
#define JDFM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jdfm_status {
  JDFM_OK = 0,
  JDFM_ERR_INVALID_ARGUMENT = 1,
  JDFM_ERR_IO = 2,
  JDFM_ERR_RUNTIME = 3
} jdfm_status;

typedef struct jdfm_dataset jdfm_dataset;
typedef struct jdfm_fit jdfm_fit;

/* Library semantic version, e.g. "0.1.0". Static storage; do not free. */
const char* jdfm_version(void);

/* Message for the most recent failure on this thread; empty string if none.
 * Valid until the next failing jdfm_* call on the same thread. */
const char* jdfm_last_error(void);

void jdfm_string_free(char* text);

/* ---- datasets ---- */

/* Loads subjects/events CSV files. n_types = 0 infers the recurrent type
 * count from the events file. */
jdfm_status jdfm_dataset_load(const char* subjects_csv_path, const char* events_csv_path,
                              size_t n_types, jdfm_dataset** out);

/* Simulates a dataset from a scenario JSON document (the "scenario" section
 * of the run-configuration schema). */
jdfm_status jdfm_dataset_simulate(const char* scenario_json, uint64_t seed, jdfm_dataset** out);

/* Writes the dataset as canonical subjects/events CSV files. */
jdfm_status jdfm_dataset_write(const jdfm_dataset* data, const char* subjects_csv_path,
                               const char* events_csv_path);

jdfm_status jdfm_dataset_counts(const jdfm_dataset* data, size_t* n_subjects, size_t* n_types,
                                size_t* n_covariates);

void jdfm_dataset_free(jdfm_dataset* data);

/* ---- model evaluation ---- */

/* Joint log likelihood at a fixed parameter point. params_json:
 *   {
 *     "nu": 2.0,
 *     "frailties": [...],                       // optional, default all 1
 *     "beta": {"terminal": [...], "recurrent": [[...], ...]},
 *     "alpha": [[...], ...] | {"same_type": [...]},
 *     "gamma": [...],
 *     "increments": [[...], ...]                // (Q+1) x M, row 0 = terminal
 *   }
 * M is the pooled event-grid size (one entry per distinct event time). */
jdfm_status jdfm_log_likelihood(const jdfm_dataset* data, const char* params_json, double* out);

/* ---- fitting ---- */

/* Runs the MCMC fit. config_json is a run-configuration document; its
 * "priors" and "mcmc" sections are consulted (defaults apply when absent).
 * seed and workers are passed explicitly. */
jdfm_status jdfm_fit_run(const jdfm_dataset* data, const char* config_json, uint64_t seed,
                         size_t workers, jdfm_fit** out);

/* Writes the draws archive directory for a completed fit. */
jdfm_status jdfm_fit_write(const jdfm_fit* fit, const char* directory);

/* Posterior summary as JSON text (parameter names, means, intervals,
 * diagnostics). Caller frees with jdfm_string_free. */
jdfm_status jdfm_fit_summary_json(const jdfm_fit* fit, char** out);

void jdfm_fit_free(jdfm_fit* fit);

/* ---- one-shot commands ---- */

/* Parses a run-configuration document, applies the optional overrides
 * (non-NULL pointers win over the document's values), executes the command,
 * and returns the command's result JSON. command = NULL uses the document's
 * "command" field. */
jdfm_status jdfm_run(const char* config_json, const char* command, const uint64_t* seed,
                     const int32_t* workers, const char* out_dir, char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* JDFM_H */

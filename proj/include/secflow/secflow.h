#ifndef SECFLOW_SECFLOW_H
#define SECFLOW_SECFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(SECFLOW_BUILDING_LIBRARY)
#define SECFLOW_API __attribute__((visibility("default")))
#else
#define SECFLOW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; on failure a one-line
 * message is available from secflow_last_error() on the calling thread. */
typedef enum secflow_status {
  SECFLOW_OK = 0,
  SECFLOW_E_INVALID_ARGUMENT = 1,
  SECFLOW_E_PARSE = 2,
  SECFLOW_E_VALIDATION = 3,
  SECFLOW_E_CONFIG = 4,
  SECFLOW_E_UNSCHEDULABLE = 5,
  SECFLOW_E_KEY = 6,
  SECFLOW_E_TRAINING = 7,
  SECFLOW_E_EVALUATION = 8,
  SECFLOW_E_PREDICTION = 9,
  SECFLOW_E_SELECTION = 10,
  SECFLOW_E_FITTING = 11,
  SECFLOW_E_ASSESSMENT = 12,
  SECFLOW_E_DOMAIN = 13,
  SECFLOW_E_NO_BACKUP = 14,
  SECFLOW_E_IO = 15,
  SECFLOW_E_INTERNAL = 99
} secflow_status;

typedef struct secflow_dataset secflow_dataset;
typedef struct secflow_detector secflow_detector;
typedef struct secflow_severity secflow_severity;
typedef struct secflow_bundle secflow_bundle;

SECFLOW_API const char* secflow_version(void);
SECFLOW_API const char* secflow_status_name(secflow_status status);
/* Message of the last failed call on this thread, "" if none. */
SECFLOW_API const char* secflow_last_error(void);
/* Releases any string returned through a char** out-parameter. */
SECFLOW_API void secflow_string_free(char* s);

/* ---- Scoring -------------------------------------------------------------
 * CIA triples are (c, i, a). Cost weights are (price, time, security, value);
 * cost components and reward attributes are (price, time, mitigation, value)
 * and (price, time, value, mitigation) respectively. */

SECFLOW_API secflow_status secflow_attack_score(const double task[3], const double impact[3], double afr,
                                                double level, double* out);
SECFLOW_API secflow_status secflow_mitigation_score(const double task[3], const double impact[3],
                                                    const double mitigation[3], double* out);
/* Writes n normalised values to out (which may alias values). */
SECFLOW_API secflow_status secflow_normalize(const double* values, size_t n, double* out);
SECFLOW_API secflow_status secflow_adaptation_cost(const double weights[4], const double normalized[4], double* out);
SECFLOW_API secflow_status secflow_reward(const double observed[4], const double lo[4], const double hi[4],
                                          const double weights[4], double* out);

/* ---- Telemetry datasets ---------------------------------------------------
 * kind is "ntd" or "clf". */

SECFLOW_API secflow_status secflow_dataset_generate(const char* kind, size_t n, uint64_t seed, int three_bands,
                                                    secflow_dataset** out);
/* meta_path may be NULL. */
SECFLOW_API secflow_status secflow_dataset_load(const char* path, const char* meta_path, secflow_dataset** out);
SECFLOW_API secflow_status secflow_dataset_save(const secflow_dataset* ds, const char* path, const char* meta_path);
SECFLOW_API secflow_status secflow_dataset_split(const secflow_dataset* ds, double train_fraction, uint64_t seed,
                                                 secflow_dataset** train, secflow_dataset** test);
SECFLOW_API size_t secflow_dataset_size(const secflow_dataset* ds);
SECFLOW_API size_t secflow_dataset_feature_count(const secflow_dataset* ds);
SECFLOW_API void secflow_dataset_free(secflow_dataset* ds);

/* ---- Detectors -------------------------------------------------------------
 * kind is "random_forest" or "linear". Labels are indices into
 * (normal, dos, probe, u2r, r2l). */

SECFLOW_API secflow_status secflow_detector_train(const secflow_dataset* train, const char* kind, uint64_t seed,
                                                  secflow_detector** out);
SECFLOW_API secflow_status secflow_detector_predict(const secflow_detector* model, const double* features, size_t n,
                                                    int* label);
/* JSON object with accuracy and per-label f1, far, recall and support. */
SECFLOW_API secflow_status secflow_detector_evaluate(const secflow_detector* model, const secflow_dataset* test,
                                                     char** metrics_json);
SECFLOW_API secflow_status secflow_detector_to_json(const secflow_detector* model, char** out);
SECFLOW_API secflow_status secflow_detector_from_json(const char* text, secflow_detector** out);
SECFLOW_API void secflow_detector_free(secflow_detector* model);

/* ---- Severity ---------------------------------------------------------------*/

SECFLOW_API secflow_status secflow_severity_fit(const secflow_dataset* ds, uint64_t seed, secflow_severity** out);
/* level receives 0 (low), 1 (medium) or 2 (high); l its numeric weight. */
SECFLOW_API secflow_status secflow_severity_assess(const secflow_severity* model, const char* kind,
                                                   const char* attack, const double* features, size_t n, int* level,
                                                   double* l);
SECFLOW_API secflow_status secflow_severity_to_json(const secflow_severity* model, char** out);
SECFLOW_API secflow_status secflow_severity_from_json(const char* text, secflow_severity** out);
SECFLOW_API void secflow_severity_free(secflow_severity* model);

/* ---- Model bundles ----------------------------------------------------------*/

/* Forests and severity models for both channels. options_json may be NULL or
 * an object with records, train_fraction, trees, max_depth, min_leaf. */
SECFLOW_API secflow_status secflow_bundle_train(const char* options_json, uint64_t seed, secflow_bundle** out);
SECFLOW_API secflow_status secflow_bundle_create(const secflow_detector* ntd, const secflow_detector* clf,
                                                 const secflow_severity* severity, secflow_bundle** out);
SECFLOW_API secflow_status secflow_bundle_to_json(const secflow_bundle* bundle, char** out);
SECFLOW_API secflow_status secflow_bundle_from_json(const char* text, secflow_bundle** out);
SECFLOW_API void secflow_bundle_free(secflow_bundle* bundle);

/* ---- Generators ---------------------------------------------------------------*/

SECFLOW_API secflow_status secflow_generate_multicloud(uint64_t seed, char** cloud_json);
/* cls is "small", "medium" or "large"; cloud_json may be NULL. */
SECFLOW_API secflow_status secflow_generate_workflow(const char* cls, uint64_t seed, const char* cloud_json,
                                                     char** workflow_json);

/* ---- Experiments ----------------------------------------------------------------
 * config_json is a settings document (NULL for defaults). The bundle may be
 * NULL when the detection mode is "always" or "never". Output pointers may be
 * NULL when the artifact is not wanted. */

/* The effective settings document, defaults filled in. */
SECFLOW_API secflow_status secflow_config_resolve(const char* config_json, char** out);

/* One strategy on the first configured class. qtable_json seeds the Adaptive
 * strategy and may be NULL. */
SECFLOW_API secflow_status secflow_simulate(const char* config_json, const secflow_bundle* bundle,
                                            const char* qtable_json, char** aggregate_csv, char** event_log,
                                            char** qtable_out);
/* Adaptive strategy on the first configured class; returns the learned table. */
SECFLOW_API secflow_status secflow_train_rl(const char* config_json, const secflow_bundle* bundle, char** qtable_out);
/* LowestCost against Adaptive for every configured class. */
SECFLOW_API secflow_status secflow_compare(const char* config_json, const secflow_bundle* bundle,
                                           char** aggregate_csv, char** window_csv);
/* Markdown from emitted tables; any argument may be NULL. */
SECFLOW_API secflow_status secflow_report(const char* aggregate_csv, const char* window_csv, const char* metrics_csv,
                                          char** markdown);

#ifdef __cplusplus
}
#endif

#endif

/*
 * hiot: C interface to the healthcare-IoT DDoS detection pipeline.
 *
 * Every handle is opaque and owned by the caller once returned; release it
 * with the matching *_free function. Functions returning hiot_status leave a
 * message for hiot_last_error() on failure. Status codes double as the CLI's
 * process exit codes.
 */
#ifndef HIOT_H
#define HIOT_H

#include <stddef.h>
#include <stdint.h>

#if defined(HIOT_BUILDING_LIBRARY)
#define HIOT_API __attribute__((visibility("default")))
#else
#define HIOT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  HIOT_OK = 0,
  HIOT_ERROR_USAGE = 1,    /* null handle or bad argument */
  HIOT_ERROR_CONFIG = 2,
  HIOT_ERROR_PARSE = 3,    /* malformed trace line */
  HIOT_ERROR_DATA = 4,     /* unusable input data: too few rows, bad CSV, shape mismatch */
  HIOT_ERROR_NUMERIC = 5,  /* training diverged or non-finite activations */
  HIOT_ERROR_IO = 6,
  HIOT_ERROR_EVAL = 7,
  HIOT_ERROR_INTERNAL = 70
} hiot_status;

typedef enum { HIOT_FORMAT_TEXT = 0, HIOT_FORMAT_JSON = 1 } hiot_format;

typedef struct hiot_config hiot_config;
typedef struct hiot_features hiot_features;
typedef struct hiot_model hiot_model;
typedef struct hiot_report hiot_report;

/* Library version, including the model file format version. */
HIOT_API const char* hiot_version(void);

/* Message of the last failed call on this thread; "" if none. */
HIOT_API const char* hiot_last_error(void);

/* Releases strings returned through char** out-parameters. */
HIOT_API void hiot_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

HIOT_API hiot_status hiot_config_default(hiot_config** out);
/* Accepts a run config or a run manifest written by hiot_write_manifest. */
HIOT_API hiot_status hiot_config_load(const char* path, hiot_config** out);
/* Sets both the simulation seed and the training seed. */
HIOT_API hiot_status hiot_config_set_seed(hiot_config* config, uint64_t seed);
HIOT_API hiot_status hiot_config_set_window(hiot_config* config, size_t window);
HIOT_API hiot_status hiot_config_set_epochs(hiot_config* config, size_t epochs);
HIOT_API hiot_status hiot_config_set_lenient_parse(hiot_config* config, int lenient);
/* One of "sigmoid", "softmax", "relu", "tanh". */
HIOT_API hiot_status hiot_config_set_activation(hiot_config* config, const char* name);
HIOT_API hiot_status hiot_config_to_json(const hiot_config* config, char** out);
HIOT_API void hiot_config_free(hiot_config* config);

/* ---- stages ----------------------------------------------------------- */

/* Runs the traffic generator and writes the log trace and ground-truth CSV. */
HIOT_API hiot_status hiot_simulate(const hiot_config* config, const char* trace_path,
                                   const char* truth_path, size_t* event_count);

/* Parses a trace and computes per-send-event features. */
HIOT_API hiot_status hiot_extract(const hiot_config* config, const char* trace_path,
                                  const char* truth_path, hiot_features** out);
HIOT_API hiot_status hiot_features_load(const char* path, hiot_features** out);
HIOT_API hiot_status hiot_features_save(const hiot_features* features, const char* path);
HIOT_API size_t hiot_features_count(const hiot_features* features);
HIOT_API void hiot_features_free(hiot_features* features);

/* Sequential split, windowing, train-fitted scaling, then SGD training. */
HIOT_API hiot_status hiot_train(const hiot_config* config, const hiot_features* features,
                                hiot_model** out);
HIOT_API size_t hiot_model_epoch_count(const hiot_model* model);
HIOT_API double hiot_model_epoch_loss(const hiot_model* model, size_t epoch);
HIOT_API double hiot_model_training_seconds(const hiot_model* model);
HIOT_API hiot_status hiot_model_save(const hiot_model* model, const char* path);
HIOT_API hiot_status hiot_model_load(const char* path, hiot_model** out);
HIOT_API void hiot_model_free(hiot_model* model);

/* Node-level evaluation on the test split. Window length and output
 * activation are taken from the model. */
HIOT_API hiot_status hiot_evaluate(const hiot_config* config, const hiot_model* model,
                                   const hiot_features* features, hiot_report** out);
/* Mean-psi threshold classifier on the test split. */
HIOT_API hiot_status hiot_baseline(const hiot_config* config, const hiot_features* features,
                                   double threshold_seconds, hiot_report** out);
HIOT_API double hiot_report_accuracy(const hiot_report* report);
HIOT_API double hiot_report_error_rate(const hiot_report* report);
HIOT_API hiot_status hiot_report_render(const hiot_report* report, hiot_format format, char** out);
HIOT_API hiot_status hiot_report_save(const hiot_report* report, hiot_format format,
                                      const char* path);
HIOT_API void hiot_report_free(hiot_report* report);

/* Trains one model per output activation; renders the results table. */
HIOT_API hiot_status hiot_activation_sweep(const hiot_config* config, const hiot_features* features,
                                           hiot_format format, char** out);

HIOT_API hiot_status hiot_write_manifest(const hiot_config* config, const char* path,
                                         const char* command, const char* const* inputs,
                                         size_t input_count, const char* const* outputs,
                                         size_t output_count);

#ifdef __cplusplus
}
#endif

#endif /* HIOT_H */

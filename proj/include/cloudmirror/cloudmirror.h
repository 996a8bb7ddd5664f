#ifndef CLOUDMIRROR_H
#define CLOUDMIRROR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CM_API __declspec(dllexport)
#else
#define CM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes 1..13 mirror cloudmirror::ErrorCode. */
typedef enum cm_status {
  CM_OK = 0,
  CM_ERR_PARSE = 1,
  CM_ERR_VALIDATION = 2,
  CM_ERR_PLACEMENT = 3,
  CM_ERR_CONFIGURATION = 4,
  CM_ERR_OVERCOMMIT = 5,
  CM_ERR_LOOKUP = 6,
  CM_ERR_NOT_FOUND = 7,
  CM_ERR_DOMAIN = 8,
  CM_ERR_MAPPING = 9,
  CM_ERR_EMPTY_OVERLAP = 10,
  CM_ERR_INPUT = 11,
  CM_ERR_SCENARIO = 12,
  CM_ERR_IO = 13,
  CM_ERR_INVALID_ARGUMENT = 14, /* null handle or output pointer */
  CM_ERR_INTERNAL = 15
} cm_status;

/* Message of the last failed call on this thread; "" if none. */
CM_API const char* cm_last_error(void);
CM_API const char* cm_status_name(cm_status status);

/* Strings returned through char** outputs are owned by the caller. */
CM_API void cm_string_free(char* s);

/* ---- charger registry ---- */

typedef struct cm_registry cm_registry;

CM_API cm_status cm_registry_load(const char* csv, size_t len, cm_registry** out);
CM_API void cm_registry_free(cm_registry* registry);
CM_API size_t cm_registry_count(const cm_registry* registry);
CM_API cm_status cm_registry_closest(const cm_registry* registry, double lat, double lon,
                                     size_t* id, double* distance_km);
/* Writes up to capacity hits ordered by (distance, id); *count receives the
 * total number of hits, which may exceed capacity. */
CM_API cm_status cm_registry_in_range(const cm_registry* registry, double lat, double lon,
                                      double radius_km, size_t* ids, double* distances_km,
                                      size_t capacity, size_t* count);
CM_API cm_status cm_haversine_km(double lat1, double lon1, double lat2, double lon2,
                                 double* out);
CM_API cm_status cm_fixture_csv(size_t rows, uint64_t seed, char** out_csv);

/* ---- scenario and ground-truth generation ---- */

typedef struct cm_scenario cm_scenario;

CM_API cm_status cm_scenario_parse(const char* json, size_t len, cm_scenario** out);
CM_API void cm_scenario_free(cm_scenario* scenario);

/* Runs the scenario and returns the three telemetry documents. */
CM_API cm_status cm_generate(const cm_registry* registry, const cm_scenario* scenario,
                             char** snapshot_json, char** traces_json, char** metrics_json);

/* ---- mirroring ---- */

typedef struct cm_mirror_config cm_mirror_config;

CM_API cm_status cm_mirror_config_parse(const char* json, size_t len, cm_mirror_config** out);
CM_API void cm_mirror_config_free(cm_mirror_config* config);

/* config may be NULL for defaults. */
CM_API cm_status cm_mirror(const char* snapshot_json, const char* traces_json,
                           const cm_mirror_config* config, char** metrics_json);

/* ---- deviation analysis ---- */

typedef struct cm_deviation_params cm_deviation_params;
typedef struct cm_report cm_report;

CM_API cm_status cm_deviation_params_parse(const char* json, size_t len,
                                           cm_deviation_params** out);
CM_API void cm_deviation_params_free(cm_deviation_params* params);

/* params may be NULL for defaults. */
CM_API cm_status cm_compare(const char* simulated_metrics_json, const char* observed_metrics_json,
                            const cm_deviation_params* params, cm_report** out);
CM_API int cm_report_anomalous(const cm_report* report);
CM_API size_t cm_report_interval_count(const cm_report* report, const char* subject);
CM_API cm_status cm_report_json(const cm_report* report, char** out);
CM_API cm_status cm_report_table(const cm_report* report, char** out);
CM_API void cm_report_free(cm_report* report);

#ifdef __cplusplus
}
#endif

#endif

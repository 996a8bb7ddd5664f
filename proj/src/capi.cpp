#include "cloudmirror/cloudmirror.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "cloudmirror/anomaly.hpp"
#include "cloudmirror/error.hpp"
#include "cloudmirror/mirror.hpp"
#include "cloudmirror/registry.hpp"
#include "cloudmirror/scenario.hpp"
#include "cloudmirror/telemetry.hpp"

struct cm_registry {
  cloudmirror::Registry registry;
};
struct cm_scenario {
  cloudmirror::Scenario scenario;
};
struct cm_mirror_config {
  cloudmirror::MirrorConfig config;
};
struct cm_deviation_params {
  cloudmirror::DeviationParams params;
};
struct cm_report {
  cloudmirror::DeviationReport report;
};

namespace {

thread_local std::string last_error;

cm_status fail(cm_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
cm_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return CM_OK;
  } catch (const cloudmirror::Error& e) {
    return fail(static_cast<cm_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CM_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::string_view view(const char* text, size_t len) { return {text, len}; }

}  // namespace

extern "C" {

const char* cm_last_error(void) { return last_error.c_str(); }

const char* cm_status_name(cm_status status) {
  if (status == CM_OK) return "ok";
  if (status == CM_ERR_INVALID_ARGUMENT) return "invalid_argument";
  if (status == CM_ERR_INTERNAL) return "internal";
  if (status >= CM_ERR_PARSE && status <= CM_ERR_IO) {
    return cloudmirror::error_code_name(static_cast<cloudmirror::ErrorCode>(status));
  }
  return "unknown";
}

void cm_string_free(char* s) { std::free(s); }

cm_status cm_registry_load(const char* csv, size_t len, cm_registry** out) {
  if (!csv || !out) return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new cm_registry{cloudmirror::load_registry(view(csv, len))}; });
}

void cm_registry_free(cm_registry* registry) { delete registry; }

size_t cm_registry_count(const cm_registry* registry) {
  return registry ? registry->registry.charger_count() : 0;
}

cm_status cm_registry_closest(const cm_registry* registry, double lat, double lon, size_t* id,
                              double* distance_km) {
  if (!registry || !id || !distance_km) return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto hit = registry->registry.closest_charger(lat, lon);
    *id = hit.charger->id;
    *distance_km = hit.distance_km;
  });
}

cm_status cm_registry_in_range(const cm_registry* registry, double lat, double lon,
                               double radius_km, size_t* ids, double* distances_km,
                               size_t capacity, size_t* count) {
  if (!registry || !count || (capacity > 0 && (!ids || !distances_km))) {
    return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const auto hits = registry->registry.chargers_in_range(lat, lon, radius_km);
    *count = hits.size();
    for (size_t i = 0; i < hits.size() && i < capacity; ++i) {
      ids[i] = hits[i].charger->id;
      distances_km[i] = hits[i].distance_km;
    }
  });
}

cm_status cm_haversine_km(double lat1, double lon1, double lat2, double lon2, double* out) {
  if (!out) return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = cloudmirror::haversine_km(lat1, lon1, lat2, lon2); });
}

cm_status cm_fixture_csv(size_t rows, uint64_t seed, char** out_csv) {
  if (!out_csv) return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_csv = copy_string(cloudmirror::generate_fixture_csv(rows, seed)); });
}

cm_status cm_scenario_parse(const char* json, size_t len, cm_scenario** out) {
  if (!json || !out) return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new cm_scenario{cloudmirror::parse_scenario(view(json, len))}; });
}

void cm_scenario_free(cm_scenario* scenario) { delete scenario; }

cm_status cm_generate(const cm_registry* registry, const cm_scenario* scenario,
                      char** snapshot_json, char** traces_json, char** metrics_json) {
  if (!registry || !scenario || !snapshot_json || !traces_json || !metrics_json) {
    return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const auto& s = scenario->scenario;
    const auto bundle =
        cloudmirror::run_scenario(registry->registry, cloudmirror::scenario_cluster(s), s);
    const std::string snap = cloudmirror::serialize_snapshot(bundle.snapshot);
    const std::string traces = cloudmirror::serialize_traces(bundle.spans);
    const std::string metrics = cloudmirror::serialize_metrics(bundle.metrics);
    char* a = copy_string(snap);
    char* b = nullptr;
    char* c = nullptr;
    try {
      b = copy_string(traces);
      c = copy_string(metrics);
    } catch (...) {
      std::free(a);
      std::free(b);
      throw;
    }
    *snapshot_json = a;
    *traces_json = b;
    *metrics_json = c;
  });
}

cm_status cm_mirror_config_parse(const char* json, size_t len, cm_mirror_config** out) {
  if (!json || !out) return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded(
      [&] { *out = new cm_mirror_config{cloudmirror::parse_mirror_config(view(json, len))}; });
}

void cm_mirror_config_free(cm_mirror_config* config) { delete config; }

cm_status cm_mirror(const char* snapshot_json, const char* traces_json,
                    const cm_mirror_config* config, char** metrics_json) {
  if (!snapshot_json || !traces_json || !metrics_json) {
    return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    cloudmirror::TelemetryBundle bundle;
    bundle.snapshot = cloudmirror::parse_snapshot(snapshot_json);
    bundle.spans = cloudmirror::parse_traces(traces_json);
    const cloudmirror::MirrorConfig cfg = config ? config->config : cloudmirror::MirrorConfig{};
    *metrics_json = copy_string(cloudmirror::serialize_metrics(cloudmirror::mirror_run(bundle, cfg)));
  });
}

cm_status cm_deviation_params_parse(const char* json, size_t len, cm_deviation_params** out) {
  if (!json || !out) return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new cm_deviation_params{cloudmirror::parse_deviation_params(view(json, len))};
  });
}

void cm_deviation_params_free(cm_deviation_params* params) { delete params; }

cm_status cm_compare(const char* simulated_metrics_json, const char* observed_metrics_json,
                     const cm_deviation_params* params, cm_report** out) {
  if (!simulated_metrics_json || !observed_metrics_json || !out) {
    return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const auto sim = cloudmirror::parse_metrics(simulated_metrics_json);
    const auto obs = cloudmirror::parse_metrics(observed_metrics_json);
    const auto p = params ? params->params : cloudmirror::DeviationParams{};
    *out = new cm_report{cloudmirror::detect_deviations(sim, obs, p)};
  });
}

int cm_report_anomalous(const cm_report* report) {
  return report && report->report.anomalous() ? 1 : 0;
}

size_t cm_report_interval_count(const cm_report* report, const char* subject) {
  if (!report || !subject) return 0;
  const auto* s = report->report.find(subject);
  return s ? s->anomaly_intervals.size() : 0;
}

cm_status cm_report_json(const cm_report* report, char** out) {
  if (!report || !out) return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = copy_string(cloudmirror::serialize_report(report->report)); });
}

cm_status cm_report_table(const cm_report* report, char** out) {
  if (!report || !out) return fail(CM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = copy_string(cloudmirror::render_report_table(report->report)); });
}

void cm_report_free(cm_report* report) { delete report; }

}  // extern "C"

#include "cloudmirror/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <json.hpp>

#include "cloudmirror/error.hpp"
#include "json_util.hpp"

namespace cloudmirror {

using nlohmann::json;
using nlohmann::ordered_json;

bool is_utilization_metric(std::string_view metric) {
  return metric.find("utilization") != std::string_view::npos;
}

namespace {

const char* kind_name(SpanKind kind) {
  return kind == SpanKind::kServer ? "server" : "client";
}

Span span_from_json(const json& j, std::size_t index) {
  const std::string where = "span record " + std::to_string(index);
  if (!j.is_object()) throw Error(ErrorCode::kParse, where + ": not an object");
  Span s;
  s.trace_id = json_util::string_field(j, "traceId", where);
  s.span_id = json_util::string_field(j, "spanId", where);
  if (auto p = j.find("parentSpanId"); p != j.end() && !p->is_null()) {
    s.parent_span_id = json_util::string_field(j, "parentSpanId", where);
  }
  s.operation = json_util::string_field(j, "operation", where);
  s.service_instance = json_util::string_field(j, "serviceInstance", where);
  s.node = json_util::string_field(j, "node", where);
  s.start_us = json_util::int_field(j, "startMicros", where);
  s.duration_us = json_util::int_field(j, "durationMicros", where);
  const std::string kind = json_util::string_field(j, "kind", where);
  if (kind == "server") {
    s.kind = SpanKind::kServer;
  } else if (kind == "client") {
    s.kind = SpanKind::kClient;
  } else {
    throw Error(ErrorCode::kParse, where + ": unknown kind '" + kind + "'");
  }
  if (s.duration_us <= 0) {
    throw Error(ErrorCode::kValidation,
                where + " (" + s.span_id + "): durationMicros must be positive");
  }
  return s;
}

TimeSeries series_from_json(const json& j, std::size_t index) {
  const std::string where = "series record " + std::to_string(index);
  if (!j.is_object()) throw Error(ErrorCode::kParse, where + ": not an object");
  TimeSeries s;
  s.subject = json_util::string_field(j, "subject", where);
  s.metric = json_util::string_field(j, "metric", where);
  s.t0_us = json_util::int_field(j, "t0Micros", where);
  s.step_us = json_util::int_field(j, "stepMicros", where);
  const auto& values = json_util::array_field(j, "values", where);
  s.values.reserve(values.size());
  for (const auto& v : values) {
    if (!v.is_number()) throw Error(ErrorCode::kParse, where + ": non-numeric value");
    s.values.push_back(v.get<double>());
  }
  try {
    validate_series(s);
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.what());
  }
  return s;
}

}  // namespace

void validate_series(const TimeSeries& series) {
  if (series.step_us <= 0) {
    throw Error(ErrorCode::kValidation, "stepMicros must be positive");
  }
  const bool bounded = is_utilization_metric(series.metric);
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double v = series.values[i];
    if (!std::isfinite(v) || (bounded && (v < 0.0 || v > 1.0))) {
      throw Error(ErrorCode::kValidation,
                  "value " + std::to_string(v) + " at index " + std::to_string(i) +
                      " of " + series.subject + " is outside [0,1]");
    }
  }
}

std::vector<Span> parse_traces(std::string_view text) {
  const json doc = json_util::parse_document(text, "trace document");
  const auto& records = json_util::array_field(doc, "spans", "trace document");
  std::vector<Span> spans;
  spans.reserve(records.size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    spans.push_back(span_from_json(records[i], i));
    if (!ids.insert(spans.back().span_id).second) {
      throw Error(ErrorCode::kValidation,
                  "span record " + std::to_string(i) + ": duplicate spanId " +
                      spans.back().span_id);
    }
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return std::tie(a.start_us, a.span_id) < std::tie(b.start_us, b.span_id);
  });
  return spans;
}

std::string serialize_traces(const std::vector<Span>& spans) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : spans) {
    ordered_json j;
    j["traceId"] = s.trace_id;
    j["spanId"] = s.span_id;
    if (s.parent_span_id) j["parentSpanId"] = *s.parent_span_id;
    j["operation"] = s.operation;
    j["serviceInstance"] = s.service_instance;
    j["node"] = s.node;
    j["startMicros"] = s.start_us;
    j["durationMicros"] = s.duration_us;
    j["kind"] = kind_name(s.kind);
    arr.push_back(std::move(j));
  }
  ordered_json doc;
  doc["spans"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<TimeSeries> parse_metrics(std::string_view text) {
  const json doc = json_util::parse_document(text, "metrics document");
  const auto& records = json_util::array_field(doc, "series", "metrics document");
  std::vector<TimeSeries> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back(series_from_json(records[i], i));
  }
  return out;
}

std::string serialize_metrics(const std::vector<TimeSeries>& series) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : series) {
    ordered_json j;
    j["subject"] = s.subject;
    j["metric"] = s.metric;
    j["t0Micros"] = s.t0_us;
    j["stepMicros"] = s.step_us;
    j["values"] = s.values;
    arr.push_back(std::move(j));
  }
  ordered_json doc;
  doc["series"] = std::move(arr);
  return doc.dump(2) + "\n";
}

double integrate(const TimeSeries& series, Micros from, Micros to) {
  from = std::max(from, series.t0_us);
  to = std::min(to, series.end_us());
  if (to <= from) return 0.0;
  const Micros first = (from - series.t0_us) / series.step_us;
  const Micros last = (to - 1 - series.t0_us) / series.step_us;
  double total = 0.0;
  for (Micros i = first; i <= last; ++i) {
    const Micros lo = std::max(from, series.t0_us + i * series.step_us);
    const Micros hi = std::min(to, series.t0_us + (i + 1) * series.step_us);
    total += series.values[static_cast<std::size_t>(i)] * static_cast<double>(hi - lo);
  }
  return total;
}

TimeSeries resample_window(const TimeSeries& series, Micros step_us,
                           Micros start_us, Micros end_us) {
  if (step_us <= 0) throw Error(ErrorCode::kDomain, "resample step must be positive");
  TimeSeries out;
  out.subject = series.subject;
  out.metric = series.metric;
  out.t0_us = start_us;
  out.step_us = step_us;
  if (end_us <= start_us) return out;
  const Micros n = (end_us - start_us + step_us - 1) / step_us;
  out.values.reserve(static_cast<std::size_t>(n));
  for (Micros k = 0; k < n; ++k) {
    const Micros lo = start_us + k * step_us;
    const Micros hi = std::min(lo + step_us, end_us);
    const Micros clo = std::max(lo, series.t0_us);
    const Micros chi = std::min(hi, series.end_us());
    if (chi <= clo) {
      out.values.push_back(0.0);
      continue;
    }
    // A bucket inside a single input sample takes that sample verbatim.
    const Micros i = (clo - series.t0_us) / series.step_us;
    if (chi <= series.t0_us + (i + 1) * series.step_us) {
      out.values.push_back(series.values[static_cast<std::size_t>(i)]);
      continue;
    }
    out.values.push_back(integrate(series, clo, chi) / static_cast<double>(chi - clo));
  }
  return out;
}

TimeSeries resample(const TimeSeries& series, Micros new_step_us) {
  return resample_window(series, new_step_us, series.t0_us, series.end_us());
}

AlignedPair align(const TimeSeries& a, const TimeSeries& b, Micros step_us) {
  if (step_us <= 0) throw Error(ErrorCode::kDomain, "align step must be positive");
  const Micros start = std::max(a.t0_us, b.t0_us);
  const Micros end = std::min(a.end_us(), b.end_us());
  if (end <= start) {
    throw Error(ErrorCode::kEmptyOverlap,
                "series " + a.subject + " and " + b.subject + " do not overlap in time");
  }
  return {resample_window(a, step_us, start, end),
          resample_window(b, step_us, start, end), start, end};
}

}  // namespace cloudmirror

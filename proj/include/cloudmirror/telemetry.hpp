#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cloudmirror {

using Micros = std::int64_t;

inline constexpr const char* kCpuUtilization = "cpu_utilization";

enum class SpanKind { kServer, kClient };

struct Span {
  std::string trace_id;
  std::string span_id;
  std::optional<std::string> parent_span_id;
  std::string operation;
  std::string service_instance;  // pod name
  std::string node;
  Micros start_us = 0;     // wall clock
  Micros duration_us = 0;  // > 0
  SpanKind kind = SpanKind::kServer;

  Micros end_us() const { return start_us + duration_us; }
  bool operator==(const Span&) const = default;
};

/// Fixed-step samples. Sample i holds on [t0 + i*step, t0 + (i+1)*step).
struct TimeSeries {
  std::string subject;
  std::string metric = kCpuUtilization;
  Micros t0_us = 0;
  Micros step_us = 1'000'000;
  std::vector<double> values;

  Micros end_us() const {
    return t0_us + step_us * static_cast<Micros>(values.size());
  }
  bool operator==(const TimeSeries&) const = default;
};

bool is_utilization_metric(std::string_view metric);

// Trace document: {"spans": [...]}. The returned list is sorted by start
// time, ties by span id.
std::vector<Span> parse_traces(std::string_view text);
std::string serialize_traces(const std::vector<Span>& spans);

// Metrics document: {"series": [...]}.
std::vector<TimeSeries> parse_metrics(std::string_view text);
std::string serialize_metrics(const std::vector<TimeSeries>& series);

void validate_series(const TimeSeries& series);

/// Integral of the step function over [from, to), clipped to the series'
/// coverage. Units: value x microseconds.
double integrate(const TimeSeries& series, Micros from, Micros to);

/// Re-buckets `series` onto buckets of `step_us` starting at `start_us` and
/// ending at `end_us`. Each output value is the time-weighted mean over the
/// part of its bucket covered by both the input and [start_us, end_us).
TimeSeries resample_window(const TimeSeries& series, Micros step_us,
                           Micros start_us, Micros end_us);

/// Re-buckets the whole series onto a new step anchored at its t0.
TimeSeries resample(const TimeSeries& series, Micros new_step_us);

struct AlignedPair {
  TimeSeries a;
  TimeSeries b;
  Micros window_start_us = 0;
  Micros window_end_us = 0;
};

/// Resamples both series onto a common grid over [max(t0), min(end)).
/// Throws kEmptyOverlap when the ranges do not intersect.
AlignedPair align(const TimeSeries& a, const TimeSeries& b, Micros step_us);

}  // namespace cloudmirror

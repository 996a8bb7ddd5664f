#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cloudmirror/telemetry.hpp"

namespace cloudmirror {

struct DeviationParams {
  Micros step_us = 5'000'000;
  double abs_threshold = 0.15;  // utilization fraction
  int min_consecutive = 3;      // buckets

  void validate() const;
};

DeviationParams parse_deviation_params(std::string_view text);

struct AnomalyInterval {
  Micros start_us = 0;
  Micros end_us = 0;
  double mean_signed_deviation = 0.0;  // simulated minus observed

  bool operator==(const AnomalyInterval&) const = default;
};

enum class SubjectStatus {
  kCompared,
  kSimulatedOnly,  // coverage gap: no observed series
  kObservedOnly,   // coverage gap: no simulated series
  kDisjoint,       // coverage gap: both present, no common time range
};

const char* subject_status_name(SubjectStatus status);

struct SubjectReport {
  std::string subject;
  std::string metric;
  SubjectStatus status = SubjectStatus::kCompared;
  Micros window_start_us = 0;
  Micros window_end_us = 0;
  std::size_t buckets = 0;
  double max_abs_deviation = 0.0;
  double mean_abs_deviation = 0.0;
  double simulated_mean = 0.0;
  double observed_mean = 0.0;
  std::vector<AnomalyInterval> anomaly_intervals;

  bool anomalous() const { return !anomaly_intervals.empty(); }
};

struct DeviationReport {
  DeviationParams params;
  std::vector<SubjectReport> subjects;  // sorted by (subject, metric)

  bool anomalous() const;
  const SubjectReport* find(std::string_view subject) const;
};

/// Flags maximal runs of at least min_consecutive buckets whose absolute
/// deviation exceeds the threshold. The signed deviation is sim - observed,
/// so a service that stopped working in reality reads as positive.
///
/// Throws kInput when no (subject, metric) pair appears in both inputs.
DeviationReport detect_deviations(const std::vector<TimeSeries>& simulated,
                                  const std::vector<TimeSeries>& observed,
                                  const DeviationParams& params);

std::string serialize_report(const DeviationReport& report);
std::string render_report_table(const DeviationReport& report);

}  // namespace cloudmirror

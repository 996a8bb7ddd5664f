#pragma once

#include <string_view>
#include <vector>

#include "cloudmirror/bundle.hpp"
#include "cloudmirror/sim_engine.hpp"
#include "cloudmirror/topology.hpp"

namespace cloudmirror {

enum class SpanFilter { kServerSpansOnly, kAllSpans };

/// How replayed spans are assigned to VMs.
enum class Placement {
  // Spans of a service are spread round-robin, in start order, over every
  // replica the snapshot declares for it: the intended distribution.
  kServiceRoundRobin,
  // Each span runs on the pod that recorded it.
  kRecordedInstance,
};

struct MirrorConfig {
  CalibrationConfig calibration;
  Micros bucket_us = 1'000'000;
  SpanFilter span_filter = SpanFilter::kServerSpansOnly;
  Placement placement = Placement::kServiceRoundRobin;

  void validate() const;
};

MirrorConfig parse_mirror_config(std::string_view text);

struct DerivedWorkload {
  std::vector<Cloudlet> cloudlets;  // id i was derived from source_spans[i]
  std::vector<Span> source_spans;
  Micros epoch_us = 0;
};

/// Turns retained spans into cloudlets. The epoch is the earliest retained
/// span start; each cloudlet's length is its span's busy time at the
/// calibrated rating.
DerivedWorkload derive_cloudlets(const std::vector<Span>& spans,
                                 const ClusterSnapshot& snapshot,
                                 const MirrorConfig& config);

struct MirrorOutcome {
  DerivedWorkload workload;
  SimResult result;
  std::vector<TimeSeries> series;  // one per pod, snapshot order
};

MirrorOutcome mirror_simulate(const TelemetryBundle& bundle, const MirrorConfig& config);

/// Simulated cpu_utilization per pod VM, t0 at the derived epoch.
std::vector<TimeSeries> mirror_run(const TelemetryBundle& bundle, const MirrorConfig& config);

}  // namespace cloudmirror

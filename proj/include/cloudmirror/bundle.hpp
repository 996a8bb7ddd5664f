#pragma once

#include <vector>

#include "cloudmirror/telemetry.hpp"
#include "cloudmirror/topology.hpp"

namespace cloudmirror {

/// Everything recorded from one observation window of the cluster.
struct TelemetryBundle {
  std::vector<Span> spans;
  std::vector<TimeSeries> metrics;
  ClusterSnapshot snapshot;
};

/// Span instances must be pods; metric subjects must be pods or nodes.
void validate_bundle(const TelemetryBundle& bundle);

}  // namespace cloudmirror

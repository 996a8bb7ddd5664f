#include "cloudmirror/mirror.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "json_util.hpp"

namespace cloudmirror {

using nlohmann::json;

void validate_bundle(const TelemetryBundle& bundle) {
  validate_snapshot(bundle.snapshot);
  for (const auto& s : bundle.spans) {
    if (!bundle.snapshot.find_pod(s.service_instance)) {
      throw Error(ErrorCode::kMapping, "span " + s.span_id + " ran on unknown instance '" +
                                           s.service_instance + "'");
    }
  }
  for (const auto& m : bundle.metrics) {
    if (!bundle.snapshot.find_pod(m.subject) && !bundle.snapshot.find_node(m.subject)) {
      throw Error(ErrorCode::kMapping, "metric subject '" + m.subject +
                                           "' is neither a pod nor a node");
    }
  }
}

void MirrorConfig::validate() const {
  calibration.validate();
  if (bucket_us <= 0) throw Error(ErrorCode::kValidation, "bucketMicros must be positive");
}

MirrorConfig parse_mirror_config(std::string_view text) {
  const std::string where = "mirror config";
  const json doc = json_util::parse_document(text, where);
  MirrorConfig cfg;
  if (doc.contains("calibration")) {
    const auto& c = doc.at("calibration");
    if (!c.is_object()) throw Error(ErrorCode::kParse, where + ": calibration must be an object");
    auto& cal = cfg.calibration;
    cal.mips_per_core = json_util::optional_number(c, "mipsPerCore", cal.mips_per_core, where);
    cal.vm_cores_per_pod = static_cast<int>(
        json_util::optional_int(c, "vmCoresPerPod", cal.vm_cores_per_pod, where));
    cal.vm_memory_mb = json_util::optional_int(c, "vmMemoryMb", cal.vm_memory_mb, where);
    cal.busy_fraction = json_util::optional_number(c, "busyFraction", cal.busy_fraction, where);
  }
  cfg.bucket_us = json_util::optional_int(doc, "bucketMicros", cfg.bucket_us, where);
  if (doc.contains("spanFilter")) {
    const auto f = json_util::string_field(doc, "spanFilter", where);
    if (f == "server_spans_only") {
      cfg.span_filter = SpanFilter::kServerSpansOnly;
    } else if (f == "all_spans") {
      cfg.span_filter = SpanFilter::kAllSpans;
    } else {
      throw Error(ErrorCode::kValidation, where + ": unknown spanFilter '" + f + "'");
    }
  }
  if (doc.contains("placement")) {
    const auto p = json_util::string_field(doc, "placement", where);
    if (p == "service_round_robin") {
      cfg.placement = Placement::kServiceRoundRobin;
    } else if (p == "recorded_instance") {
      cfg.placement = Placement::kRecordedInstance;
    } else {
      throw Error(ErrorCode::kValidation, where + ": unknown placement '" + p + "'");
    }
  }
  cfg.validate();
  return cfg;
}

DerivedWorkload derive_cloudlets(const std::vector<Span>& spans,
                                 const ClusterSnapshot& snapshot,
                                 const MirrorConfig& config) {
  config.validate();
  DerivedWorkload out;
  for (const auto& s : spans) {
    if (config.span_filter == SpanFilter::kAllSpans || s.kind == SpanKind::kServer) {
      out.source_spans.push_back(s);
    }
  }
  if (out.source_spans.empty()) return out;
  std::sort(out.source_spans.begin(), out.source_spans.end(),
            [](const Span& a, const Span& b) {
              return std::tie(a.start_us, a.span_id) < std::tie(b.start_us, b.span_id);
            });
  out.epoch_us = out.source_spans.front().start_us;

  std::map<std::string, std::vector<const PodSpec*>> replicas;
  for (const auto& p : snapshot.pods) replicas[p.service].push_back(&p);
  for (auto& [service, pods] : replicas) {
    std::sort(pods.begin(), pods.end(), [](const PodSpec* a, const PodSpec* b) {
      return a->replica_index < b->replica_index;
    });
  }
  std::map<std::string, std::size_t> next_replica;

  const auto& calib = config.calibration;
  out.cloudlets.reserve(out.source_spans.size());
  for (std::size_t i = 0; i < out.source_spans.size(); ++i) {
    const Span& s = out.source_spans[i];
    const PodSpec* pod = snapshot.find_pod(s.service_instance);
    if (!pod) {
      throw Error(ErrorCode::kMapping, "span " + s.span_id + " ran on instance '" +
                                           s.service_instance +
                                           "' which the snapshot does not contain");
    }
    if (config.placement == Placement::kServiceRoundRobin) {
      const auto& pool = replicas.at(pod->service);
      pod = pool[next_replica[pod->service]++ % pool.size()];
    }
    const NodeSpec& node = *snapshot.find_node(pod->node);
    const double mips = node.mips_per_core.value_or(calib.mips_per_core);
    Cloudlet c;
    c.id = i;
    // Multiply before dividing so whole-microsecond spans at whole-number
    // ratings reproduce the original MI exactly.
    c.length_mi = static_cast<double>(s.duration_us) * mips * calib.busy_fraction / 1e6;
    c.required_cores = 1;
    c.start_offset_us = s.start_us - out.epoch_us;
    c.vm_id = pod->name;
    out.cloudlets.push_back(std::move(c));
  }
  return out;
}

MirrorOutcome mirror_simulate(const TelemetryBundle& bundle, const MirrorConfig& config) {
  config.validate();
  validate_bundle(bundle);
  MirrorOutcome out;
  const Datacenter dc = build_datacenter(bundle.snapshot, config.calibration);
  out.workload = derive_cloudlets(bundle.spans, bundle.snapshot, config);
  out.result = run(dc.hosts, dc.vms, out.workload.cloudlets);
  for (const auto& pod : bundle.snapshot.pods) {
    TimeSeries s = utilization_series(out.result, dc.pod_to_vm.at(pod.name), config.bucket_us);
    s.subject = pod.name;
    s.t0_us = out.workload.epoch_us;
    out.series.push_back(std::move(s));
  }
  return out;
}

std::vector<TimeSeries> mirror_run(const TelemetryBundle& bundle, const MirrorConfig& config) {
  return mirror_simulate(bundle, config).series;
}

}  // namespace cloudmirror

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cloudmirror/sim_engine.hpp"

namespace cloudmirror {

enum class NodeRole { kAdmin, kWorker };

struct NodeSpec {
  std::string name;
  int cpu_cores = 1;
  std::int64_t memory_mb = 1024;
  NodeRole role = NodeRole::kWorker;
  std::optional<double> mips_per_core;  // per-node calibration override

  bool operator==(const NodeSpec&) const = default;
};

struct PodSpec {
  std::string name;
  std::string node;
  std::string service;
  int replica_index = 0;

  bool operator==(const PodSpec&) const = default;
};

struct ClusterSnapshot {
  std::vector<NodeSpec> nodes;
  std::vector<PodSpec> pods;
  Micros captured_at_us = 0;

  const NodeSpec* find_node(std::string_view name) const;
  const PodSpec* find_pod(std::string_view name) const;
  bool operator==(const ClusterSnapshot&) const = default;
};

/// The cluster API reports cores and memory only, so the instruction rating
/// and the per-pod VM shape are supplied here.
struct CalibrationConfig {
  double mips_per_core = 1000.0;
  int vm_cores_per_pod = 1;
  std::int64_t vm_memory_mb = 512;
  double busy_fraction = 1.0;

  void validate() const;
};

/// Checks every snapshot invariant; throws kValidation naming the offender.
void validate_snapshot(const ClusterSnapshot& snapshot);

ClusterSnapshot parse_snapshot(std::string_view text);
std::string serialize_snapshot(const ClusterSnapshot& snapshot);

struct Datacenter {
  std::vector<Host> hosts;
  std::vector<Vm> vms;
  std::map<std::string, std::string> pod_to_vm;
};

/// One host per node and one VM per pod. VM ids equal pod names.
Datacenter build_datacenter(const ClusterSnapshot& snapshot,
                            const CalibrationConfig& calib);

}  // namespace cloudmirror

#include "cloudmirror/topology.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "json_util.hpp"

namespace cloudmirror {

using nlohmann::json;
using nlohmann::ordered_json;

const NodeSpec* ClusterSnapshot::find_node(std::string_view name) const {
  for (const auto& n : nodes) {
    if (n.name == name) return &n;
  }
  return nullptr;
}

const PodSpec* ClusterSnapshot::find_pod(std::string_view name) const {
  for (const auto& p : pods) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void CalibrationConfig::validate() const {
  if (!(mips_per_core > 0.0) || !std::isfinite(mips_per_core)) {
    throw Error(ErrorCode::kValidation, "mipsPerCore must be positive");
  }
  if (vm_cores_per_pod < 1) {
    throw Error(ErrorCode::kValidation, "vmCoresPerPod must be at least 1");
  }
  if (vm_memory_mb < 1) {
    throw Error(ErrorCode::kValidation, "vmMemoryMb must be positive");
  }
  if (!(busy_fraction > 0.0 && busy_fraction <= 1.0)) {
    throw Error(ErrorCode::kValidation, "busyFraction must lie in (0,1]");
  }
}

void validate_snapshot(const ClusterSnapshot& snapshot) {
  if (snapshot.nodes.empty()) {
    throw Error(ErrorCode::kValidation, "snapshot has no nodes");
  }
  std::set<std::string> node_names;
  for (const auto& n : snapshot.nodes) {
    if (n.name.empty()) throw Error(ErrorCode::kValidation, "node with empty name");
    if (!node_names.insert(n.name).second) {
      throw Error(ErrorCode::kValidation, "duplicate node '" + n.name + "'");
    }
    if (n.cpu_cores < 1) {
      throw Error(ErrorCode::kValidation, "node '" + n.name + "' needs cpuCores >= 1");
    }
    if (n.memory_mb < 1) {
      throw Error(ErrorCode::kValidation, "node '" + n.name + "' needs positive memoryMb");
    }
    if (n.mips_per_core && !(*n.mips_per_core > 0.0)) {
      throw Error(ErrorCode::kValidation, "node '" + n.name + "' needs positive mipsPerCore");
    }
  }
  std::set<std::string> pod_names;
  std::set<std::pair<std::string, int>> replicas;
  for (const auto& p : snapshot.pods) {
    if (!pod_names.insert(p.name).second) {
      throw Error(ErrorCode::kValidation, "duplicate pod '" + p.name + "'");
    }
    if (!node_names.count(p.node)) {
      throw Error(ErrorCode::kValidation,
                  "pod '" + p.name + "' references unknown node '" + p.node + "'");
    }
    if (p.replica_index < 0) {
      throw Error(ErrorCode::kValidation, "pod '" + p.name + "' has a negative replicaIndex");
    }
    if (!replicas.emplace(p.service, p.replica_index).second) {
      throw Error(ErrorCode::kValidation,
                  "service '" + p.service + "' has replica " +
                      std::to_string(p.replica_index) + " twice");
    }
  }
}

ClusterSnapshot parse_snapshot(std::string_view text) {
  const json doc = json_util::parse_document(text, "snapshot document");
  ClusterSnapshot snap;
  snap.captured_at_us = json_util::int_field(doc, "capturedAtMicros", "snapshot document");
  const auto& nodes = json_util::array_field(doc, "nodes", "snapshot document");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& j = nodes[i];
    const std::string where = "node record " + std::to_string(i);
    if (!j.is_object()) throw Error(ErrorCode::kParse, where + ": not an object");
    NodeSpec n;
    n.name = json_util::string_field(j, "name", where);
    n.cpu_cores = static_cast<int>(json_util::int_field(j, "cpuCores", where + " (" + n.name + ")"));
    n.memory_mb = json_util::int_field(j, "memoryMb", where + " (" + n.name + ")");
    const std::string role = json_util::string_field(j, "role", where);
    if (role == "admin") {
      n.role = NodeRole::kAdmin;
    } else if (role == "worker") {
      n.role = NodeRole::kWorker;
    } else {
      throw Error(ErrorCode::kValidation, where + ": unknown role '" + role + "'");
    }
    if (j.contains("mipsPerCore") && !j.at("mipsPerCore").is_null()) {
      n.mips_per_core = json_util::number_field(j, "mipsPerCore", where);
    }
    snap.nodes.push_back(std::move(n));
  }
  const auto& pods = json_util::array_field(doc, "pods", "snapshot document");
  for (std::size_t i = 0; i < pods.size(); ++i) {
    const auto& j = pods[i];
    const std::string where = "pod record " + std::to_string(i);
    if (!j.is_object()) throw Error(ErrorCode::kParse, where + ": not an object");
    PodSpec p;
    p.name = json_util::string_field(j, "name", where);
    p.node = json_util::string_field(j, "node", where);
    p.service = json_util::string_field(j, "service", where);
    p.replica_index = static_cast<int>(json_util::int_field(j, "replicaIndex", where));
    snap.pods.push_back(std::move(p));
  }
  validate_snapshot(snap);
  return snap;
}

std::string serialize_snapshot(const ClusterSnapshot& snapshot) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : snapshot.nodes) {
    ordered_json j;
    j["name"] = n.name;
    j["cpuCores"] = n.cpu_cores;
    j["memoryMb"] = n.memory_mb;
    j["role"] = n.role == NodeRole::kAdmin ? "admin" : "worker";
    if (n.mips_per_core) j["mipsPerCore"] = *n.mips_per_core;
    nodes.push_back(std::move(j));
  }
  ordered_json pods = ordered_json::array();
  for (const auto& p : snapshot.pods) {
    ordered_json j;
    j["name"] = p.name;
    j["node"] = p.node;
    j["service"] = p.service;
    j["replicaIndex"] = p.replica_index;
    pods.push_back(std::move(j));
  }
  ordered_json doc;
  doc["capturedAtMicros"] = snapshot.captured_at_us;
  doc["nodes"] = std::move(nodes);
  doc["pods"] = std::move(pods);
  return doc.dump(2) + "\n";
}

Datacenter build_datacenter(const ClusterSnapshot& snapshot,
                            const CalibrationConfig& calib) {
  validate_snapshot(snapshot);
  calib.validate();
  Datacenter dc;
  std::map<std::string, int> pods_per_node;
  for (const auto& n : snapshot.nodes) {
    dc.hosts.push_back(Host{n.name, n.cpu_cores,
                            n.mips_per_core.value_or(calib.mips_per_core),
                            n.memory_mb});
  }
  for (const auto& p : snapshot.pods) {
    const NodeSpec& node = *snapshot.find_node(p.node);
    const int count = ++pods_per_node[p.node];
    if (count * calib.vm_cores_per_pod > node.cpu_cores) {
      throw Error(ErrorCode::kOvercommit,
                  "node '" + node.name + "' has " + std::to_string(node.cpu_cores) +
                      " cores but hosts at least " + std::to_string(count) +
                      " pods of " + std::to_string(calib.vm_cores_per_pod) + " cores");
    }
    dc.vms.push_back(Vm{p.name, p.node, calib.vm_cores_per_pod,
                        node.mips_per_core.value_or(calib.mips_per_core),
                        calib.vm_memory_mb});
    dc.pod_to_vm.emplace(p.name, p.name);
  }
  return dc;
}

}  // namespace cloudmirror

#include <doctest.h>

#include <set>

#include "cloudmirror/error.hpp"
#include "cloudmirror/scenario.hpp"
#include "cloudmirror/topology.hpp"

using namespace cloudmirror;

namespace {

const char* kPaperCluster = R"({
  "capturedAtMicros": 1000,
  "nodes": [
    {"name": "admin", "cpuCores": 4, "memoryMb": 8192, "role": "admin"},
    {"name": "w1", "cpuCores": 2, "memoryMb": 4096, "role": "worker"},
    {"name": "w2", "cpuCores": 2, "memoryMb": 4096, "role": "worker"},
    {"name": "w3", "cpuCores": 2, "memoryMb": 4096, "role": "worker", "mipsPerCore": 2000}
  ],
  "pods": [
    {"name": "vehicle-service-0", "node": "admin", "service": "vehicle-service", "replicaIndex": 0},
    {"name": "vehicle-service-1", "node": "admin", "service": "vehicle-service", "replicaIndex": 1},
    {"name": "charging-stations-0", "node": "w1", "service": "charging-stations", "replicaIndex": 0},
    {"name": "charging-stations-1", "node": "w2", "service": "charging-stations", "replicaIndex": 1},
    {"name": "charging-stations-2", "node": "w3", "service": "charging-stations", "replicaIndex": 2}
  ]
})";

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("paper-shaped cluster parses and builds") {
  const auto snap = parse_snapshot(kPaperCluster);
  CHECK(snap.nodes.size() == 4);
  CHECK(snap.pods.size() == 5);
  CHECK(snap.find_node("admin")->role == NodeRole::kAdmin);
  CHECK(snap.find_node("w3")->mips_per_core == 2000.0);
  const auto dc = build_datacenter(snap, {});
  CHECK(dc.hosts.size() == 4);
  CHECK(dc.vms.size() == 5);
  std::set<std::string> charging_hosts;
  for (const auto& vm : dc.vms) {
    const PodSpec* pod = snap.find_pod(vm.id);
    REQUIRE(pod);
    CHECK(vm.host_id == pod->node);
    CHECK(dc.pod_to_vm.at(pod->name) == vm.id);
    if (pod->service == kChargingService) charging_hosts.insert(vm.host_id);
  }
  CHECK(charging_hosts.size() == 3);
  // Per-node rating override.
  for (const auto& vm : dc.vms) {
    CHECK(vm.mips_per_core == (vm.host_id == "w3" ? 2000.0 : 1000.0));
  }
}

TEST_CASE("snapshot round trip is identity") {
  const auto snap = parse_snapshot(kPaperCluster);
  CHECK(parse_snapshot(serialize_snapshot(snap)) == snap);
  const auto def = default_cluster(3, 42);
  CHECK(parse_snapshot(serialize_snapshot(def)) == def);
}

TEST_CASE("snapshot validation errors") {
  try {
    parse_snapshot(R"({"capturedAtMicros": 0,
      "nodes": [{"name": "w1", "cpuCores": 2, "memoryMb": 1, "role": "worker"}],
      "pods": [{"name": "p", "node": "w9", "service": "s", "replicaIndex": 0}]})");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kValidation);
    CHECK(std::string(e.what()).find("w9") != std::string::npos);
  }
  CHECK(code_of([] {
          parse_snapshot(R"({"capturedAtMicros": 0,
            "nodes": [{"name": "w1", "memoryMb": 1, "role": "worker"}], "pods": []})");
        }) == ErrorCode::kValidation);
  CHECK(code_of([] { parse_snapshot("{\"nodes\": [}"); }) == ErrorCode::kParse);
}

TEST_CASE("nodes without pods") {
  const auto snap = parse_snapshot(R"({"capturedAtMicros": 0,
    "nodes": [{"name": "w1", "cpuCores": 2, "memoryMb": 1, "role": "worker"}], "pods": []})");
  CHECK(snap.pods.empty());
  const auto dc = build_datacenter(snap, {});
  CHECK(dc.hosts.size() == 1);
  CHECK(dc.vms.empty());
  CHECK(dc.pod_to_vm.empty());
}

TEST_CASE("overcommit is rejected") {
  ClusterSnapshot snap;
  snap.nodes.push_back({"n", 2, 1024, NodeRole::kWorker, std::nullopt});
  for (int i = 0; i < 3; ++i) snap.pods.push_back({"p" + std::to_string(i), "n", "s", i});
  CHECK(code_of([&] { build_datacenter(snap, {}); }) == ErrorCode::kOvercommit);
  snap.pods.pop_back();
  CHECK(build_datacenter(snap, {}).vms.size() == 2);
  CalibrationConfig two;
  two.vm_cores_per_pod = 2;
  CHECK(code_of([&] { build_datacenter(snap, two); }) == ErrorCode::kOvercommit);
}

TEST_CASE("calibration validation") {
  CalibrationConfig c;
  c.busy_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.mips_per_core = -1;
  CHECK_THROWS_AS(c.validate(), Error);
}

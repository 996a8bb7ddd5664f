#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cloudmirror/bundle.hpp"
#include "cloudmirror/registry.hpp"
#include "cloudmirror/sim_engine.hpp"
#include "cloudmirror/topology.hpp"

namespace cloudmirror {

inline constexpr const char* kChargingService = "charging-stations";
inline constexpr const char* kVehicleService = "vehicle-service";

/// Work per API call, in MI. Closeby searches scan the whole registry.
struct OpCosts {
  double count_mi = 10.0;
  double get_mi = 20.0;
  double closeby_mi_per_row = 0.5;
};

struct Fault {
  int replica_index = 0;
  double kill_at_s = 0.0;
};

struct Scenario {
  int vehicles = 1;
  double period_s = 5.0;
  double random_fraction = 0.5;   // getRandomCharger ticks
  double closeby_fraction = 0.5;  // getCloseByCharger ticks
  double duration_s = 180.0;
  int replicas = 3;
  OpCosts op_costs;
  double base_load = 0.05;  // every node unless overridden below
  std::map<std::string, double> base_load_by_node;
  std::vector<Fault> faults;
  std::uint64_t rng_seed = 0;
  double noise_amplitude = 0.0;  // bounded uniform noise on observed metrics
  Micros metric_step_us = 1'000'000;
  Micros start_us = 1'700'000'000'000'000;
  CalibrationConfig calibration;
  std::optional<ClusterSnapshot> cluster;

  /// Throws kScenario describing the first broken constraint.
  void validate() const;
  double base_load_for(const std::string& node) const;
};

Scenario parse_scenario(std::string_view text);

/// Admin node hosting one vehicle-service pod, plus one worker node per
/// charging replica.
ClusterSnapshot default_cluster(int replicas, Micros captured_at_us);

/// The scenario's own cluster if it carries one, else default_cluster.
ClusterSnapshot scenario_cluster(const Scenario& scenario);

enum class CallKind { kChargerCount, kGetCharger, kClosebyCharger };

struct DispatchRecord {
  CloudletId call_id = 0;
  CallKind kind = CallKind::kChargerCount;
  int replica_index = 0;
  Micros start_us = 0;  // relative to scenario start
  Micros finish_us = 0;
  bool cancelled = false;           // replica died mid-call; the call was retried
  std::optional<std::size_t> charger_id;
};

struct ScenarioOutcome {
  TelemetryBundle bundle;
  SimResult ground_truth;
  std::vector<DispatchRecord> dispatches;  // in dispatch order
};

/// Runs the charging use case on the true configuration (faults and
/// background load included) and records what an observability stack would
/// have captured: server and client spans plus per-pod cpu_utilization.
ScenarioOutcome simulate_scenario(const Registry& registry, const ClusterSnapshot& snapshot,
                                  const Scenario& scenario);

TelemetryBundle run_scenario(const Registry& registry, const ClusterSnapshot& snapshot,
                             const Scenario& scenario);

}  // namespace cloudmirror

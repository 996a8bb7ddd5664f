#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cloudmirror/error.hpp"
#include "cloudmirror/telemetry.hpp"

namespace cloudmirror {

using CloudletId = std::uint64_t;

/// A remaining-work level at or below this many MI counts as finished.
inline constexpr double kCompletionEpsilonMi = 1e-6;

struct Host {
  std::string id;
  int cores = 1;
  double mips_per_core = 1000.0;
  std::int64_t memory_mb = 1024;
};

struct Vm {
  std::string id;
  std::string host_id;
  int cores = 1;
  double mips_per_core = 1000.0;
  std::int64_t memory_mb = 512;

  double capacity_mips() const { return cores * mips_per_core; }
};

struct Cloudlet {
  CloudletId id = 0;
  double length_mi = 0.0;
  int required_cores = 1;
  Micros start_offset_us = 0;
  std::string vm_id;
};

struct CloudletRecord {
  CloudletId id = 0;
  std::string vm_id;
  Micros arrival_us = 0;
  Micros finish_us = 0;
  bool cancelled = false;
};

struct UtilizationInterval {
  Micros start_us = 0;
  Micros end_us = 0;
  double utilization = 0.0;
};

struct VmProfile {
  std::string vm_id;
  double capacity_mips = 0.0;
  std::vector<UtilizationInterval> intervals;
};

/// Constant allocation of one VM between two of its events.
struct AllocationSlice {
  std::string vm_id;
  Micros start_us = 0;
  Micros end_us = 0;
  std::vector<std::pair<CloudletId, double>> mips;  // ascending cloudlet id
};

struct SimResult {
  Micros end_us = 0;
  std::vector<CloudletRecord> cloudlets;  // ascending id
  std::vector<VmProfile> profiles;        // input VM order
  std::vector<AllocationSlice> allocations;

  const VmProfile& profile(const std::string& vm_id) const;
  const CloudletRecord& cloudlet(CloudletId id) const;
};

struct EngineOptions {
  bool record_allocations = false;
};

/// Processor-sharing simulation of cloudlets on VMs.
///
/// Event times are integer microseconds. Between two events that touch a VM
/// its allocation is constant: capacity is split max-min fairly among the
/// active cloudlets, each capped at required_cores x mips_per_core. VMs share
/// no state, so each VM is advanced lazily only at its own events.
///
/// The incremental interface (submit/step/cancel) lets a driver react to
/// completions; run() covers the static batch case.
class Simulation {
 public:
  using CompletionHandler = std::function<void(const CloudletRecord&)>;

  Simulation(std::vector<Host> hosts, std::vector<Vm> vms,
             EngineOptions options = {});

  /// Queues a cloudlet. start_offset_us must not lie in the past.
  void submit(const Cloudlet& cloudlet);

  /// Removes a pending or active cloudlet at the current time.
  void cancel(CloudletId id);

  std::optional<Micros> next_event_time() const;

  /// Processes every event at the next timestamp: completions first (by id,
  /// each reported to the handler, which may submit), then arrivals (by id).
  void step(const CompletionHandler& on_complete = {});

  /// Moves the clock forward to `t`, which must not pass a pending event.
  void advance_to(Micros t);

  Micros now() const { return now_; }
  bool idle() const { return !next_event_time().has_value(); }

  /// Closes all profiles at the latest event time and returns the result.
  SimResult finish();

 private:
  struct Active {
    CloudletId id;
    double remaining_mi;
    double cap_mips;
    double rate_mips = 0.0;
    Micros predicted_finish_us = 0;
  };

  struct VmState {
    Vm vm;
    std::vector<Active> active;  // ascending id
    Micros last_update_us = 0;
    std::optional<Micros> next_completion_us;
    VmProfile profile;
  };

  void advance_vm(VmState& state, Micros t);
  void reallocate(VmState& state);
  void append_interval(VmState& state, Micros start, Micros end, double util);
  std::size_t vm_index(const std::string& vm_id) const;

  EngineOptions options_;
  std::vector<VmState> vms_;
  std::map<std::string, std::size_t> vm_lookup_;
  std::map<CloudletId, Cloudlet> pending_;
  std::set<std::pair<Micros, CloudletId>> arrivals_;
  std::map<CloudletId, CloudletRecord> records_;
  std::vector<AllocationSlice> allocations_;
  Micros now_ = 0;
  Micros end_us_ = 0;
};

/// Validates the placement and simulates all cloudlets to completion.
SimResult run(const std::vector<Host>& hosts, const std::vector<Vm>& vms,
              const std::vector<Cloudlet>& cloudlets,
              EngineOptions options = {});

/// Buckets a VM's piecewise-constant utilization from epoch to the end of
/// the simulation. Each value is the mean over the full bucket width, so the
/// trailing bucket is padded with zero utilization.
TimeSeries utilization_series(const SimResult& result, const std::string& vm_id,
                              Micros bucket_us);

}  // namespace cloudmirror

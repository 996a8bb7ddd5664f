#include "cloudmirror/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <tuple>

#include <json.hpp>

#include "json_util.hpp"
#include "rng.hpp"

namespace cloudmirror {

using nlohmann::json;

void Scenario::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kScenario, "scenario: " + msg); };
  if (vehicles < 1) fail("vehicles must be positive");
  if (!(period_s > 0.0) || !std::isfinite(period_s)) fail("periodSeconds must be positive");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) fail("durationSeconds must be positive");
  if (!(random_fraction >= 0.0 && random_fraction <= 1.0) ||
      !(closeby_fraction >= 0.0 && closeby_fraction <= 1.0) ||
      std::abs(random_fraction + closeby_fraction - 1.0) > 1e-9) {
    fail("mix fractions must lie in [0,1] and sum to 1");
  }
  if (replicas < 1) fail("replicas must be positive");
  if (!(op_costs.count_mi > 0.0 && op_costs.get_mi > 0.0 && op_costs.closeby_mi_per_row > 0.0)) {
    fail("opCosts must be positive");
  }
  auto check_load = [&](double b) {
    if (!(b >= 0.0 && b < 1.0)) fail("baseLoad must lie in [0,1)");
  };
  check_load(base_load);
  for (const auto& [node, b] : base_load_by_node) check_load(b);
  for (const auto& f : faults) {
    if (f.replica_index < 0 || f.replica_index >= replicas) fail("fault names an unknown replica");
    if (!(f.kill_at_s >= 0.0 && f.kill_at_s < duration_s)) {
      fail("killAtSeconds must lie in [0, durationSeconds)");
    }
  }
  if (!(noise_amplitude >= 0.0 && noise_amplitude < 1.0)) fail("noiseAmplitude must lie in [0,1)");
  if (metric_step_us <= 0) fail("metricStepMicros must be positive");
  try {
    calibration.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

double Scenario::base_load_for(const std::string& node) const {
  auto it = base_load_by_node.find(node);
  return it == base_load_by_node.end() ? base_load : it->second;
}

Scenario parse_scenario(std::string_view text) {
  const std::string where = "scenario";
  Scenario s;
  try {
    const json doc = json_util::parse_document(text, where);
    s.vehicles = static_cast<int>(json_util::int_field(doc, "vehicles", where));
    s.period_s = json_util::number_field(doc, "periodSeconds", where);
    s.duration_s = json_util::number_field(doc, "durationSeconds", where);
    s.rng_seed = static_cast<std::uint64_t>(json_util::int_field(doc, "rngSeed", where));
    if (doc.contains("mix")) {
      const auto& m = doc.at("mix");
      s.random_fraction = json_util::number_field(m, "getRandomCharger", where + " mix");
      s.closeby_fraction = json_util::number_field(m, "getClosebyCharger", where + " mix");
    }
    s.replicas = static_cast<int>(json_util::optional_int(doc, "replicas", s.replicas, where));
    if (doc.contains("opCosts")) {
      const auto& c = doc.at("opCosts");
      auto& o = s.op_costs;
      o.count_mi = json_util::optional_number(c, "count", o.count_mi, where);
      o.get_mi = json_util::optional_number(c, "get", o.get_mi, where);
      o.closeby_mi_per_row = json_util::optional_number(c, "closebyPerRow", o.closeby_mi_per_row, where);
    }
    s.base_load = json_util::optional_number(doc, "baseLoad", s.base_load, where);
    if (doc.contains("baseLoadByNode")) {
      for (const auto& [node, v] : doc.at("baseLoadByNode").items()) {
        if (!v.is_number()) throw Error(ErrorCode::kParse, where + ": baseLoadByNode values must be numbers");
        s.base_load_by_node[node] = v.get<double>();
      }
    }
    if (doc.contains("faults")) {
      const auto& faults = json_util::array_field(doc, "faults", where);
      for (std::size_t i = 0; i < faults.size(); ++i) {
        const std::string fw = where + " fault " + std::to_string(i);
        s.faults.push_back({static_cast<int>(json_util::int_field(faults[i], "replicaIndex", fw)),
                            json_util::number_field(faults[i], "killAtSeconds", fw)});
      }
    }
    s.noise_amplitude = json_util::optional_number(doc, "noiseAmplitude", s.noise_amplitude, where);
    s.metric_step_us = json_util::optional_int(doc, "metricStepMicros", s.metric_step_us, where);
    s.start_us = json_util::optional_int(doc, "startMicros", s.start_us, where);
    if (doc.contains("calibration")) {
      const auto& c = doc.at("calibration");
      auto& cal = s.calibration;
      cal.mips_per_core = json_util::optional_number(c, "mipsPerCore", cal.mips_per_core, where);
      cal.vm_cores_per_pod =
          static_cast<int>(json_util::optional_int(c, "vmCoresPerPod", cal.vm_cores_per_pod, where));
      cal.vm_memory_mb = json_util::optional_int(c, "vmMemoryMb", cal.vm_memory_mb, where);
      cal.busy_fraction = json_util::optional_number(c, "busyFraction", cal.busy_fraction, where);
    }
    if (doc.contains("cluster")) s.cluster = parse_snapshot(doc.at("cluster").dump());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kScenario) throw;
    throw Error(ErrorCode::kScenario, e.what());
  }
  s.validate();
  return s;
}

ClusterSnapshot default_cluster(int replicas, Micros captured_at_us) {
  ClusterSnapshot snap;
  snap.captured_at_us = captured_at_us;
  snap.nodes.push_back({"admin", 4, 8192, NodeRole::kAdmin, std::nullopt});
  snap.pods.push_back({"vehicle-service-0", "admin", kVehicleService, 0});
  for (int i = 0; i < replicas; ++i) {
    const std::string node = "worker-" + std::to_string(i + 1);
    snap.nodes.push_back({node, 4, 8192, NodeRole::kWorker, std::nullopt});
    snap.pods.push_back({std::string(kChargingService) + "-" + std::to_string(i), node,
                         kChargingService, i});
  }
  return snap;
}

ClusterSnapshot scenario_cluster(const Scenario& scenario) {
  return scenario.cluster ? *scenario.cluster : default_cluster(scenario.replicas, scenario.start_us);
}

namespace {

constexpr CloudletId kBackgroundIdBase = CloudletId{1} << 40;

std::string hex_id(std::uint64_t v, int width, char prefix = 0) {
  char buf[40];
  if (prefix) {
    std::snprintf(buf, sizeof buf, "%c%0*llx", prefix, width - 1, static_cast<unsigned long long>(v));
  } else {
    std::snprintf(buf, sizeof buf, "%0*llx", width, static_cast<unsigned long long>(v));
  }
  return buf;
}

const char* operation_name(CallKind kind) {
  switch (kind) {
    case CallKind::kChargerCount: return "getChargerCount";
    case CallKind::kGetCharger: return "getCharger";
    case CallKind::kClosebyCharger: return "getClosebyCharger";
  }
  return "unknown";
}

struct Call {
  CallKind kind;
  std::size_t tick;
  double lat = 0.0, lon = 0.0;  // closeby query position
  std::size_t charger_id = 0;   // getCharger argument
};

struct Tick {
  Micros time_us;
  int vehicle;
};

struct Replica {
  const PodSpec* pod;
  bool alive = true;
  std::optional<CloudletId> in_flight;
};

struct InFlight {
  std::size_t replica;
  Call call;
  std::size_t dispatch;  // index into dispatches
};

// Replicas serve one call at a time. Calls wait in a single FIFO at the load
// balancer, which hands the head call to the next live replica in strict
// round-robin order once that replica is free. Service start times therefore
// never decrease in dispatch order.
class ScenarioDriver {
 public:
  ScenarioDriver(const Registry& registry, const ClusterSnapshot& snapshot, const Scenario& scenario)
      : registry_(registry),
        snapshot_(snapshot),
        scenario_(scenario),
        rng_(scenario.rng_seed),
        dc_(build_datacenter(snapshot, scenario.calibration)),
        sim_(dc_.hosts, dc_.vms) {
    std::vector<const PodSpec*> charging;
    for (const auto& p : snapshot.pods) {
      if (p.service == kChargingService) charging.push_back(&p);
      if (p.service == kVehicleService && !vehicle_pod_) vehicle_pod_ = &p;
    }
    std::sort(charging.begin(), charging.end(),
              [](const PodSpec* a, const PodSpec* b) { return a->replica_index < b->replica_index; });
    if (static_cast<int>(charging.size()) != scenario.replicas) {
      throw Error(ErrorCode::kScenario, "scenario expects " + std::to_string(scenario.replicas) +
                                            " charging replicas, snapshot has " +
                                            std::to_string(charging.size()));
    }
    for (const auto* p : charging) {
      replicas_.push_back({p, true, std::nullopt});
      live_.push_back(replicas_.size() - 1);
    }
  }

  ScenarioOutcome run() {
    const Micros duration_us = std::llround(scenario_.duration_s * 1e6);
    const Micros period_us = std::max<Micros>(1, std::llround(scenario_.period_s * 1e6));

    submit_background(duration_us);

    // Vehicle 0 ticks at the scenario start; the others get a seeded phase.
    for (int v = 0; v < scenario_.vehicles; ++v) {
      const Micros phase = v == 0 ? 0 : static_cast<Micros>(rng_.below(period_us));
      for (Micros t = phase; t < duration_us; t += period_us) ticks_.push_back({t, v});
    }
    std::sort(ticks_.begin(), ticks_.end(), [](const Tick& a, const Tick& b) {
      return std::tie(a.time_us, a.vehicle) < std::tie(b.time_us, b.vehicle);
    });
    tick_outstanding_.assign(ticks_.size(), 0);
    tick_random_.assign(ticks_.size(), false);

    struct DriverEvent {
      Micros t;
      int type;  // 0 = kill, 1 = tick
      std::size_t index;
    };
    std::vector<DriverEvent> events;
    for (const auto& f : scenario_.faults) {
      for (std::size_t r = 0; r < replicas_.size(); ++r) {
        if (replicas_[r].pod->replica_index == f.replica_index) {
          events.push_back({std::llround(f.kill_at_s * 1e6), 0, r});
        }
      }
    }
    for (std::size_t i = 0; i < ticks_.size(); ++i) events.push_back({ticks_[i].time_us, 1, i});
    std::sort(events.begin(), events.end(), [](const DriverEvent& a, const DriverEvent& b) {
      return std::tie(a.t, a.type, a.index) < std::tie(b.t, b.type, b.index);
    });

    const auto on_complete = [this](const CloudletRecord& rec) { complete(rec); };
    std::size_t next = 0;
    while (true) {
      const auto te = sim_.next_event_time();
      const bool driver_pending = next < events.size();
      if (!te && !driver_pending) break;
      if (te && (!driver_pending || *te <= events[next].t)) {
        sim_.step(on_complete);
        continue;
      }
      const Micros t = events[next].t;
      sim_.advance_to(t);
      for (; next < events.size() && events[next].t == t; ++next) {
        if (events[next].type == 0) {
          kill(events[next].index);
        } else {
          tick(events[next].index);
        }
      }
      dispatch();
    }
    return finish();
  }

 private:
  void submit_background(Micros duration_us) {
    CloudletId id = kBackgroundIdBase;
    for (const auto& vm : dc_.vms) {
      const double load = scenario_.base_load_for(vm.host_id);
      if (load <= 0.0) continue;
      for (Micros t = 0; t < duration_us; t += 1'000'000) {
        sim_.submit({id++, load * vm.capacity_mips(), 1, t, vm.id});
      }
    }
  }

  void tick(std::size_t index) {
    if (registry_.charger_count() == 0) {
      throw Error(ErrorCode::kScenario, "registry is empty but vehicles issue requests");
    }
    const bool random = rng_.uniform() < scenario_.random_fraction;
    tick_random_[index] = random;
    Call call{random ? CallKind::kChargerCount : CallKind::kClosebyCharger, index};
    if (!random) {
      const BoundingBox box = registry_.bounds();
      call.lat = rng_.uniform(box.min_lat, box.max_lat);
      call.lon = rng_.uniform(box.min_lon, box.max_lon);
    }
    tick_outstanding_[index] = random ? 2 : 1;
    queue_.push_back(call);
  }

  void kill(std::size_t r) {
    Replica& rep = replicas_[r];
    if (!rep.alive) return;
    if (rep.in_flight) {
      const CloudletId id = *rep.in_flight;
      sim_.cancel(id);
      const InFlight f = in_flight_.at(id);
      in_flight_.erase(id);
      dispatches_[f.dispatch].cancelled = true;
      dispatches_[f.dispatch].finish_us = sim_.now();
      queue_.push_front(f.call);
      rep.in_flight.reset();
    }
    rep.alive = false;
    std::erase(live_, r);
    rr_ = 0;
  }

  double cost(CallKind kind) const {
    switch (kind) {
      case CallKind::kChargerCount: return scenario_.op_costs.count_mi;
      case CallKind::kGetCharger: return scenario_.op_costs.get_mi;
      case CallKind::kClosebyCharger:
        return scenario_.op_costs.closeby_mi_per_row * static_cast<double>(registry_.charger_count());
    }
    return 0.0;
  }

  void dispatch() {
    while (!queue_.empty()) {
      if (live_.empty()) {
        throw Error(ErrorCode::kScenario, "all charging replicas are down with requests pending");
      }
      const std::size_t r = live_[rr_ % live_.size()];
      Replica& rep = replicas_[r];
      if (rep.in_flight) break;
      const Call call = queue_.front();
      queue_.pop_front();
      const CloudletId id = next_call_id_++;
      sim_.submit({id, cost(call.kind), 1, sim_.now(), rep.pod->name});
      rep.in_flight = id;
      in_flight_.emplace(id, InFlight{r, call, dispatches_.size()});
      dispatches_.push_back({id, call.kind, rep.pod->replica_index, sim_.now(), sim_.now(), false, std::nullopt});
      ++rr_;
    }
  }

  void complete(const CloudletRecord& rec) {
    if (rec.id >= kBackgroundIdBase) return;
    const InFlight f = in_flight_.at(rec.id);
    in_flight_.erase(rec.id);
    Replica& rep = replicas_[f.replica];
    rep.in_flight.reset();

    DispatchRecord& d = dispatches_[f.dispatch];
    d.finish_us = rec.finish_us;
    if (f.call.kind == CallKind::kGetCharger) {
      d.charger_id = registry_.get_charger(static_cast<long long>(f.call.charger_id)).id;
    } else if (f.call.kind == CallKind::kClosebyCharger) {
      d.charger_id = registry_.closest_charger(f.call.lat, f.call.lon).charger->id;
    }

    Span span;
    span.trace_id = hex_id(f.call.tick + 1, 32);
    span.span_id = hex_id(rec.id, 16);
    if (vehicle_pod_) span.parent_span_id = hex_id(f.call.tick, 16, 'v');
    span.operation = operation_name(f.call.kind);
    span.service_instance = rep.pod->name;
    span.node = rep.pod->node;
    span.start_us = scenario_.start_us + rec.arrival_us;
    span.duration_us = rec.finish_us - rec.arrival_us;
    span.kind = SpanKind::kServer;
    spans_.push_back(std::move(span));

    if (f.call.kind == CallKind::kChargerCount) {
      // The vehicle asks for a random charger once it knows the count.
      Call next{CallKind::kGetCharger, f.call.tick};
      next.charger_id = static_cast<std::size_t>(rng_.below(registry_.charger_count()));
      queue_.push_back(next);
    }
    if (--tick_outstanding_[f.call.tick] == 0) finish_tick(f.call.tick, rec.finish_us);
    dispatch();
  }

  void finish_tick(std::size_t index, Micros finish_us) {
    if (!vehicle_pod_) return;
    Span span;
    span.trace_id = hex_id(index + 1, 32);
    span.span_id = hex_id(index, 16, 'v');
    span.operation = tick_random_[index] ? "getRandomCharger" : "getCloseByCharger";
    span.service_instance = vehicle_pod_->name;
    span.node = vehicle_pod_->node;
    span.start_us = scenario_.start_us + ticks_[index].time_us;
    span.duration_us = finish_us - ticks_[index].time_us;
    span.kind = SpanKind::kClient;
    spans_.push_back(std::move(span));
  }

  ScenarioOutcome finish() {
    ScenarioOutcome out;
    out.ground_truth = sim_.finish();
    out.dispatches = std::move(dispatches_);
    std::sort(spans_.begin(), spans_.end(), [](const Span& a, const Span& b) {
      return std::tie(a.start_us, a.span_id) < std::tie(b.start_us, b.span_id);
    });
    out.bundle.spans = std::move(spans_);
    out.bundle.snapshot = snapshot_;

    Rng noise(scenario_.rng_seed ^ 0x9E3779B97F4A7C15ULL);
    for (const auto& pod : snapshot_.pods) {
      TimeSeries s = utilization_series(out.ground_truth, dc_.pod_to_vm.at(pod.name),
                                        scenario_.metric_step_us);
      s.subject = pod.name;
      s.t0_us = scenario_.start_us;
      if (scenario_.noise_amplitude > 0.0) {
        for (auto& v : s.values) {
          v = std::clamp(v + noise.uniform(-1.0, 1.0) * scenario_.noise_amplitude, 0.0, 1.0);
        }
      }
      out.bundle.metrics.push_back(std::move(s));
    }
    return out;
  }

  const Registry& registry_;
  const ClusterSnapshot& snapshot_;
  const Scenario& scenario_;
  Rng rng_;
  Datacenter dc_;
  Simulation sim_;
  const PodSpec* vehicle_pod_ = nullptr;
  std::vector<Replica> replicas_;
  std::vector<std::size_t> live_;
  std::size_t rr_ = 0;
  std::deque<Call> queue_;
  std::map<CloudletId, InFlight> in_flight_;
  std::vector<Tick> ticks_;
  std::vector<int> tick_outstanding_;
  std::vector<bool> tick_random_;
  std::vector<DispatchRecord> dispatches_;
  std::vector<Span> spans_;
  CloudletId next_call_id_ = 0;
};

}  // namespace

ScenarioOutcome simulate_scenario(const Registry& registry, const ClusterSnapshot& snapshot,
                                  const Scenario& scenario) {
  scenario.validate();
  validate_snapshot(snapshot);
  return ScenarioDriver(registry, snapshot, scenario).run();
}

TelemetryBundle run_scenario(const Registry& registry, const ClusterSnapshot& snapshot,
                             const Scenario& scenario) {
  return simulate_scenario(registry, snapshot, scenario).bundle;
}

}  // namespace cloudmirror

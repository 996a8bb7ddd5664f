#include "cloudmirror/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace cloudmirror {

namespace {

constexpr double kMicrosPerSecond = 1e6;

std::string quoted(const std::string& s) { return "'" + s + "'"; }

}  // namespace

const VmProfile& SimResult::profile(const std::string& vm_id) const {
  for (const auto& p : profiles) {
    if (p.vm_id == vm_id) return p;
  }
  throw Error(ErrorCode::kLookup, "no VM " + quoted(vm_id) + " in result");
}

const CloudletRecord& SimResult::cloudlet(CloudletId id) const {
  auto it = std::lower_bound(
      cloudlets.begin(), cloudlets.end(), id,
      [](const CloudletRecord& r, CloudletId v) { return r.id < v; });
  if (it == cloudlets.end() || it->id != id) {
    throw Error(ErrorCode::kLookup,
                "no cloudlet " + std::to_string(id) + " in result");
  }
  return *it;
}

Simulation::Simulation(std::vector<Host> hosts, std::vector<Vm> vms,
                       EngineOptions options)
    : options_(options) {
  std::map<std::string, const Host*> host_lookup;
  std::map<std::string, int> used_cores;
  for (const auto& h : hosts) {
    if (h.cores < 1 || !(h.mips_per_core > 0.0) || h.memory_mb < 1) {
      throw Error(ErrorCode::kConfiguration,
                  "host " + quoted(h.id) + " needs positive cores, mips and memory");
    }
    if (!host_lookup.emplace(h.id, &h).second) {
      throw Error(ErrorCode::kConfiguration, "duplicate host " + quoted(h.id));
    }
  }
  for (auto& vm : vms) {
    auto host = host_lookup.find(vm.host_id);
    if (host == host_lookup.end()) {
      throw Error(ErrorCode::kConfiguration,
                  "VM " + quoted(vm.id) + " placed on unknown host " +
                      quoted(vm.host_id));
    }
    if (vm.cores < 1 || !(vm.mips_per_core > 0.0) || vm.memory_mb < 1) {
      throw Error(ErrorCode::kConfiguration,
                  "VM " + quoted(vm.id) + " needs positive cores, mips and memory");
    }
    if (vm.mips_per_core > host->second->mips_per_core) {
      throw Error(ErrorCode::kConfiguration,
                  "VM " + quoted(vm.id) + " is rated faster than host " +
                      quoted(vm.host_id));
    }
    int& used = used_cores[vm.host_id];
    used += vm.cores;
    if (used > host->second->cores) {
      throw Error(ErrorCode::kConfiguration,
                  "VM overcommit on host " + quoted(vm.host_id) + ": " +
                      std::to_string(used) + " cores requested, " +
                      std::to_string(host->second->cores) + " available");
    }
    if (!vm_lookup_.emplace(vm.id, vms_.size()).second) {
      throw Error(ErrorCode::kConfiguration, "duplicate VM " + quoted(vm.id));
    }
    VmState state;
    state.profile.vm_id = vm.id;
    state.profile.capacity_mips = vm.capacity_mips();
    state.vm = std::move(vm);
    vms_.push_back(std::move(state));
  }
}

std::size_t Simulation::vm_index(const std::string& vm_id) const {
  auto it = vm_lookup_.find(vm_id);
  if (it == vm_lookup_.end()) {
    throw Error(ErrorCode::kPlacement, "cloudlet targets unknown VM " + quoted(vm_id));
  }
  return it->second;
}

void Simulation::submit(const Cloudlet& cloudlet) {
  const auto& vm = vms_[vm_index(cloudlet.vm_id)].vm;
  const std::string name = "cloudlet " + std::to_string(cloudlet.id);
  if (!(cloudlet.length_mi > 0.0) || !std::isfinite(cloudlet.length_mi)) {
    throw Error(ErrorCode::kConfiguration, name + " needs a positive finite length");
  }
  if (cloudlet.required_cores < 1 || cloudlet.required_cores > vm.cores) {
    throw Error(ErrorCode::kConfiguration,
                name + " requires " + std::to_string(cloudlet.required_cores) +
                    " cores, VM " + quoted(vm.id) + " has " +
                    std::to_string(vm.cores));
  }
  if (cloudlet.start_offset_us < now_) {
    throw Error(ErrorCode::kConfiguration, name + " starts in the past");
  }
  if (records_.count(cloudlet.id) || pending_.count(cloudlet.id)) {
    throw Error(ErrorCode::kConfiguration, "duplicate " + name);
  }
  pending_.emplace(cloudlet.id, cloudlet);
  arrivals_.emplace(cloudlet.start_offset_us, cloudlet.id);
}

void Simulation::cancel(CloudletId id) {
  if (auto it = pending_.find(id); it != pending_.end()) {
    arrivals_.erase({it->second.start_offset_us, id});
    pending_.erase(it);
    return;
  }
  auto rec = records_.find(id);
  auto is_id = [id](const Active& a) { return a.id == id; };
  if (rec == records_.end() ||
      std::none_of(vms_[vm_index(rec->second.vm_id)].active.begin(),
                   vms_[vm_index(rec->second.vm_id)].active.end(), is_id)) {
    throw Error(ErrorCode::kLookup, "cloudlet " + std::to_string(id) + " is not running");
  }
  auto& state = vms_[vm_index(rec->second.vm_id)];
  advance_vm(state, now_);
  std::erase_if(state.active, is_id);
  reallocate(state);
  rec->second.finish_us = now_;
  rec->second.cancelled = true;
  end_us_ = std::max(end_us_, now_);
}

std::optional<Micros> Simulation::next_event_time() const {
  std::optional<Micros> next;
  if (!arrivals_.empty()) next = arrivals_.begin()->first;
  for (const auto& state : vms_) {
    if (state.next_completion_us && (!next || *state.next_completion_us < *next)) {
      next = state.next_completion_us;
    }
  }
  return next;
}

void Simulation::advance_to(Micros t) {
  if (t < now_) {
    throw Error(ErrorCode::kConfiguration, "clock cannot move backwards");
  }
  if (auto next = next_event_time(); next && *next < t) {
    throw Error(ErrorCode::kConfiguration, "advance would skip a pending event");
  }
  now_ = t;
}

void Simulation::append_interval(VmState& state, Micros start, Micros end,
                                 double util) {
  if (end <= start) return;
  auto& intervals = state.profile.intervals;
  if (!intervals.empty() && intervals.back().end_us == start &&
      intervals.back().utilization == util) {
    intervals.back().end_us = end;
  } else {
    intervals.push_back({start, end, util});
  }
}

void Simulation::advance_vm(VmState& state, Micros t) {
  if (t <= state.last_update_us) return;
  const Micros start = state.last_update_us;
  const double dt_s = static_cast<double>(t - start) / kMicrosPerSecond;
  double work = 0.0;
  for (auto& a : state.active) {
    double done = std::min(a.remaining_mi, a.rate_mips * dt_s);
    if (a.predicted_finish_us <= t) done = a.remaining_mi;
    a.remaining_mi -= done;
    work += done;
  }
  const double capacity = state.vm.capacity_mips();
  const double util =
      state.active.empty() ? 0.0 : std::min(1.0, work / (capacity * dt_s));
  append_interval(state, start, t, util);
  if (options_.record_allocations && !state.active.empty()) {
    AllocationSlice slice{state.vm.id, start, t, {}};
    for (const auto& a : state.active) slice.mips.emplace_back(a.id, a.rate_mips);
    allocations_.push_back(std::move(slice));
  }
  state.last_update_us = t;
}

void Simulation::reallocate(VmState& state) {
  state.next_completion_us.reset();
  auto& active = state.active;
  if (active.empty()) return;

  // Max-min fair split: satisfy the smallest caps first, then divide what is
  // left equally among the rest. Equal caps always receive the same value.
  std::vector<std::size_t> order(active.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return active[x].cap_mips < active[y].cap_mips;
  });
  double left = state.vm.capacity_mips();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double share = left / static_cast<double>(order.size() - k);
    if (active[order[k]].cap_mips >= share) {
      for (std::size_t j = k; j < order.size(); ++j) active[order[j]].rate_mips = share;
      break;
    }
    active[order[k]].rate_mips = active[order[k]].cap_mips;
    left -= active[order[k]].cap_mips;
  }

  for (auto& a : active) {
    const double need_us =
        (a.remaining_mi - kCompletionEpsilonMi) / a.rate_mips * kMicrosPerSecond;
    const Micros delta = std::max<Micros>(1, static_cast<Micros>(std::ceil(need_us)));
    a.predicted_finish_us = now_ + delta;
    if (!state.next_completion_us || a.predicted_finish_us < *state.next_completion_us) {
      state.next_completion_us = a.predicted_finish_us;
    }
  }
}

void Simulation::step(const CompletionHandler& on_complete) {
  const auto next = next_event_time();
  if (!next) return;
  const Micros t = *next;
  now_ = t;
  end_us_ = std::max(end_us_, t);

  std::vector<CloudletId> finished;
  for (auto& state : vms_) {
    if (state.next_completion_us != t) continue;
    advance_vm(state, t);
    std::erase_if(state.active, [&](const Active& a) {
      const bool done =
          a.predicted_finish_us <= t || a.remaining_mi <= kCompletionEpsilonMi;
      if (done) finished.push_back(a.id);
      return done;
    });
    reallocate(state);
  }
  std::sort(finished.begin(), finished.end());
  for (CloudletId id : finished) {
    auto& rec = records_.at(id);
    rec.finish_us = t;
    if (on_complete) on_complete(rec);
  }

  std::set<std::size_t> touched;
  while (!arrivals_.empty() && arrivals_.begin()->first == t) {
    const CloudletId id = arrivals_.begin()->second;
    arrivals_.erase(arrivals_.begin());
    auto node = pending_.extract(id);
    const Cloudlet& c = node.mapped();
    const std::size_t idx = vm_index(c.vm_id);
    auto& state = vms_[idx];
    advance_vm(state, t);
    Active a{c.id, c.length_mi, c.required_cores * state.vm.mips_per_core};
    auto pos = std::lower_bound(
        state.active.begin(), state.active.end(), c.id,
        [](const Active& x, CloudletId v) { return x.id < v; });
    state.active.insert(pos, a);
    records_[c.id] = CloudletRecord{c.id, c.vm_id, t, t, false};
    touched.insert(idx);
  }
  for (std::size_t idx : touched) reallocate(vms_[idx]);
}

SimResult Simulation::finish() {
  while (!idle()) step();
  SimResult result;
  result.end_us = end_us_;
  for (auto& state : vms_) {
    advance_vm(state, end_us_);
    result.profiles.push_back(state.profile);
  }
  result.cloudlets.reserve(records_.size());
  for (const auto& [id, rec] : records_) result.cloudlets.push_back(rec);
  result.allocations = allocations_;
  return result;
}

SimResult run(const std::vector<Host>& hosts, const std::vector<Vm>& vms,
              const std::vector<Cloudlet>& cloudlets, EngineOptions options) {
  Simulation sim(hosts, vms, options);
  for (const auto& c : cloudlets) sim.submit(c);
  while (!sim.idle()) sim.step();
  return sim.finish();
}

TimeSeries utilization_series(const SimResult& result, const std::string& vm_id,
                              Micros bucket_us) {
  if (bucket_us <= 0) {
    throw Error(ErrorCode::kDomain, "bucket width must be positive");
  }
  const auto& profile = result.profile(vm_id);
  TimeSeries series;
  series.subject = vm_id;
  series.metric = kCpuUtilization;
  series.t0_us = 0;
  series.step_us = bucket_us;
  const Micros n = (result.end_us + bucket_us - 1) / bucket_us;
  series.values.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& iv : profile.intervals) {
    if (iv.utilization == 0.0) continue;
    for (Micros k = iv.start_us / bucket_us; k < n && k * bucket_us < iv.end_us; ++k) {
      const Micros lo = std::max(iv.start_us, k * bucket_us);
      const Micros hi = std::min(iv.end_us, (k + 1) * bucket_us);
      series.values[static_cast<std::size_t>(k)] +=
          iv.utilization * static_cast<double>(hi - lo);
    }
  }
  for (auto& v : series.values) {
    v = std::clamp(v / static_cast<double>(bucket_us), 0.0, 1.0);
  }
  return series;
}

}  // namespace cloudmirror

#pragma once

// Reference implementations used only by tests. Each one is written from the
// textbook definition and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cloudmirror/registry.hpp"
#include "cloudmirror/telemetry.hpp"

namespace oracle {

// atan2 form of the haversine distance; numerically distinct from asin.
inline double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  const double r = 6371.0088;
  const double rad = std::numbers::pi / 180.0;
  const double dphi = (lat2 - lat1) * rad;
  const double dl = (lon2 - lon1) * rad;
  const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * r * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

// Linear scans. Distances come from the library's haversine so the oracles
// test the search, and ties are decided the same way on identical doubles.
inline std::pair<std::size_t, double> nearest(const cloudmirror::Registry& reg, double lat,
                                              double lon) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& c : reg.chargers()) {
    const double d = cloudmirror::haversine_km(lat, lon, c.latitude, c.longitude);
    if (d < best_d) {
      best_d = d;
      best = c.id;
    }
  }
  return {best, best_d};
}

inline std::vector<std::pair<double, std::size_t>> in_range(const cloudmirror::Registry& reg,
                                                            double lat, double lon, double r) {
  std::vector<std::pair<double, std::size_t>> out;
  for (const auto& c : reg.chargers()) {
    const double d = cloudmirror::haversine_km(lat, lon, c.latitude, c.longitude);
    if (d <= r) out.emplace_back(d, c.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Time-weighted mean of a step function over [lo, hi) by summing sample
// overlaps, clipped to coverage. Returns 0 when nothing is covered.
inline double window_mean(const cloudmirror::TimeSeries& s, std::int64_t lo, std::int64_t hi) {
  double area = 0.0;
  std::int64_t covered = 0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const std::int64_t a = s.t0_us + static_cast<std::int64_t>(i) * s.step_us;
    const std::int64_t b = a + s.step_us;
    const std::int64_t l = std::max(a, lo), h = std::min(b, hi);
    if (h > l) {
      area += s.values[i] * static_cast<double>(h - l);
      covered += h - l;
    }
  }
  return covered ? area / static_cast<double>(covered) : 0.0;
}

struct Job {
  double arrival_s;
  double length_mi;
  double cap_mips;
};

// Continuous-time processor sharing on one VM: max-min split of capacity
// between active jobs, each capped. Returns finish times in seconds.
inline std::vector<double> fluid_ps(const std::vector<Job>& jobs, double capacity) {
  const std::size_t n = jobs.size();
  std::vector<double> remaining(n), finish(n, -1.0);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = jobs[i].length_mi;
  double t = 0.0;
  std::size_t done = 0;
  while (done < n) {
    std::vector<std::size_t> active;
    double next_arrival = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (finish[i] >= 0) continue;
      if (jobs[i].arrival_s <= t) {
        active.push_back(i);
      } else {
        next_arrival = std::min(next_arrival, jobs[i].arrival_s);
      }
    }
    if (active.empty()) {
      t = next_arrival;
      continue;
    }
    // Water-filling: satisfy the smallest caps first.
    std::sort(active.begin(), active.end(),
              [&](std::size_t a, std::size_t b) { return jobs[a].cap_mips < jobs[b].cap_mips; });
    std::map<std::size_t, double> rate;
    double left = capacity;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double share = left / static_cast<double>(active.size() - k);
      const double r = std::min(share, jobs[active[k]].cap_mips);
      rate[active[k]] = r;
      left -= r;
    }
    double dt = next_arrival - t;
    for (auto i : active) dt = std::min(dt, remaining[i] / rate[i]);
    for (auto i : active) {
      remaining[i] -= rate[i] * dt;
      if (remaining[i] <= 1e-9 * jobs[i].length_mi) {
        finish[i] = t + dt;
        ++done;
      }
    }
    t += dt;
  }
  return finish;
}

}  // namespace oracle

#include "cloudmirror/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cloudmirror/error.hpp"
#include "json_util.hpp"

namespace cloudmirror {

using nlohmann::json;
using nlohmann::ordered_json;

void DeviationParams::validate() const {
  if (step_us <= 0) throw Error(ErrorCode::kValidation, "stepMicros must be positive");
  if (!(abs_threshold > 0.0 && abs_threshold <= 1.0)) {
    throw Error(ErrorCode::kValidation, "absThreshold must lie in (0,1]");
  }
  if (min_consecutive < 1) {
    throw Error(ErrorCode::kValidation, "minConsecutive must be at least 1");
  }
}

DeviationParams parse_deviation_params(std::string_view text) {
  const std::string where = "deviation params";
  const json doc = json_util::parse_document(text, where);
  DeviationParams p;
  p.step_us = json_util::optional_int(doc, "stepMicros", p.step_us, where);
  p.abs_threshold = json_util::optional_number(doc, "absThreshold", p.abs_threshold, where);
  p.min_consecutive = static_cast<int>(
      json_util::optional_int(doc, "minConsecutive", p.min_consecutive, where));
  p.validate();
  return p;
}

const char* subject_status_name(SubjectStatus status) {
  switch (status) {
    case SubjectStatus::kCompared: return "compared";
    case SubjectStatus::kSimulatedOnly: return "simulated_only";
    case SubjectStatus::kObservedOnly: return "observed_only";
    case SubjectStatus::kDisjoint: return "disjoint";
  }
  return "unknown";
}

bool DeviationReport::anomalous() const {
  return std::any_of(subjects.begin(), subjects.end(),
                     [](const SubjectReport& s) { return s.anomalous(); });
}

const SubjectReport* DeviationReport::find(std::string_view subject) const {
  for (const auto& s : subjects) {
    if (s.subject == subject) return &s;
  }
  return nullptr;
}

namespace {

using Key = std::pair<std::string, std::string>;

std::map<Key, const TimeSeries*> index_series(const std::vector<TimeSeries>& list,
                                              const char* side) {
  std::map<Key, const TimeSeries*> out;
  for (const auto& s : list) {
    if (!out.emplace(Key{s.subject, s.metric}, &s).second) {
      throw Error(ErrorCode::kInput, std::string(side) + " input lists " + s.subject + "/" +
                                         s.metric + " twice");
    }
  }
  return out;
}

void compare_pair(const TimeSeries& sim, const TimeSeries& obs,
                  const DeviationParams& params, SubjectReport& report) {
  AlignedPair pair;
  try {
    pair = align(sim, obs, params.step_us);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyOverlap) throw;
    report.status = SubjectStatus::kDisjoint;
    return;
  }
  report.window_start_us = pair.window_start_us;
  report.window_end_us = pair.window_end_us;
  const auto& a = pair.a.values;
  const auto& b = pair.b.values;
  report.buckets = a.size();

  double abs_sum = 0.0, sim_sum = 0.0, obs_sum = 0.0;
  std::size_t run_start = 0;
  std::size_t run_len = 0;
  double run_sum = 0.0;
  auto close_run = [&](std::size_t end) {
    if (run_len >= static_cast<std::size_t>(params.min_consecutive)) {
      report.anomaly_intervals.push_back(
          {pair.window_start_us + static_cast<Micros>(run_start) * params.step_us,
           std::min(pair.window_end_us,
                    pair.window_start_us + static_cast<Micros>(end) * params.step_us),
           run_sum / static_cast<double>(run_len)});
    }
    run_len = 0;
    run_sum = 0.0;
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    abs_sum += std::abs(d);
    sim_sum += a[i];
    obs_sum += b[i];
    report.max_abs_deviation = std::max(report.max_abs_deviation, std::abs(d));
    if (std::abs(d) > params.abs_threshold) {
      if (run_len == 0) run_start = i;
      ++run_len;
      run_sum += d;
    } else {
      close_run(i);
    }
  }
  close_run(a.size());
  const double n = static_cast<double>(a.size());
  report.mean_abs_deviation = abs_sum / n;
  report.simulated_mean = sim_sum / n;
  report.observed_mean = obs_sum / n;
}

}  // namespace

DeviationReport detect_deviations(const std::vector<TimeSeries>& simulated,
                                  const std::vector<TimeSeries>& observed,
                                  const DeviationParams& params) {
  params.validate();
  const auto sim = index_series(simulated, "simulated");
  const auto obs = index_series(observed, "observed");
  bool any_match = false;
  for (const auto& [key, s] : sim) any_match = any_match || obs.count(key);
  if (!any_match) {
    throw Error(ErrorCode::kInput, "simulated and observed inputs share no subject");
  }

  std::map<Key, SubjectReport> merged;
  for (const auto& [key, s] : sim) {
    SubjectReport r;
    r.subject = key.first;
    r.metric = key.second;
    auto match = obs.find(key);
    if (match == obs.end()) {
      r.status = SubjectStatus::kSimulatedOnly;
    } else {
      compare_pair(*s, *match->second, params, r);
    }
    merged.emplace(key, std::move(r));
  }
  for (const auto& [key, s] : obs) {
    if (sim.count(key)) continue;
    SubjectReport r;
    r.subject = key.first;
    r.metric = key.second;
    r.status = SubjectStatus::kObservedOnly;
    merged.emplace(key, std::move(r));
  }

  DeviationReport report;
  report.params = params;
  for (auto& [key, r] : merged) report.subjects.push_back(std::move(r));
  return report;
}

std::string serialize_report(const DeviationReport& report) {
  ordered_json subjects = ordered_json::array();
  for (const auto& s : report.subjects) {
    ordered_json j;
    j["subject"] = s.subject;
    j["metric"] = s.metric;
    j["status"] = subject_status_name(s.status);
    j["anomalous"] = s.anomalous();
    j["windowStartMicros"] = s.window_start_us;
    j["windowEndMicros"] = s.window_end_us;
    j["buckets"] = s.buckets;
    j["maxAbsDeviation"] = s.max_abs_deviation;
    j["meanAbsDeviation"] = s.mean_abs_deviation;
    j["simulatedMean"] = s.simulated_mean;
    j["observedMean"] = s.observed_mean;
    ordered_json intervals = ordered_json::array();
    for (const auto& iv : s.anomaly_intervals) {
      ordered_json k;
      k["startMicros"] = iv.start_us;
      k["endMicros"] = iv.end_us;
      k["meanSignedDeviation"] = iv.mean_signed_deviation;
      intervals.push_back(std::move(k));
    }
    j["anomalyIntervals"] = std::move(intervals);
    subjects.push_back(std::move(j));
  }
  ordered_json params;
  params["stepMicros"] = report.params.step_us;
  params["absThreshold"] = report.params.abs_threshold;
  params["minConsecutive"] = report.params.min_consecutive;
  ordered_json doc;
  doc["anomalous"] = report.anomalous();
  doc["params"] = std::move(params);
  doc["subjects"] = std::move(subjects);
  return doc.dump(2) + "\n";
}

std::string render_report_table(const DeviationReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %-15s %8s %8s %8s %8s  %s\n", "SUBJECT", "STATUS",
                "SIM", "REAL", "MEAN|D|", "MAX|D|", "ANOMALIES");
  out << line;
  for (const auto& s : report.subjects) {
    std::string anomalies = s.anomaly_intervals.empty() ? "-" : "";
    for (const auto& iv : s.anomaly_intervals) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s[+%.0fs,+%.0fs) d=%+.3f", anomalies.empty() ? "" : " ",
                    static_cast<double>(iv.start_us - s.window_start_us) / 1e6,
                    static_cast<double>(iv.end_us - s.window_start_us) / 1e6,
                    iv.mean_signed_deviation);
      anomalies += buf;
    }
    std::snprintf(line, sizeof line, "%-32s %-15s %8.3f %8.3f %8.3f %8.3f  ", s.subject.c_str(),
                  subject_status_name(s.status), s.simulated_mean, s.observed_mean,
                  s.mean_abs_deviation, s.max_abs_deviation);
    out << line << anomalies << "\n";
  }
  out << (report.anomalous() ? "result: ANOMALY DETECTED\n" : "result: no anomaly\n");
  return out.str();
}

}  // namespace cloudmirror

#include <doctest.h>

#include <random>

#include "cloudmirror/error.hpp"
#include "cloudmirror/mirror.hpp"
#include "cloudmirror/scenario.hpp"

using namespace cloudmirror;

namespace {

Span server(const std::string& id, const std::string& pod, Micros start, Micros dur) {
  return {"t", id, std::nullopt, "op", pod, "", start, dur, SpanKind::kServer};
}

ClusterSnapshot cluster() { return default_cluster(3, 0); }

std::string pod(int i) { return "charging-stations-" + std::to_string(i); }

const TimeSeries& series_of(const std::vector<TimeSeries>& all, const std::string& subject) {
  for (const auto& s : all) {
    if (s.subject == subject) return s;
  }
  FAIL("no series for " << subject);
  return all.front();
}

}  // namespace

TEST_CASE("cloudlet length and offsets") {
  const auto w = derive_cloudlets({server("a", pod(0), 10'000'500, 2'000'000),
                                   server("b", pod(0), 10'002'500, 1000)},
                                  cluster(), {});
  REQUIRE(w.cloudlets.size() == 2);
  CHECK(w.epoch_us == 10'000'500);
  CHECK(w.cloudlets[0].length_mi == 2000.0);
  CHECK(w.cloudlets[0].start_offset_us == 0);
  CHECK(w.cloudlets[1].start_offset_us == 2000);
  const auto empty = derive_cloudlets({}, cluster(), {});
  CHECK(empty.cloudlets.empty());
  CHECK(empty.epoch_us == 0);
}

TEST_CASE("busy fraction and per-node rating scale the length") {
  MirrorConfig cfg;
  cfg.calibration.busy_fraction = 0.5;
  cfg.calibration.mips_per_core = 3000;
  auto snap = cluster();
  snap.nodes[1].mips_per_core = 500.0;
  cfg.placement = Placement::kRecordedInstance;
  const auto w = derive_cloudlets({server("a", pod(0), 0, 1'000'000), server("b", pod(1), 0, 1'000'000)},
                                  snap, cfg);
  CHECK(w.cloudlets[0].length_mi == 250.0);
  CHECK(w.cloudlets[1].length_mi == 1500.0);
}

TEST_CASE("client spans are filtered unless asked for") {
  Span client = server("c", "vehicle-service-0", 0, 100);
  client.kind = SpanKind::kClient;
  const std::vector<Span> spans{client, server("s", pod(0), 10, 50)};
  CHECK(derive_cloudlets(spans, cluster(), {}).cloudlets.size() == 1);
  MirrorConfig all;
  all.span_filter = SpanFilter::kAllSpans;
  CHECK(derive_cloudlets(spans, cluster(), all).cloudlets.size() == 2);
}

TEST_CASE("unknown instance is a mapping error") {
  try {
    derive_cloudlets({server("s", "ghost-pod", 0, 10)}, cluster(), {});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMapping);
    CHECK(std::string(e.what()).find("ghost-pod") != std::string::npos);
  }
}

TEST_CASE("round-robin placement spreads spans over declared replicas") {
  // All spans recorded on replica 0, as after two replicas failed.
  std::vector<Span> spans;
  for (int i = 0; i < 9; ++i) spans.push_back(server("s" + std::to_string(i), pod(0), i * 1000, 100));
  const auto rr = derive_cloudlets(spans, cluster(), {});
  std::map<std::string, int> counts;
  for (const auto& c : rr.cloudlets) counts[c.vm_id]++;
  CHECK(counts[pod(0)] == 3);
  CHECK(counts[pod(1)] == 3);
  CHECK(counts[pod(2)] == 3);
  MirrorConfig rec;
  rec.placement = Placement::kRecordedInstance;
  for (const auto& c : derive_cloudlets(spans, cluster(), rec).cloudlets) CHECK(c.vm_id == pod(0));
}

TEST_CASE("mirror run examples") {
  SUBCASE("no spans gives one empty series per pod") {
    const auto out = mirror_run({{}, {}, cluster()}, {});
    CHECK(out.size() == cluster().pods.size());
    for (const auto& s : out) CHECK(s.values.empty());
  }
  SUBCASE("one two-second span") {
    MirrorConfig rec;
    rec.placement = Placement::kRecordedInstance;
    TelemetryBundle b{{server("a", pod(1), 5'000'000, 2'000'000), server("z", pod(0), 5'000'000, 4'000'000)},
                      {},
                      cluster()};
    const auto out = mirror_run(b, rec);
    CHECK(series_of(out, pod(1)).values == std::vector<double>{1.0, 1.0, 0.0, 0.0});
    CHECK(series_of(out, pod(1)).t0_us == 5'000'000);
    CHECK(series_of(out, pod(2)).values == std::vector<double>{0.0, 0.0, 0.0, 0.0});
  }
  SUBCASE("equal round-robin spans give equal series") {
    std::vector<Span> spans;
    for (int i = 0; i < 30; ++i) {
      spans.push_back(server("s" + std::to_string(100 + i), pod(i % 3), i * 100'000, 80'000));
    }
    const auto out = mirror_run({spans, {}, cluster()}, {});
    const auto& a = series_of(out, pod(0)).values;
    const auto& b = series_of(out, pod(1)).values;
    const auto& c = series_of(out, pod(2)).values;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      // Offsets of at most two spans shift work across one bucket edge.
      CHECK(std::abs(a[i] - b[i]) <= 0.2 + 1e-12);
      CHECK(std::abs(a[i] - c[i]) <= 0.2 + 1e-12);
    }
  }
}

TEST_CASE("replay properties") {
  std::mt19937_64 gen(13);
  for (int round = 0; round < 40; ++round) {
    // Non-overlapping spans per pod.
    std::vector<Span> spans;
    std::uniform_int_distribution<int> gap(1, 400'000), dur(1, 300'000);
    for (int p = 0; p < 3; ++p) {
      Micros t = 1'000'000 + gap(gen);
      for (int i = 0; i < 15; ++i) {
        const Micros d = dur(gen);
        spans.push_back(server("p" + std::to_string(p) + "-" + std::to_string(100 + i), pod(p), t, d));
        t += d + gap(gen);
      }
    }
    MirrorConfig cfg;
    cfg.placement = Placement::kRecordedInstance;
    const TelemetryBundle bundle{spans, {}, cluster()};
    const auto out = mirror_simulate(bundle, cfg);
    for (std::size_t i = 0; i < out.workload.source_spans.size(); ++i) {
      const auto& rec = out.result.cloudlet(i);
      CHECK(rec.finish_us - rec.arrival_us == out.workload.source_spans[i].duration_us);
    }
    CHECK(mirror_run(bundle, cfg) == out.series);

    auto shifted = spans;
    for (auto& s : shifted) s.start_us += 7'777'777;
    auto moved = mirror_run({shifted, {}, cluster()}, cfg);
    for (std::size_t i = 0; i < moved.size(); ++i) {
      CHECK(moved[i].t0_us == out.series[i].t0_us + 7'777'777);
      moved[i].t0_us = out.series[i].t0_us;
      CHECK(moved[i] == out.series[i]);
    }

    auto fast = cfg;
    fast.calibration.mips_per_core *= 2;
    const auto doubled = mirror_simulate(bundle, fast);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const auto& rec = doubled.result.cloudlet(i);
      CHECK(rec.finish_us - rec.arrival_us == doubled.workload.source_spans[i].duration_us);
    }
  }
}

TEST_CASE("bundle validation and config parsing") {
  TelemetryBundle b{{}, {{"nowhere", kCpuUtilization, 0, 1000, {}}}, cluster()};
  CHECK_THROWS_AS(validate_bundle(b), Error);
  const auto cfg = parse_mirror_config(R"({"bucketMicros": 500000, "placement": "recorded_instance",
    "calibration": {"mipsPerCore": 2000}})");
  CHECK(cfg.bucket_us == 500'000);
  CHECK(cfg.placement == Placement::kRecordedInstance);
  CHECK(cfg.calibration.mips_per_core == 2000.0);
  CHECK_THROWS_AS(parse_mirror_config(R"({"spanFilter": "some"})"), Error);
  CHECK_THROWS_AS(parse_mirror_config(R"({"bucketMicros": 0})"), Error);
}

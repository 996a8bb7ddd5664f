#include <doctest.h>

#include <cmath>
#include <random>

#include "cloudmirror/error.hpp"
#include "cloudmirror/telemetry.hpp"
#include "oracles.hpp"

using namespace cloudmirror;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

TimeSeries series(std::vector<double> v, Micros step = 1'000'000, Micros t0 = 0) {
  return {"vm", kCpuUtilization, t0, step, std::move(v)};
}

const char* kTwoSpans = R"({"spans": [
  {"traceId": "t1", "spanId": "b", "parentSpanId": "a", "operation": "getCharger",
   "serviceInstance": "p1", "node": "n1", "startMicros": 100, "durationMicros": 10, "kind": "server"},
  {"traceId": "t1", "spanId": "a", "operation": "getRandomCharger",
   "serviceInstance": "p0", "node": "n0", "startMicros": 50, "durationMicros": 80, "kind": "client"}
]})";

}  // namespace

TEST_CASE("trace parsing sorts by start") {
  const auto spans = parse_traces(kTwoSpans);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].start_us == 50);
  CHECK(spans[1].start_us == 100);
  CHECK(spans[1].parent_span_id == "a");
  CHECK_FALSE(spans[0].parent_span_id);
  CHECK(spans[0].kind == SpanKind::kClient);
  CHECK(parse_traces(R"({"spans": []})").empty());
}

TEST_CASE("trace parsing errors") {
  CHECK(code_of([] { parse_traces(R"({"spans": [)"); }) == ErrorCode::kParse);
  CHECK(code_of([] {
          parse_traces(R"({"spans": [{"traceId": "t", "spanId": "s", "operation": "o",
            "serviceInstance": "p", "node": "n", "startMicros": 1, "durationMicros": 0,
            "kind": "server"}]})");
        }) == ErrorCode::kValidation);
  CHECK(code_of([] {
          parse_traces(R"({"spans": [{"traceId": "t", "spanId": "s", "operation": "o",
            "serviceInstance": "p", "node": "n", "startMicros": "x", "durationMicros": 3,
            "kind": "server"}]})");
        }) == ErrorCode::kParse);
  try {
    parse_traces(R"({"spans": [{"traceId": "t"}, 3]})");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("record 0") != std::string::npos);
  }
}

TEST_CASE("trace round trip is identity") {
  const auto spans = parse_traces(kTwoSpans);
  CHECK(parse_traces(serialize_traces(spans)) == spans);
  CHECK(serialize_traces(parse_traces(serialize_traces(spans))) == serialize_traces(spans));
}

TEST_CASE("metrics parsing") {
  const auto s = parse_metrics(R"({"series": [
    {"subject": "a", "metric": "cpu_utilization", "t0Micros": 0, "stepMicros": 1000000, "values": [0.2, 0.4]},
    {"subject": "b", "metric": "cpu_utilization", "t0Micros": 5, "stepMicros": 10, "values": []}]})");
  REQUIRE(s.size() == 2);
  CHECK(s[0].values == std::vector<double>{0.2, 0.4});
  CHECK(s[1].subject == "b");
  CHECK(parse_metrics(serialize_metrics(s)) == s);
  CHECK(code_of([] {
          parse_metrics(R"({"series": [{"subject": "a", "metric": "cpu_utilization",
            "t0Micros": 0, "stepMicros": 1000000, "values": [1.5]}]})");
        }) == ErrorCode::kValidation);
  CHECK(code_of([] {
          parse_metrics(R"({"series": [{"subject": "a", "metric": "cpu_utilization",
            "t0Micros": 0, "stepMicros": 0, "values": []}]})");
        }) == ErrorCode::kValidation);
}

TEST_CASE("resampling examples") {
  CHECK(resample(series({1.0, 1.0}, 500'000), 1'000'000).values == std::vector<double>{1.0});
  CHECK(resample(series({1.0, 0.0}), 500'000).values == std::vector<double>{1.0, 1.0, 0.0, 0.0});
  const auto r = resample(series({1.0, 0.0}), 800'000);
  REQUIRE(r.values.size() == 3);
  // Oracle: bucket means over [0,.8), [.8,1.6), [1.6,2.0).
  const auto s = series({1.0, 0.0});
  CHECK(r.values[0] == doctest::Approx(oracle::window_mean(s, 0, 800'000)));
  CHECK(r.values[1] == doctest::Approx(oracle::window_mean(s, 800'000, 1'600'000)));
  CHECK(r.values[2] == doctest::Approx(oracle::window_mean(s, 1'600'000, 2'000'000)));
  CHECK(r.values[1] == doctest::Approx(0.25));
  CHECK(resample(series({}), 700).values.empty());
}

TEST_CASE("resampling conserves the integral and is an identity at its own step") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 40), step(1, 5000), t0(-10000, 10000);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(len(gen));
    for (auto& x : v) x = val(gen);
    const auto s = series(v, step(gen), t0(gen));
    CHECK(resample(s, s.step_us) == s);
    const Micros new_step = step(gen);
    const auto r = resample(s, new_step);
    const double a = integrate(s, s.t0_us, s.end_us());
    double b = 0.0;
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      const Micros lo = r.t0_us + static_cast<Micros>(k) * new_step;
      const Micros hi = std::min(lo + new_step, s.end_us());
      b += r.values[k] * static_cast<double>(hi - lo);
    }
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      const Micros lo = r.t0_us + static_cast<Micros>(k) * new_step;
      CHECK(r.values[k] == doctest::Approx(oracle::window_mean(s, lo, lo + new_step)));
    }
  }
}

TEST_CASE("alignment") {
  const auto a = series(std::vector<double>(10, 0.3));
  SUBCASE("identical inputs") {
    const auto p = align(a, a, 1'000'000);
    CHECK(p.a == p.b);
    CHECK(p.a == a);
  }
  SUBCASE("partial overlap") {
    const auto b = series(std::vector<double>(10, 0.6), 1'000'000, 5'000'000);
    const auto p = align(a, b, 1'000'000);
    CHECK(p.window_start_us == 5'000'000);
    CHECK(p.window_end_us == 10'000'000);
    CHECK(p.a.values.size() == 5);
    CHECK(p.b.values.size() == 5);
    const auto q = align(b, a, 1'000'000);
    CHECK(q.window_start_us == p.window_start_us);
    CHECK(q.window_end_us == p.window_end_us);
  }
  SUBCASE("disjoint") {
    const auto b = series(std::vector<double>(5, 0.6), 1'000'000, 10'000'000);
    const auto c = series(std::vector<double>(5, 0.6));
    CHECK(code_of([&] { align(c, b, 1'000'000); }) == ErrorCode::kEmptyOverlap);
  }
}

TEST_CASE("alignment windows are symmetric on random ranges") {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> len(1, 20), t0(0, 30), step(1, 4);
  for (int i = 0; i < 100; ++i) {
    const auto a = series(std::vector<double>(len(gen), 0.1), step(gen), t0(gen));
    const auto b = series(std::vector<double>(len(gen), 0.2), step(gen), t0(gen));
    const bool overlap = std::max(a.t0_us, b.t0_us) < std::min(a.end_us(), b.end_us());
    if (!overlap) {
      CHECK_THROWS_AS(align(a, b, 3), Error);
      CHECK_THROWS_AS(align(b, a, 3), Error);
      continue;
    }
    const auto p = align(a, b, 3), q = align(b, a, 3);
    CHECK(p.window_start_us == q.window_start_us);
    CHECK(p.window_end_us == q.window_end_us);
    CHECK(p.a == q.b);
    CHECK(p.b == q.a);
  }
}

// Exit-code matrix for the command-line tool. CM_CLI and CM_DATA are set by
// the build.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

const fs::path kData = CM_DATA;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("cloudmirror_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int cli(const std::string& args) {
  const std::string cmd = std::string(CM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string scenario(const std::string& name) { return (kData / "scenarios" / name).string(); }
const std::string kRegistry = (kData / "chargers_500.csv").string();

}  // namespace

TEST_CASE("generate") {
  TempDir t;
  CHECK(cli("generate --scenario " + scenario("baseline.json") + " --registry " + kRegistry +
            " --out " + t / "out") == 0);
  for (const char* f : {"snapshot.json", "traces.json", "metrics.json"}) {
    CHECK(fs::exists(t.path / "out" / f));
  }
  CHECK(cli("generate --scenario " + t / "missing.json" + " --registry " + kRegistry + " --out " +
            t / "x") == 2);
  write(t / "bad.csv", std::string("operator;street;house_number;zip;city;state;district;latitude;"
                                   "longitude;points;plug_types;power_kw\n") +
                           "Op;S;1;7;C;S;D;abc;9;1;Type2;22\n");
  CHECK(cli("generate --scenario " + scenario("baseline.json") + " --registry " + t / "bad.csv" +
            " --out " + t / "x") == 3);
  CHECK(cli("generate --scenario " + scenario("baseline.json") + " --registry " + t / "none.csv" +
            " --out " + t / "x") == 3);
  write(t / "invalid.json", R"({"vehicles": 2, "periodSeconds": -1, "durationSeconds": 5, "rngSeed": 1})");
  CHECK(cli("generate --scenario " + t / "invalid.json" + " --registry " + kRegistry + " --out " +
            t / "x") == 2);
  CHECK(cli("generate --scenario " + scenario("baseline.json")) == 2);
  CHECK(cli("bogus") == 2);
}

TEST_CASE("mirror") {
  TempDir t;
  REQUIRE(cli("generate --scenario " + scenario("baseline.json") + " --registry " + kRegistry +
              " --out " + t / "g") == 0);
  CHECK(cli("mirror --snapshot " + t / "g/snapshot.json" + " --traces " + t / "g/traces.json" +
            " --out " + t / "sim.json") == 0);
  CHECK(read(t / "sim.json").find("\"series\"") != std::string::npos);
  CHECK(cli("mirror --snapshot " + t / "g/snapshot.json" + " --traces " + t / "g/traces.json" +
            " --config " + (kData / "mirror_config.json").string() + " --out " + t / "sim2.json") == 0);

  write(t / "dangling.json", R"({"capturedAtMicros": 0,
    "nodes": [{"name": "w1", "cpuCores": 2, "memoryMb": 1, "role": "worker"}],
    "pods": [{"name": "p", "node": "w9", "service": "s", "replicaIndex": 0}]})");
  CHECK(cli("mirror --snapshot " + t / "dangling.json" + " --traces " + t / "g/traces.json" +
            " --out " + t / "x.json") == 3);
  write(t / "empty.json", R"({"spans": []})");
  CHECK(cli("mirror --snapshot " + t / "g/snapshot.json" + " --traces " + t / "empty.json" +
            " --out " + t / "e.json") == 0);
  write(t / "badcfg.json", R"({"bucketMicros": -5})");
  CHECK(cli("mirror --snapshot " + t / "g/snapshot.json" + " --traces " + t / "g/traces.json" +
            " --config " + t / "badcfg.json" + " --out " + t / "x.json") == 2);
  CHECK(cli("mirror --snapshot " + t / "g/snapshot.json" + " --traces " + t / "nope.json" +
            " --out " + t / "x.json") == 3);
}

TEST_CASE("compare") {
  TempDir t;
  REQUIRE(cli("generate --scenario " + scenario("baseline.json") + " --registry " + kRegistry +
              " --out " + t / "g") == 0);
  const std::string m = t / "g/metrics.json";
  CHECK(cli("compare --sim " + m + " --observed " + m + " --report " + t / "r.json") == 0);
  CHECK(read(t / "r.json").find("\"anomalous\": false") != std::string::npos);
  write(t / "other.json", R"({"series": [{"subject": "x", "metric": "cpu_utilization",
    "t0Micros": 0, "stepMicros": 1000000, "values": [0.1]}]})");
  CHECK(cli("compare --sim " + m + " --observed " + t / "other.json" + " --report " + t / "r2.json") == 3);
  write(t / "params.json", R"({"minConsecutive": 0})");
  CHECK(cli("compare --sim " + m + " --observed " + m + " --params " + t / "params.json" +
            " --report " + t / "r3.json") == 2);
  CHECK(cli("compare --sim " + m + " --observed " + m + " --params " +
            (kData / "deviation_params.json").string() + " --report " + t / "r4.json") == 0);
}

TEST_CASE("pipeline") {
  TempDir t;
  CHECK(cli("pipeline --scenario " + scenario("no_fault.json") + " --registry " + kRegistry +
            " --out " + t / "a") == 0);
  CHECK(cli("pipeline --scenario " + scenario("fault.json") + " --registry " + kRegistry +
            " --out " + t / "b") == 1);
  CHECK(read(t / "b/report.json").find("\"anomalous\": true") != std::string::npos);
  write(t / "invalid.json", R"({"vehicles": 2})");
  CHECK(cli("pipeline --scenario " + t / "invalid.json" + " --registry " + kRegistry + " --out " +
            t / "c") == 2);
  CHECK(cli("pipeline --scenario " + scenario("fault.json") + " --registry " + kRegistry +
            " --out " + t / "d") == 1);
  for (const char* f : {"snapshot.json", "traces.json", "metrics.json", "simulated.json", "report.json"}) {
    CHECK(read(t / (std::string("b/") + f)) == read(t / (std::string("d/") + f)));
  }
}

TEST_CASE("fixture") {
  TempDir t;
  CHECK(cli("fixture --rows 50 --seed 3 --out " + t / "a.csv") == 0);
  CHECK(cli("fixture --rows 50 --seed 3 --out " + t / "b.csv") == 0);
  CHECK(read(t / "a.csv") == read(t / "b.csv"));
  CHECK(cli("fixture --rows 500 --seed 1 --out " + t / "c.csv") == 0);
  CHECK(read(t / "c.csv") == read(kRegistry));
}

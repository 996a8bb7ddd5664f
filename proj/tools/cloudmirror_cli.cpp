// Command-line front end. Talks to the library through the C API only.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cloudmirror/cloudmirror.h"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kAnomaly = 1, kUsage = 2, kData = 3 };

// Carries an exit code out of a command body.
struct Failure {
  int code;
};

[[noreturn]] void die(int code, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  throw Failure{code};
}

[[noreturn]] void die_status(int code, const std::string& context) {
  die(code, context + ": " + cm_last_error());
}

std::string read_file(const std::string& path, int code_on_failure) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die(code_on_failure, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) die(kData, "cannot write " + path.string());
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) die(kData, "cannot create directory " + dir + ": " + ec.message());
}

struct CString {
  char* p = nullptr;
  ~CString() { cm_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() { Free(p); }
};

using RegistryHandle = Handle<cm_registry, cm_registry_free>;
using ScenarioHandle = Handle<cm_scenario, cm_scenario_free>;
using ConfigHandle = Handle<cm_mirror_config, cm_mirror_config_free>;
using ParamsHandle = Handle<cm_deviation_params, cm_deviation_params_free>;
using ReportHandle = Handle<cm_report, cm_report_free>;

struct Documents {
  std::string snapshot, traces, metrics;
};

Documents generate(const std::string& scenario_path, const std::string& registry_path) {
  const std::string scenario_text = read_file(scenario_path, kUsage);
  ScenarioHandle scenario;
  if (cm_scenario_parse(scenario_text.data(), scenario_text.size(), &scenario.p) != CM_OK) {
    die_status(kUsage, scenario_path);
  }
  const std::string csv = read_file(registry_path, kData);
  RegistryHandle registry;
  if (cm_registry_load(csv.data(), csv.size(), &registry.p) != CM_OK) {
    die_status(kData, registry_path);
  }
  CString snap, traces, metrics;
  const cm_status st = cm_generate(registry.p, scenario.p, &snap.p, &traces.p, &metrics.p);
  if (st == CM_ERR_SCENARIO) die_status(kUsage, "scenario");
  if (st != CM_OK) die_status(kData, "generate");
  return {snap.str(), traces.str(), metrics.str()};
}

std::string mirror(const std::string& snapshot, const std::string& traces,
                   const std::optional<std::string>& config_path) {
  ConfigHandle config;
  if (config_path) {
    const std::string text = read_file(*config_path, kUsage);
    if (cm_mirror_config_parse(text.data(), text.size(), &config.p) != CM_OK) {
      die_status(kUsage, *config_path);
    }
  }
  CString out;
  if (cm_mirror(snapshot.c_str(), traces.c_str(), config.p, &out.p) != CM_OK) {
    die_status(kData, "mirror");
  }
  return out.str();
}

// Writes the report and prints the table; returns 1 when anomalous.
int compare(const std::string& sim, const std::string& observed,
            const std::optional<std::string>& params_path, const fs::path& report_path) {
  ParamsHandle params;
  if (params_path) {
    const std::string text = read_file(*params_path, kUsage);
    if (cm_deviation_params_parse(text.data(), text.size(), &params.p) != CM_OK) {
      die_status(kUsage, *params_path);
    }
  }
  ReportHandle report;
  if (cm_compare(sim.c_str(), observed.c_str(), params.p, &report.p) != CM_OK) {
    die_status(kData, "compare");
  }
  CString json, table;
  if (cm_report_json(report.p, &json.p) != CM_OK || cm_report_table(report.p, &table.p) != CM_OK) {
    die_status(kData, "report");
  }
  write_file(report_path, json.str());
  std::cout << table.str();
  return cm_report_anomalous(report.p) ? kAnomaly : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror recorded traces into a simulation and flag deviations"};
  app.require_subcommand(1);

  std::string scenario, registry, out, snapshot, traces, sim, observed;
  std::optional<std::string> config, params;
  std::size_t rows = 500;
  std::uint64_t seed = 1;

  auto* gen = app.add_subcommand("generate", "Run a scenario and write its telemetry");
  gen->add_option("--scenario", scenario)->required();
  gen->add_option("--registry", registry)->required();
  gen->add_option("--out", out, "Output directory")->required();

  auto* mir = app.add_subcommand("mirror", "Simulate per-pod utilization from traces");
  mir->add_option("--snapshot", snapshot)->required();
  mir->add_option("--traces", traces)->required();
  mir->add_option("--config", config);
  mir->add_option("--out", out, "Simulated metrics file")->required();

  auto* cmp = app.add_subcommand("compare", "Compare simulated and observed metrics");
  cmp->add_option("--sim", sim)->required();
  cmp->add_option("--observed", observed)->required();
  cmp->add_option("--params", params);
  cmp->add_option("--report", out, "Report file")->required();

  auto* pipe = app.add_subcommand("pipeline", "generate, mirror and compare in one go");
  pipe->add_option("--scenario", scenario)->required();
  pipe->add_option("--registry", registry)->required();
  pipe->add_option("--out", out, "Output directory")->required();

  auto* fix = app.add_subcommand("fixture", "Write a synthetic charger registry");
  fix->add_option("--rows", rows)->capture_default_str();
  fix->add_option("--seed", seed)->capture_default_str();
  fix->add_option("--out", out, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      const Documents docs = generate(scenario, registry);
      ensure_dir(out);
      write_file(fs::path(out) / "snapshot.json", docs.snapshot);
      write_file(fs::path(out) / "traces.json", docs.traces);
      write_file(fs::path(out) / "metrics.json", docs.metrics);
      return kOk;
    }
    if (*mir) {
      const std::string snap = read_file(snapshot, kData);
      const std::string tr = read_file(traces, kData);
      write_file(out, mirror(snap, tr, config));
      return kOk;
    }
    if (*cmp) {
      return compare(read_file(sim, kData), read_file(observed, kData), params, out);
    }
    if (*pipe) {
      const Documents docs = generate(scenario, registry);
      ensure_dir(out);
      const fs::path dir(out);
      write_file(dir / "snapshot.json", docs.snapshot);
      write_file(dir / "traces.json", docs.traces);
      write_file(dir / "metrics.json", docs.metrics);
      const std::string simulated = mirror(docs.snapshot, docs.traces, std::nullopt);
      write_file(dir / "simulated.json", simulated);
      return compare(simulated, docs.metrics, std::nullopt, dir / "report.json");
    }
    if (*fix) {
      CString csv;
      if (cm_fixture_csv(rows, seed, &csv.p) != CM_OK) die_status(kUsage, "fixture");
      write_file(out, csv.str());
      return kOk;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kUsage;
}

// Copyright 2025 The ALAS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "alas/cli.hpp"
#include "alas/log.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/ir_fixtures.hpp"

using namespace alas;
namespace fs = std::filesystem;
namespace ts = alas::testsupport;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("alas_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    auto p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

int run(const std::vector<std::string>& args, std::string* stdout_text = nullptr) {
  std::ostringstream out, err;
  int code = cli::dispatch(args, out, err);
  if (stdout_text) *stdout_text = out.str();
  return code;
}

}  // namespace

TEST_CASE("solve happy path") {
  TempDir dir;
  auto instance = dir.file("tiny.jssp", ts::kTiny2x2);
  std::string output;
  int code = run({"solve", "--instance", instance, "--planner", "spt", "--seed", "1"},
                 &output);
  CHECK(code == 0);
  auto doc = Json::parse(output);
  CHECK(doc["makespan"] == ts::kTiny2x2Optimum);
  CHECK(doc["valid"] == true);
}

TEST_CASE("validate flags the overlapping schedule with exit 2") {
  TempDir dir;
  auto instance = dir.file("two.jssp", "2 1\n0 2\n0 2\n");
  auto schedule = dir.file("bad.json", R"([
    {"job":"Job1","step":1,"machine":"Machine0","start":0,"end":2,"duration":2},
    {"job":"Job2","step":1,"machine":"Machine0","start":1,"end":3,"duration":2}
  ])");
  std::string output;
  int code = run({"validate", "--schedule", schedule, "--instance", instance}, &output);
  CHECK(code == 2);
  auto doc = Json::parse(output);
  CHECK(doc["valid"] == false);
  bool overlap = false;
  for (const auto& e : doc["errors"])
    if (e["code"] == "machine_overlap") overlap = true;
  CHECK(overlap);
}

TEST_CASE("disrupt reproduces the white-box outcome") {
  TempDir dir;
  auto instance = dir.file("fig2.jssp", ts::kWhitebox5x3);
  auto schedule = dir.file("fig2_static.json",
                           jssp::schedule_to_json(ts::whitebox_static_schedule()).dump());
  std::string output;
  int code = run({"disrupt", "--instance", instance, "--schedule", schedule,
                  "--breakdown", "M1:5:8", "--wip", "1.0"},
                 &output);
  CHECK(code == 0);
  auto doc = Json::parse(output);
  CHECK(doc["makespan"] == 22);
  CHECK(doc["wipUnits"] == 1);
}

TEST_CASE("usage errors exit 1") {
  std::ostringstream out, err;
  CHECK(cli::dispatch({"solve"}, out, err) == 1);  // missing --instance
  CHECK(cli::dispatch({"frobnicate"}, out, err) == 1);
  CHECK(cli::dispatch({"disrupt", "--instance", "/nonexistent.jssp", "--breakdown",
                       "garbage"},
                      out, err) == 1);
}

TEST_CASE("repair writes per-iteration snapshots") {
  TempDir dir;
  auto instance = dir.file("fig2.jssp", ts::kWhitebox5x3);
  auto corrupted = ts::whitebox_static_schedule();
  for (auto& e : corrupted.entries)
    if (e.job == "Job2" && e.step == 3) {
      e.start = 2;
      e.end = e.start + e.duration;
    }
  auto schedule = dir.file("bad.json", jssp::schedule_to_json(corrupted).dump());
  std::string output;
  int code = run({"repair", "--schedule", schedule, "--instance", instance,
                  "--budget", "5", "--outdir", dir.sub("iters")},
                 &output);
  CHECK(code == 0);
  auto doc = Json::parse(output);
  CHECK(doc["errorsAfter"] == 0);
  CHECK(fs::exists(dir.sub("iters") + "/fig2_repair_iteration_1.json"));
}

TEST_CASE("convert emits, checks, and ingests") {
  TempDir dir;
  auto ir_file = dir.file("wf.json", ts::kPlanRepairIr);
  std::string output;
  CHECK(run({"convert", "--ir", ir_file, "--to", "asl", "--check"}, &output) == 0);
  CHECK(Json::parse(output)["parityOk"] == true);

  auto asl_file = dir.sub("wf.asl.json");
  CHECK(run({"convert", "--ir", ir_file, "--to", "asl", "--out", asl_file}) == 0);
  CHECK(run({"convert", "--ingest", asl_file, "--from", "asl"}, &output) == 0);
  CHECK(output.find("\"Workflow\"") != std::string::npos);

  CHECK(run({"convert", "--ir", ir_file, "--to", "argo", "--check"}, &output) == 0);
  CHECK(Json::parse(output)["parityOk"] == true);
}

TEST_CASE("recorded logs parse and replay through the CLI") {
  TempDir dir;
  auto instance = dir.file("fig2.jssp", ts::kWhitebox5x3);
  std::string output;
  int code = run({"solve", "--instance", instance, "--planner", "random", "--seed",
                  "42", "--log", dir.sub("logs")},
                 &output);
  CHECK(code == 0);
  std::string log_path = Json::parse(output)["logPath"];
  CHECK(fs::exists(log_path));
  // The file is valid NDJSON loadable by the log module.
  auto loaded = log::VersionedLog::load_ndjson(log_path);
  CHECK(loaded.size() > 0);

  CHECK(run({"replay", "--log", log_path, "--seed", "42"}, &output) == 0);
  CHECK(Json::parse(output)["parityOk"] == true);
  CHECK(run({"replay", "--log", log_path, "--seed", "43"}, &output) == 2);
}

TEST_CASE("report summarizes runs and fails cleanly when empty") {
  TempDir dir;
  std::ostringstream out, err;
  CHECK(cli::dispatch({"report", "--results", dir.sub("empty")}, out, err) == 1);

  auto instance = dir.file("tiny.jssp", ts::kTiny2x2);
  run({"solve", "--instance", instance, "--seed", "7", "--log", dir.sub("logs")});
  std::string output;
  CHECK(run({"report", "--results", dir.sub("logs")}, &output) == 0);
  auto paths = Json::parse(output);
  std::ifstream csv(paths["csv"].get<std::string>());
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "instance,seed,makespan,editRadius,iterations,wallTime");
  CHECK(row.find("tiny,7,") == 0);
}

TEST_CASE("disrupted runs carry downtime into the gantt data") {
  TempDir dir;
  auto instance = dir.file("fig2.jssp", ts::kWhitebox5x3);
  auto schedule = dir.file("fig2_static.json",
                           jssp::schedule_to_json(ts::whitebox_static_schedule()).dump());
  run({"disrupt", "--instance", instance, "--schedule", schedule, "--breakdown",
       "M1:5:8", "--wip", "1.0", "--log", dir.sub("logs")});
  std::string output;
  CHECK(run({"report", "--results", dir.sub("logs")}, &output) == 0);
  auto paths = Json::parse(output);
  std::ifstream gantt_file(paths["gantt"].get<std::string>());
  auto gantt = Json::parse(gantt_file);
  REQUIRE(gantt["runs"].size() == 1);
  CHECK(gantt["runs"][0]["downtime"]["Machine1"][0] == Json::array({5, 8}));
  CHECK(gantt["runs"][0]["machines"].contains("Machine1"));
}

TEST_CASE("solve accepts a configuration document") {
  TempDir dir;
  auto instance = dir.file("tiny.jssp", ts::kTiny2x2);
  auto config = dir.file("run.json", Json{{"instancePath", instance},
                                          {"instanceName", "tiny"},
                                          {"rule", "spt"},
                                          {"seed", 3}}
                                         .dump());
  std::string output;
  CHECK(run({"solve", "--config", config}, &output) == 0);
  CHECK(Json::parse(output)["makespan"] == ts::kTiny2x2Optimum);
}

TEST_CASE("ALAS_SEED overrides the seed flag") {
  TempDir dir;
  auto instance = dir.file("tiny.jssp", ts::kTiny2x2);
  setenv("ALAS_SEED", "99", 1);
  std::string output;
  int code = run({"solve", "--instance", instance, "--seed", "1"}, &output);
  unsetenv("ALAS_SEED");
  CHECK(code == 0);
  CHECK(Json::parse(output)["seed"] == 99);
}

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

#include "alas/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "alas/convert.hpp"
#include "alas/ir.hpp"
#include "alas/jssp.hpp"
#include "alas/lcrp.hpp"
#include "alas/log.hpp"
#include "alas/runtime.hpp"

namespace alas::cli {

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int machine_arg(const std::string& text) {
  if (int idx = jssp::machine_index(text); idx >= 0) return idx;
  std::string digits = text;
  if (!digits.empty() && (digits[0] == 'M' || digits[0] == 'm'))
    digits = digits.substr(1);
  char* end = nullptr;
  long value = std::strtol(digits.c_str(), &end, 10);
  if (end == digits.c_str() || *end != '\0')
    throw Error("UsageError", "cannot parse machine '" + text + "'");
  return static_cast<int>(value);
}

int job_arg(const std::string& text) {
  if (int idx = jssp::job_index(text); idx >= 0) return idx;
  std::string digits = text;
  if (!digits.empty() && (digits[0] == 'J' || digits[0] == 'j'))
    digits = digits.substr(1);
  char* end = nullptr;
  long value = std::strtol(digits.c_str(), &end, 10);
  if (end == digits.c_str() || *end != '\0' || value < 1)
    throw Error("UsageError", "cannot parse job '" + text + "'");
  return static_cast<int>(value) - 1;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

// --breakdown <machine>:<from>:<to>
jssp::DisruptionEvent parse_breakdown(const std::string& text) {
  auto parts = split(text, ':');
  if (parts.size() != 3)
    throw Error("UsageError", "--breakdown expects <machine>:<from>:<to>");
  jssp::DisruptionEvent event;
  event.kind = jssp::DisruptionKind::machineBreakdown;
  jssp::BreakdownWindow window;
  window.machine = machine_arg(parts[0]);
  window.from = std::stoll(parts[1]);
  window.to = std::stoll(parts[2]);
  if (window.to < window.from)
    throw Error("UsageError", "--breakdown window must have from <= to");
  event.at_time = window.from;
  event.breakdown = window;
  return event;
}

// --shock <job>:<step>:<±delta>
jssp::DisruptionEvent parse_shock(const std::string& text) {
  auto parts = split(text, ':');
  if (parts.size() != 3)
    throw Error("UsageError", "--shock expects <job>:<step>:<delta>");
  jssp::DisruptionEvent event;
  event.kind = jssp::DisruptionKind::durationShock;
  jssp::DurationShock shock;
  shock.job = job_arg(parts[0]);
  shock.step = std::stoi(parts[1]);
  shock.delta = std::stoll(parts[2]);
  event.shock = shock;
  event.at_time = 0;
  return event;
}

std::vector<jssp::BreakdownWindow> windows_of(
    const std::vector<jssp::DisruptionEvent>& events) {
  std::vector<jssp::BreakdownWindow> windows;
  for (const auto& e : events)
    if (e.breakdown) windows.push_back(*e.breakdown);
  return windows;
}

std::uint64_t effective_seed(std::uint64_t flag_seed) {
  if (const char* env = std::getenv("ALAS_SEED")) {
    char* end = nullptr;
    std::uint64_t value = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return value;  // env overrides the flag
  }
  return flag_seed;
}

int run_solve_like(const std::string& instance_path, const std::string& planner,
                   std::uint64_t seed, int budget,
                   const std::vector<jssp::DisruptionEvent>& disruptions,
                   double wip, const std::string& faults_path,
                   const std::string& policy_file, const std::string& log_dir,
                   const std::string& schedule_path, bool no_optimize,
                   std::ostream& out) {
  runtime::RunConfig config;
  config.instance_path = instance_path;
  config.planner_rule = jssp::planner_rule_from_string(planner);
  config.seed = effective_seed(seed);
  config.repair_budget = budget;
  config.disruptions = disruptions;
  config.wip_penalty = wip;
  config.faults_path = faults_path;
  config.policy_file = policy_file;
  config.log_dir = log_dir;
  if (!schedule_path.empty()) {
    config.preset_schedule = Json::parse(slurp(schedule_path));
    if (!disruptions.empty()) config.optimize = false;  // plan is committed
  }
  if (no_optimize) config.optimize = false;

  auto outcome = runtime::run_pipeline(config);
  out << outcome.result.to_json().dump(2) << "\n";
  return outcome.result.valid ? 0 : 2;
}

int cmd_validate(const std::string& schedule_path, const std::string& instance_path,
                 const std::vector<std::string>& breakdowns, std::ostream& out) {
  auto instance = jssp::parse_instance(slurp(instance_path),
                                       fs::path(instance_path).stem().string());
  std::vector<jssp::DisruptionEvent> events;
  for (const auto& b : breakdowns) events.push_back(parse_breakdown(b));
  auto report = jssp::validate_schedule_json(Json::parse(slurp(schedule_path)),
                                             instance, windows_of(events));
  out << jssp::report_to_json(report).dump(2) << "\n";
  return report.valid ? 0 : 2;
}

int cmd_repair(const std::string& schedule_path, const std::string& instance_path,
               int budget, const std::string& outdir, std::ostream& out) {
  auto instance = jssp::parse_instance(slurp(instance_path),
                                       fs::path(instance_path).stem().string());
  auto schedule = jssp::schedule_from_json(Json::parse(slurp(schedule_path)));
  auto errors = jssp::validate_schedule(schedule, instance).errors;

  lcrp::IterationSink sink;
  if (!outdir.empty()) {
    fs::create_directories(outdir);
    std::string dataset = instance.name.empty() ? "schedule" : instance.name;
    sink = [outdir, dataset](int k, const jssp::Schedule& snapshot, int) {
      std::ofstream file(fs::path(outdir) /
                         (dataset + "_repair_iteration_" + std::to_string(k) + ".json"));
      file << jssp::schedule_to_json(snapshot).dump(2) << "\n";
    };
  }
  auto result = lcrp::repair(schedule, instance, errors, budget, sink);
  out << lcrp::repair_result_to_json(result).dump(2) << "\n";
  return result.errors_after == 0 ? 0 : 2;
}

int cmd_convert(const std::string& ir_path, const std::string& to,
                const std::string& ingest_path, const std::string& from,
                const std::string& out_path, bool check, std::ostream& out) {
  if (!ingest_path.empty()) {
    std::string text = slurp(ingest_path);
    ir::WorkflowIR ir =
        from == "argo" ? convert::ingest_argo(text) : convert::ingest_asl(text);
    std::string serialized = ir::serialize_ir(ir);
    if (!out_path.empty()) {
      std::ofstream file(out_path);
      file << serialized << "\n";
    } else {
      out << serialized << "\n";
    }
    return 0;
  }
  auto ir = ir::parse_ir(slurp(ir_path));
  auto diagnostics = ir::check_well_formed(ir);
  if (!diagnostics.empty()) {
    out << ir::diagnostics_to_json(diagnostics).dump(2) << "\n";
    return 2;
  }
  convert::Target target = to == "argo" ? convert::Target::argo : convert::Target::asl;
  std::string text =
      target == convert::Target::argo ? convert::emit_argo(ir) : convert::emit_asl(ir);
  if (!out_path.empty()) {
    std::ofstream file(out_path);
    file << text;
  } else if (!check) {
    out << text;
  }
  if (check) {
    auto report = convert::roundtrip_check(ir, target);
    out << convert::report_to_json(report).dump(2) << "\n";
    return report.parity_ok ? 0 : 2;
  }
  return 0;
}

int cmd_replay(const std::string& log_path, std::uint64_t seed, std::ostream& out) {
  auto recorded = log::VersionedLog::load_ndjson(log_path);
  try {
    auto outcome = log::replay(recorded, runtime::pipeline_registry(),
                               effective_seed(seed));
    Json doc;
    doc["parityOk"] = outcome.parity_ok;
    doc["finalStateHash"] = outcome.final_state_hash;
    out << doc.dump(2) << "\n";
    return 0;
  } catch (const log::ReplayDivergence& ex) {
    Json doc;
    doc["parityOk"] = false;
    doc["divergenceIndex"] = ex.index();
    doc["message"] = ex.what();
    out << doc.dump(2) << "\n";
    return 2;
  }
}

}  // namespace

ReportPaths emit_report(const std::string& results_dir, const std::string& out_dir) {
  std::vector<fs::path> files;
  if (fs::exists(results_dir))
    for (const auto& entry : fs::directory_iterator(results_dir))
      if (entry.path().string().ends_with(".result.json"))
        files.push_back(entry.path());
  if (files.empty())
    throw NoResults("no *.result.json files under " + results_dir);
  std::sort(files.begin(), files.end());

  fs::create_directories(out_dir);
  ReportPaths paths;
  paths.csv = (fs::path(out_dir) / "report.csv").string();
  paths.gantt = (fs::path(out_dir) / "gantt.json").string();

  std::ofstream csv(paths.csv);
  csv << "instance,seed,makespan,editRadius,iterations,wallTime\n";
  Json gantt;
  gantt["runs"] = Json::array();

  for (const auto& file : files) {
    auto result = runtime::RunResult::from_json(Json::parse(slurp(file.string())));
    csv << result.instance_name << "," << result.seed << "," << result.makespan << ","
        << result.edit_radius.ops_touched << "," << result.repair_iterations << ","
        << result.wall_time_ms << "\n";

    Json tracks = Json::object();
    for (const auto& e : result.final_schedule.entries) {
      if (!tracks.contains(e.machine)) tracks[e.machine] = Json::array();
      tracks[e.machine].push_back(Json{{"job", e.job},
                                       {"step", e.step},
                                       {"start", e.start},
                                       {"end", e.end}});
    }
    Json downtime = Json::object();
    for (const auto& w : result.downtime) {
      std::string machine = jssp::machine_name(w.machine);
      if (!downtime.contains(machine)) downtime[machine] = Json::array();
      downtime[machine].push_back(Json::array({w.from, w.to}));
    }
    gantt["runs"].push_back(Json{{"instance", result.instance_name},
                                 {"seed", result.seed},
                                 {"makespan", result.makespan},
                                 {"machines", std::move(tracks)},
                                 {"downtime", std::move(downtime)}});
  }
  std::ofstream gantt_file(paths.gantt);
  gantt_file << gantt.dump(2) << "\n";
  return paths;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Disruption-aware scheduling and workflow reliability engine"};
  app.require_subcommand(1);

  std::string instance_path, schedule_path, planner = "spt";
  std::uint64_t seed = 1;
  int budget = 5;
  double wip = 1.0;
  std::string faults_path, policy_file, log_dir, outdir;
  std::vector<std::string> breakdowns, shocks;
  bool no_optimize = false;

  auto add_common = [&](CLI::App* cmd, bool with_disruptions) {
    cmd->add_option("--planner", planner, "Dispatch rule: spt|lpt|fifo|random");
    cmd->add_option("--seed", seed, "Run seed (env ALAS_SEED overrides)");
    cmd->add_option("--budget", budget, "Repair iteration budget");
    cmd->add_option("--faults", faults_path, "Fault plan JSON file");
    cmd->add_option("--policy", policy_file, "Stage policy IR document");
    cmd->add_option("--log", log_dir, "Directory for <run-id>.ndjson and result");
    cmd->add_option("--schedule", schedule_path, "Precomputed schedule JSON");
    cmd->add_flag("--no-optimize", no_optimize, "Skip the optimization step");
    if (with_disruptions) {
      cmd->add_option("--breakdown", breakdowns,
                      "Machine breakdown <machine>:<from>:<to> (repeatable)");
      cmd->add_option("--shock", shocks,
                      "Duration shock <job>:<step>:<delta> (repeatable)");
      cmd->add_option("--wip", wip, "WIP penalty per displaced unit");
    }
  };

  std::string config_path;
  auto* solve = app.add_subcommand("solve", "Run the full pipeline on an instance");
  solve->add_option("--instance", instance_path, "OR-library instance file");
  solve->add_option("--config", config_path, "Run configuration JSON document");
  add_common(solve, false);

  auto* validate = app.add_subcommand("validate", "Validate a schedule");
  validate->add_option("--schedule", schedule_path, "Schedule JSON file")->required();
  validate->add_option("--instance", instance_path, "Instance file")->required();
  validate->add_option("--breakdown", breakdowns, "Downtime window to respect");

  auto* repair = app.add_subcommand("repair", "Repair a corrupted schedule");
  repair->add_option("--schedule", schedule_path, "Schedule JSON file")->required();
  repair->add_option("--instance", instance_path, "Instance file")->required();
  repair->add_option("--budget", budget, "Repair iteration budget");
  repair->add_option("--outdir", outdir, "Directory for per-iteration snapshots");

  auto* disrupt = app.add_subcommand("disrupt", "Run the pipeline with disruptions");
  disrupt->add_option("--instance", instance_path, "OR-library instance file")
      ->required();
  add_common(disrupt, true);

  std::string ir_path, to = "asl", ingest_path, from = "asl", out_path;
  bool check = false;
  auto* convert_cmd =
      app.add_subcommand("convert", "Emit or ingest engine documents");
  convert_cmd->add_option("--ir", ir_path, "Workflow IR JSON document");
  convert_cmd->add_option("--to", to, "Target engine: asl|argo");
  convert_cmd->add_option("--ingest", ingest_path, "Engine document to ingest");
  convert_cmd->add_option("--from", from, "Source engine for --ingest: asl|argo");
  convert_cmd->add_option("--out", out_path, "Write output here instead of stdout");
  convert_cmd->add_flag("--check", check, "Run the round-trip parity check");

  std::string log_path;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a recorded run log");
  replay_cmd->add_option("--log", log_path, "NDJSON run log")->required();
  replay_cmd->add_option("--seed", seed, "Seed the recording used");

  std::string results_dir, report_out;
  auto* report_cmd = app.add_subcommand("report", "Summarize result files");
  report_cmd->add_option("--results", results_dir, "Directory of result files")
      ->required();
  report_cmd->add_option("--out", report_out, "Output directory (default results)");

  std::vector<std::string> cli_args = args;
  std::reverse(cli_args.begin(), cli_args.end());  // CLI11 wants reversed argv tail
  try {
    app.parse(cli_args);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) {  // --help
      out << app.help();
      return 0;
    }
    err << ex.what() << "\n";
    return 1;
  }

  try {
    std::vector<jssp::DisruptionEvent> events;
    for (const auto& b : breakdowns) events.push_back(parse_breakdown(b));
    for (const auto& s : shocks) events.push_back(parse_shock(s));

    if (solve->parsed()) {
      if (!config_path.empty()) {
        auto config = runtime::RunConfig::from_json(Json::parse(slurp(config_path)));
        config.seed = effective_seed(config.seed);
        auto outcome = runtime::run_pipeline(config);
        out << outcome.result.to_json().dump(2) << "\n";
        return outcome.result.valid ? 0 : 2;
      }
      if (instance_path.empty())
        throw Error("UsageError", "solve needs --instance or --config");
      return run_solve_like(instance_path, planner, seed, budget, {}, wip,
                            faults_path, policy_file, log_dir, schedule_path,
                            no_optimize, out);
    }
    if (validate->parsed())
      return cmd_validate(schedule_path, instance_path, breakdowns, out);
    if (repair->parsed())
      return cmd_repair(schedule_path, instance_path, budget, outdir, out);
    if (disrupt->parsed())
      return run_solve_like(instance_path, planner, seed, budget, events, wip,
                            faults_path, policy_file, log_dir, schedule_path,
                            no_optimize, out);
    if (convert_cmd->parsed())
      return cmd_convert(ir_path, to, ingest_path, from, out_path, check, out);
    if (replay_cmd->parsed()) return cmd_replay(log_path, seed, out);
    if (report_cmd->parsed()) {
      auto paths = emit_report(results_dir,
                               report_out.empty() ? results_dir : report_out);
      out << Json{{"csv", paths.csv}, {"gantt", paths.gantt}}.dump(2) << "\n";
      return 0;
    }
  } catch (const PipelineHalted& ex) {
    err << "pipeline halted: " << ex.what() << "\n";
    return 3;
  } catch (const Error& ex) {
    err << ex.code() << ": " << ex.what() << "\n";
    return 1;
  }
  err << "no subcommand\n";
  return 1;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args);
}

}  // namespace alas::cli

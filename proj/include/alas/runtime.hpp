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
//
// The seven-step execution loop: plan, validate, repair, revalidate,
// optimize, final check, supervise — with disruption handling and full
// logging. Every stage is a pure function of its logged input payload, so a
// recorded run replays bit-for-bit (timestamps excluded).

#ifndef ALAS_RUNTIME_HPP_
#define ALAS_RUNTIME_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "alas/jssp.hpp"
#include "alas/lcrp.hpp"
#include "alas/log.hpp"
#include "alas/policy_runtime.hpp"

namespace alas::runtime {

struct RunConfig {
  std::string instance_path;  // read when instance_text is empty
  std::string instance_text;
  std::string instance_name = "instance";
  jssp::PlannerRule planner_rule = jssp::PlannerRule::spt;
  std::uint64_t seed = 1;
  int repair_budget = 5;
  std::vector<jssp::DisruptionEvent> disruptions;
  double wip_penalty = 1.0;
  std::string faults_path;  // loaded into `faults` when set
  policy_runtime::FaultPlan faults;
  std::string policy_file;  // optional IR document carrying stage policies
  std::string log_dir;      // when set, <run-id>.ndjson and <run-id>.result.json
  std::string run_id;       // default "<instance>-s<seed>"
  // A precomputed plan; the planner stage adopts it instead of seeding one.
  Json preset_schedule;
  // Step 5. Off when a committed precomputed plan is being disrupted: work
  // already underway is not re-sequenced ahead of the disruption.
  bool optimize = true;

  std::string effective_run_id() const;

  // Configuration document: the same knobs as the CLI flags, JSON-encoded
  // (instancePath, rule, seed, budget, wipPenalty, disruptions, faultsPath,
  // policyFile, logDir, presetSchedule, optimize).
  static RunConfig from_json(const Json& doc);
};

struct RunResult {
  jssp::Schedule final_schedule;
  std::int64_t makespan = 0;
  bool optimization_skipped = false;
  int repair_iterations = 0;
  lcrp::EditRadius edit_radius;  // planner output vs final schedule
  std::string log_path;
  std::vector<jssp::OpKey> critical_ops;
  bool valid = false;
  bool fell_back_to_global = false;
  int wip_units = 0;
  std::string instance_name;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
  std::vector<jssp::BreakdownWindow> downtime;

  Json to_json() const;
  static RunResult from_json(const Json& doc);
};

struct PipelineOutcome {
  RunResult result;
  log::VersionedLog log;
};

// Runs the full loop. Throws PipelineHalted when revalidation fails after
// the escalation ladder is exhausted (the caller maps this to exit code 3;
// the last feasible snapshot remains in the log).
PipelineOutcome run_pipeline(const RunConfig& config);

// Stage implementations keyed by node id (planner, validator, repair,
// optimizer, supervisor). Used by run_pipeline and by log replay: payloads
// are self-contained, so re-execution reconstructs every input from the log.
log::TaskRegistry pipeline_registry();

struct Summary {
  std::size_t best_index = 0;
  RunResult best;
  double mean_edit_radius_ops = 0.0;
  double mean_edit_radius_jobs = 0.0;
  double success_fraction = 0.0;

  Json to_json() const;
};

// Argmin makespan, ties resolved by lowest seed. Throws EmptyInput.
Summary supervise(const std::vector<RunResult>& results);

// Operations on a zero-slack path to the makespan.
std::vector<jssp::OpKey> critical_operations(const jssp::Schedule& schedule);

}  // namespace alas::runtime

#endif  // ALAS_RUNTIME_HPP_

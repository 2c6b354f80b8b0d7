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

#ifndef ALAS_JSSP_HPP_
#define ALAS_JSSP_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alas/error.hpp"
#include "alas/json.hpp"

namespace alas::jssp {

// One processing step of a job: which machine, for how long.
struct Operation {
  int machine = 0;
  std::int64_t duration = 1;
};

struct JsspInstance {
  std::string name;
  std::vector<std::vector<Operation>> jobs;  // jobs[j][k] = step k+1 of job j
  int machine_count = 0;

  int job_count() const { return static_cast<int>(jobs.size()); }
  int total_operations() const;
  std::int64_t total_duration() const;
};

// Job and machine naming follows the wire format: jobs are 1-based
// ("Job1"), machines 0-based ("Machine0").
std::string job_name(int job_index);
std::string machine_name(int machine_index);
int job_index(const std::string& name);      // -1 if not "JobN"
int machine_index(const std::string& name);  // -1 if not "MachineK"

struct ScheduleEntry {
  std::string job;
  int step = 1;  // 1-based
  std::string machine;
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::int64_t duration = 0;

  bool operator==(const ScheduleEntry&) const = default;
};

enum class Provenance { planner, repaired, optimized };

struct Schedule {
  std::vector<ScheduleEntry> entries;
  Provenance provenance = Provenance::planner;
  std::int64_t version = 0;
};

std::string to_string(Provenance p);

struct ErrorScope {
  std::optional<std::string> job;
  std::optional<int> step;
  std::optional<std::string> machine;
};

struct ValidationError {
  std::string code;
  std::string message;
  ErrorScope scope;
};

struct ValidationReport {
  bool valid = true;
  std::vector<ValidationError> errors;
  std::vector<std::string> warnings;
};

struct BreakdownWindow {
  int machine = 0;
  std::int64_t from = 0;
  std::int64_t to = 0;
};

struct DurationShock {
  int job = 0;  // 0-based index
  int step = 1;
  std::int64_t delta = 0;
};

enum class DisruptionKind { machineBreakdown, durationShock };

struct DisruptionEvent {
  DisruptionKind kind = DisruptionKind::machineBreakdown;
  std::int64_t at_time = 0;
  std::optional<BreakdownWindow> breakdown;
  std::optional<DurationShock> shock;
};

// (job index, 1-based step) key identifying one operation.
struct OpKey {
  int job = 0;
  int step = 1;
  auto operator<=>(const OpKey&) const = default;
};

struct DisruptionImpact {
  std::vector<OpKey> direct;
  std::vector<OpKey> affected;  // direct plus transitive dependents, ordered
  std::vector<OpKey> restart_required;
};

enum class PlannerRule { spt, lpt, fifo, random };

PlannerRule planner_rule_from_string(const std::string& s);
std::string to_string(PlannerRule rule);

// --- operations ---

// OR-library text format: header "J M", then J lines of (machine, duration)
// pairs. Throws FormatError with the offending line number.
JsspInstance parse_instance(const std::string& text, const std::string& name = "");

std::int64_t makespan(const Schedule& schedule);  // throws EmptySchedule

// Ordered structural checks: non-empty, field sanity, time ordering,
// makespan range, job precedence, machine capacity, dataset coverage, and
// downtime overlap when windows are declared. Never throws; the report is
// the result.
ValidationReport validate_schedule(const Schedule& schedule,
                                   const JsspInstance& instance,
                                   const std::vector<BreakdownWindow>& downtime = {});

// Same checks over a raw JSON document (arbitrary input from disk).
ValidationReport validate_schedule_json(const Json& doc,
                                        const JsspInstance& instance,
                                        const std::vector<BreakdownWindow>& downtime = {});

// Non-delay list schedule under the given dispatch rule. Ties broken by
// lowest job index so the output is deterministic per (rule, seed).
Schedule seed_plan(const JsspInstance& instance, PlannerRule rule, std::uint64_t seed);

struct OptimumResult {
  std::int64_t makespan = 0;
  Schedule schedule;
};

// Exhaustive enumeration of all job-order-consistent operation interleavings
// (every semi-active schedule is reached). Guarded to <= 12 total operations;
// throws TooLarge beyond that.
OptimumResult brute_force_optimum(const JsspInstance& instance);

// Identifies operations hit by the event plus their transitive dependents
// via job precedence and machine-queue succession. In-progress operations on
// a broken machine are flagged restart-required; their pre-breakdown work is
// discarded.
DisruptionImpact apply_disruption(const Schedule& schedule,
                                  const JsspInstance& instance,
                                  const DisruptionEvent& event);

// JSON wire format (Appendix-style entry list): keys job, step, machine,
// start, end, duration.
Json schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const Json& doc);
Json report_to_json(const ValidationReport& report);

}  // namespace alas::jssp

#endif  // ALAS_JSSP_HPP_

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
// Localized cascading repair: five-phase schedule repair, disruption-local
// compensation, WIP-penalized queue reordering, makespan descent, and the
// global-recompute fallback. Repairs edit only the affected neighborhood;
// everything outside it stays bit-identical.

#ifndef ALAS_LCRP_HPP_
#define ALAS_LCRP_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "alas/jssp.hpp"

namespace alas::lcrp {

using jssp::DisruptionEvent;
using jssp::JsspInstance;
using jssp::OpKey;
using jssp::Schedule;
using jssp::ValidationError;

struct EditRadius {
  int ops_touched = 0;
  int jobs_touched = 0;
};

// Work-in-progress accounting. `committed_starts` holds each operation's
// start time in the last committed schedule; operations whose committed
// start precedes the disruption instant are physical WIP. Displacing a WIP
// operation in its machine queue consumes one unit and charges
// penalty_per_unit time units of changeover on that machine.
struct WipModel {
  double penalty_per_unit = 1.0;
  std::map<OpKey, std::int64_t> committed_starts;
  // When true, units are weighted by how far an advanced operation crosses
  // the displaced WIP's committed start, instead of one unit per operation.
  bool distance_weighted = false;

  static WipModel from_schedule(const Schedule& committed, double penalty);
};

struct RepairResult {
  Schedule schedule;
  int errors_before = 0;
  int errors_after = 0;
  int iterations_used = 0;
  EditRadius edit_radius;
  bool fell_back_to_global = false;
  int wip_units = 0;  // queue-reorder reports units consumed here
};

// Optional per-iteration observer; receives (iteration index, schedule
// snapshot, residual error count) after each repair iteration.
using IterationSink =
    std::function<void(int, const Schedule&, int)>;

// Five-phase repair loop, at most `budget` iterations, stopping early once
// the validator reports zero errors. Edits are confined to the error scopes
// and their transitive dependents.
RepairResult repair(const Schedule& schedule, const JsspInstance& instance,
                    const std::vector<ValidationError>& errors, int budget,
                    const IterationSink& sink = nullptr);

// Escalation wrapper: on residual errors the neighborhood grows by one
// machine-queue hop per round, three rounds at most, then falls back to a
// fresh plan (fellBackToGlobal set).
RepairResult repair_with_escalation(const Schedule& schedule,
                                    const JsspInstance& instance, int budget,
                                    jssp::PlannerRule rule = jssp::PlannerRule::spt,
                                    std::uint64_t seed = 0,
                                    int* enlargements_out = nullptr);

// Phase 1 after a disruption: right-shift-only compensation. Restart-required
// operations restart at the breakdown end; dependents shift to their earliest
// feasible start, never earlier than their committed start. Untouched
// operations are bit-identical. When a hard deadline is configured and the
// right-shifted makespan exceeds it, throws InfeasibleLocally to signal
// neighborhood enlargement.
RepairResult local_compensate(const Schedule& schedule, const JsspInstance& instance,
                              const DisruptionEvent& event, const WipModel& wip,
                              std::optional<std::int64_t> hard_deadline = std::nullopt);

// Phase 2: bounded requeue of the disrupted machine's pending segment by
// most-work-remaining. Terminal operations sink to the tail for free;
// displacing a WIP operation consumes units and inserts a changeover gap of
// penalty_per_unit time units per unit before the advanced segment. The
// candidate is committed only when the resulting makespan strictly improves.
RepairResult queue_reorder(const Schedule& schedule, const JsspInstance& instance,
                           const DisruptionEvent& event, const WipModel& wip);

// Makespan-only descent over a feasible schedule: left-shift compaction plus
// adjacent-swap improvement until a local optimum. Throws
// PreconditionViolated when the input does not validate.
Schedule optimize(const Schedule& schedule, const JsspInstance& instance);

// Counts entries whose (machine, start, end) differ, and the distinct jobs
// among them. Throws KeyMismatch when the (job, step) key sets differ.
EditRadius edit_radius(const Schedule& before, const Schedule& after);

// Fallback: fix operations completed (or in progress off the broken machine)
// at the disruption instant and reschedule everything else from scratch with
// the given dispatch rule, then run contained swap descent on the rebuilt
// portion.
Schedule global_recompute(const Schedule& schedule, const JsspInstance& instance,
                          const DisruptionEvent& event, jssp::PlannerRule rule,
                          std::uint64_t seed);

Json repair_result_to_json(const RepairResult& result);

}  // namespace alas::lcrp

#endif  // ALAS_LCRP_HPP_

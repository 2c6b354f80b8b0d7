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
#include <algorithm>
#include <random>
#include <set>

#include "alas/lcrp.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/naive_checker.hpp"

using namespace alas;
using namespace alas::jssp;
using namespace alas::lcrp;
namespace ts = alas::testsupport;

namespace {

DisruptionEvent whitebox_breakdown() {
  DisruptionEvent event;
  event.kind = DisruptionKind::machineBreakdown;
  event.at_time = 5;
  event.breakdown = BreakdownWindow{1, 5, 8};
  return event;
}

const ScheduleEntry& find_op(const Schedule& s, const char* job, int step) {
  for (const auto& e : s.entries)
    if (e.job == job && e.step == step) return e;
  throw std::runtime_error("fixture op not found");
}

}  // namespace

TEST_CASE("local_compensate reproduces the white-box right shift") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();
  auto wip = WipModel::from_schedule(baseline, 1.0);

  auto result = local_compensate(baseline, instance, whitebox_breakdown(), wip);
  auto expected = ts::whitebox_compensated_schedule();
  CHECK(result.schedule.entries == expected.entries);
  CHECK(makespan(result.schedule) == 24);
  CHECK(result.errors_after == 0);
  CHECK(result.edit_radius.ops_touched == 7);
  CHECK(result.edit_radius.jobs_touched == 4);
  CHECK(validate_schedule(result.schedule, instance, {{1, 5, 8}}).valid);

  // No early moves: every op starts at or after its committed start.
  for (const auto& e : result.schedule.entries) {
    const auto& before = find_op(baseline, e.job.c_str(), e.step);
    CHECK(e.start >= before.start);
  }
}

TEST_CASE("local_compensate leaves a post-horizon breakdown alone") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();
  auto wip = WipModel::from_schedule(baseline, 1.0);
  DisruptionEvent event;
  event.kind = DisruptionKind::machineBreakdown;
  event.at_time = 25;
  event.breakdown = BreakdownWindow{1, 25, 30};

  auto result = local_compensate(baseline, instance, event, wip);
  CHECK(result.schedule.entries == baseline.entries);
  CHECK(result.edit_radius.ops_touched == 0);
}

TEST_CASE("local_compensate duration shock on a terminal op moves only it") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();
  auto wip = WipModel::from_schedule(baseline, 1.0);
  DisruptionEvent event;
  event.kind = DisruptionKind::durationShock;
  event.at_time = 10;
  event.shock = DurationShock{0, 3, 3};  // Job1 step 3, last op on Machine2

  auto result = local_compensate(baseline, instance, event, wip);
  CHECK(result.edit_radius.ops_touched == 1);
  CHECK(result.edit_radius.jobs_touched == 1);
  const auto& shocked = find_op(result.schedule, "Job1", 3);
  CHECK(shocked.start == 17);
  CHECK(shocked.end == 22);
  CHECK(shocked.duration == 5);
}

TEST_CASE("local_compensate honors a configured hard deadline") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();
  auto wip = WipModel::from_schedule(baseline, 1.0);
  CHECK_THROWS_AS(
      local_compensate(baseline, instance, whitebox_breakdown(), wip, 20),
      InfeasibleLocally);
}

TEST_CASE("queue_reorder reaches makespan 22 at one WIP unit") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();
  auto wip = WipModel::from_schedule(baseline, 1.0);
  auto event = whitebox_breakdown();

  auto compensated = local_compensate(baseline, instance, event, wip);
  auto result = queue_reorder(compensated.schedule, instance, event, wip);

  CHECK(makespan(result.schedule) == 22);
  CHECK(result.wip_units == 1);
  CHECK(validate_schedule(result.schedule, instance, {{1, 5, 8}}).valid);
  auto expected = ts::whitebox_reordered_schedule();
  auto sorted = [](Schedule s) {
    std::sort(s.entries.begin(), s.entries.end(),
              [](const ScheduleEntry& a, const ScheduleEntry& b) {
                return std::tie(a.job, a.step) < std::tie(b.job, b.step);
              });
    return s;
  };
  CHECK(sorted(result.schedule).entries == sorted(expected).entries);
}

TEST_CASE("queue_reorder with prohibitive penalty returns the input") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();
  auto event = whitebox_breakdown();
  auto wip = WipModel::from_schedule(baseline, 1e9);
  auto compensated = local_compensate(baseline, instance, event, wip);

  auto result = queue_reorder(compensated.schedule, instance, event, wip);
  CHECK(result.schedule.entries == compensated.schedule.entries);
  CHECK(result.wip_units == 0);
}

TEST_CASE("queue_reorder with zero penalty is pure local search") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();
  auto event = whitebox_breakdown();
  auto wip = WipModel::from_schedule(baseline, 0.0);
  auto compensated = local_compensate(baseline, instance, event, wip);

  auto result = queue_reorder(compensated.schedule, instance, event, wip);
  CHECK(makespan(result.schedule) <= makespan(compensated.schedule));
  CHECK(makespan(result.schedule) == 21);  // packs from t=8 with no gap
  CHECK(validate_schedule(result.schedule, instance, {{1, 5, 8}}).valid);
}

TEST_CASE("containment: untouched entries stay bit-identical") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();
  auto wip = WipModel::from_schedule(baseline, 1.0);
  auto event = whitebox_breakdown();

  auto impact = apply_disruption(baseline, instance, event);
  std::set<std::pair<std::string, int>> affected;
  for (const auto& key : impact.affected)
    affected.insert({job_name(key.job), key.step});

  auto compensated = local_compensate(baseline, instance, event, wip);
  auto reordered = queue_reorder(compensated.schedule, instance, event, wip);
  for (const auto& e : reordered.schedule.entries) {
    if (affected.count({e.job, e.step})) continue;
    CHECK(e == find_op(baseline, e.job.c_str(), e.step));
  }
}

TEST_CASE("repair fixes a single precedence violation in one iteration") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto schedule = ts::whitebox_static_schedule();
  for (auto& e : schedule.entries)
    if (e.job == "Job2" && e.step == 3) {
      e.start = 2;
      e.end = e.start + e.duration;
    }
  auto errors = validate_schedule(schedule, instance).errors;
  REQUIRE(!errors.empty());

  auto result = repair(schedule, instance, errors, 5);
  CHECK(result.errors_after == 0);
  CHECK(result.errors_before == static_cast<int>(errors.size()));
  CHECK(result.iterations_used <= 2);
  CHECK(validate_schedule(result.schedule, instance).valid);
  // Only the affected neighborhood moved.
  CHECK(find_op(result.schedule, "Job5", 1) == find_op(schedule, "Job5", 1));
  CHECK(find_op(result.schedule, "Job2", 1) == find_op(schedule, "Job2", 1));
}

TEST_CASE("repair of a valid schedule is the identity") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto schedule = ts::whitebox_static_schedule();
  auto result = repair(schedule, instance, {}, 5);
  CHECK(result.schedule.entries == schedule.entries);
  CHECK(result.iterations_used == 1);
  CHECK(result.errors_before == 0);
  CHECK(result.errors_after == 0);
  CHECK(result.edit_radius.ops_touched == 0);
}

TEST_CASE("repair error counts decrease monotonically") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    auto instance = ts::random_instance(rng, 4 + static_cast<int>(rng() % 4),
                                        3 + static_cast<int>(rng() % 3), 3);
    auto schedule = seed_plan(instance, PlannerRule::spt, rng());
    int faults = 2 + static_cast<int>(rng() % 4);
    for (int f = 0; f < faults; ++f) {
      auto kind = static_cast<ts::Corruption>(rng() % 3);  // repairable classes
      ts::corrupt(schedule, instance, kind, rng);
    }
    auto errors = validate_schedule(schedule, instance).errors;
    if (errors.empty()) continue;

    std::vector<int> counts;
    auto result = repair(schedule, instance, errors, 5,
                         [&](int, const Schedule&, int residual) {
                           counts.push_back(residual);
                         });
    int last = static_cast<int>(errors.size());
    for (int c : counts) {
      CHECK(c <= last);
      last = c;
    }
    CHECK(result.errors_after <= static_cast<int>(errors.size()));
  }
}

TEST_CASE("repair_with_escalation always ends feasible") {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 20; ++trial) {
    auto instance = ts::random_instance(rng, 5, 4, 3);
    auto schedule = seed_plan(instance, PlannerRule::fifo, rng());
    for (int f = 0; f < 6; ++f)
      ts::corrupt(schedule, instance, static_cast<ts::Corruption>(rng() % 4), rng);
    int enlargements = 0;
    auto result = repair_with_escalation(schedule, instance, 5, PlannerRule::spt, 9,
                                         &enlargements);
    CHECK(result.errors_after == 0);
    CHECK(validate_schedule(result.schedule, instance).valid);
  }
}

TEST_CASE("optimize is a fixed point on an optimal schedule") {
  auto instance = parse_instance(ts::kTiny2x2);
  auto optimum = brute_force_optimum(instance);
  auto optimized = optimize(optimum.schedule, instance);
  CHECK(makespan(optimized) == optimum.makespan);
  CHECK(optimized.entries == optimum.schedule.entries);
}

TEST_CASE("optimize removes an artificial gap") {
  auto instance = parse_instance(ts::kTiny2x2);
  Schedule gapped;
  gapped.entries = {
      ts::make_entry("Job1", 1, "Machine0", 0, 2),
      ts::make_entry("Job2", 1, "Machine1", 0, 1),
      ts::make_entry("Job2", 2, "Machine0", 5, 9),  // three units late
      ts::make_entry("Job1", 2, "Machine1", 2, 5),
  };
  REQUIRE(validate_schedule(gapped, instance).valid);
  auto optimized = optimize(gapped, instance);
  CHECK(makespan(optimized) < makespan(gapped));
  CHECK(makespan(optimized) == ts::kTiny2x2Optimum);  // confirmed by the oracle
  CHECK(validate_schedule(optimized, instance).valid);
}

TEST_CASE("optimize rejects infeasible input") {
  auto instance = parse_instance(ts::kTiny2x2);
  Schedule bad;
  bad.entries = {ts::make_entry("Job1", 1, "Machine0", 0, 2)};
  CHECK_THROWS_AS(optimize(bad, instance), PreconditionViolated);
}

TEST_CASE("optimize never increases makespan: 200 seeded schedules") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto instance = ts::random_instance(rng, 4, 3, 3);
    auto schedule = seed_plan(instance, PlannerRule::random, rng());
    auto optimized = optimize(schedule, instance);
    CHECK(makespan(optimized) <= makespan(schedule));
    CHECK(validate_schedule(optimized, instance).valid);
    CHECK(ts::naive_feasible(optimized, instance));
  }
}

TEST_CASE("edit_radius counts changed rectangles") {
  auto baseline = ts::whitebox_static_schedule();
  CHECK(edit_radius(baseline, baseline).ops_touched == 0);
  CHECK(edit_radius(baseline, baseline).jobs_touched == 0);

  // Baseline vs the compensated intermediate: seven shifted entries over
  // four jobs (enumerated from the two Gantt geometries).
  auto radius = edit_radius(baseline, ts::whitebox_compensated_schedule());
  CHECK(radius.ops_touched == 7);
  CHECK(radius.jobs_touched == 4);

  auto one = baseline;
  for (auto& e : one.entries)
    if (e.job == "Job5" && e.step == 3) {
      e.start += 1;
      e.end += 1;
    }
  auto single = edit_radius(baseline, one);
  CHECK(single.ops_touched == 1);
  CHECK(single.jobs_touched == 1);

  Schedule mismatched;
  mismatched.entries = {ts::make_entry("Job1", 1, "Machine0", 0, 3)};
  CHECK_THROWS_AS(edit_radius(baseline, mismatched), KeyMismatch);
}

TEST_CASE("global_recompute edge cases") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();

  // Disruption after everything completed: unchanged.
  DisruptionEvent late;
  late.kind = DisruptionKind::machineBreakdown;
  late.at_time = 25;
  late.breakdown = BreakdownWindow{1, 25, 30};
  auto unchanged = global_recompute(baseline, instance, late, PlannerRule::spt, 1);
  CHECK(unchanged.entries == baseline.entries);

  // Disruption at t=0 with an empty window: a fresh plan.
  DisruptionEvent fresh;
  fresh.kind = DisruptionKind::machineBreakdown;
  fresh.at_time = 0;
  fresh.breakdown = BreakdownWindow{1, 0, 0};
  auto replanned = global_recompute(baseline, instance, fresh, PlannerRule::spt, 1);
  auto reference = optimize(seed_plan(instance, PlannerRule::spt, 1), instance);
  CHECK(replanned.entries == reference.entries);
}

TEST_CASE("global_recompute handles the white-box breakdown with wider edits") {
  auto instance = parse_instance(ts::kWhitebox5x3);
  auto baseline = ts::whitebox_static_schedule();
  auto event = whitebox_breakdown();
  auto wip = WipModel::from_schedule(baseline, 1.0);

  auto global = global_recompute(baseline, instance, event, PlannerRule::spt, 1);
  CHECK(validate_schedule(global, instance, {{1, 5, 8}}).valid);

  auto compensated = local_compensate(baseline, instance, event, wip);
  auto localized = queue_reorder(compensated.schedule, instance, event, wip);
  auto local_radius = edit_radius(baseline, localized.schedule);
  auto global_radius = edit_radius(baseline, global);
  CHECK(global_radius.ops_touched >= local_radius.ops_touched);
}

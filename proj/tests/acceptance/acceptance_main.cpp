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
// Acceptance suite: every criterion runs at its stated tolerance and prints
// one PASS/FAIL line. The process exits with the number of failures.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "alas/convert.hpp"
#include "alas/ir.hpp"
#include "alas/jssp.hpp"
#include "alas/lcrp.hpp"
#include "alas/log.hpp"
#include "alas/policy_runtime.hpp"
#include "alas/runtime.hpp"
#include "support/fixtures.hpp"
#include "support/ir_fixtures.hpp"
#include "support/ir_generator.hpp"
#include "support/naive_checker.hpp"

using namespace alas;
namespace ts = alas::testsupport;

namespace {

int failures = 0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "  (" << detail << ")\n";
  if (!ok) ++failures;
}

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

jssp::DisruptionEvent breakdown_event(int machine, std::int64_t from, std::int64_t to) {
  jssp::DisruptionEvent event;
  event.kind = jssp::DisruptionKind::machineBreakdown;
  event.at_time = from;
  event.breakdown = jssp::BreakdownWindow{machine, from, to};
  return event;
}

// --- criterion 1: the white-box fixture -----------------------------------

void whitebox_fixture() {
  auto start = Clock::now();
  Check check;

  auto instance = jssp::parse_instance(ts::kWhitebox5x3, "fig2");
  auto baseline = ts::whitebox_static_schedule();
  check.expect(jssp::makespan(baseline) == 19, "static makespan == 19");
  check.expect(jssp::validate_schedule(baseline, instance).valid, "baseline valid");

  auto event = breakdown_event(1, 5, 8);
  auto wip = lcrp::WipModel::from_schedule(baseline, 1.0);
  auto compensated = lcrp::local_compensate(baseline, instance, event, wip);
  auto reordered = lcrp::queue_reorder(compensated.schedule, instance, event, wip);

  check.expect(jssp::validate_schedule(reordered.schedule, instance, {{1, 5, 8}}).valid,
               "repaired schedule valid under downtime");
  check.expect(jssp::makespan(reordered.schedule) == 22, "final makespan == 22");
  check.expect(reordered.wip_units == 1, "WIP movement == 1 unit");

  // Work on M0/M2 finished before t=5 is bit-identical.
  int untouched = 0;
  for (const auto& after : reordered.schedule.entries) {
    if (after.machine == "Machine1") continue;
    for (const auto& before : baseline.entries) {
      if (before.job == after.job && before.step == after.step &&
          before.end <= 5) {
        check.expect(before == after, "pre-breakdown op " + after.job + "/" +
                                          std::to_string(after.step) + " untouched");
        ++untouched;
      }
    }
  }
  check.expect(untouched >= 4, "found the pre-breakdown ops");

  double elapsed = seconds_since(start);
  check.expect(elapsed < 1.0, "runtime < 1 s");
  check.detail << "makespan 22, wip 1, " << untouched << " ops bit-identical, "
               << elapsed << " s";
  report("white-box fixture (baseline 19 -> breakdown -> 22 @ 1 WIP unit)", check.ok,
         check.detail.str());
}

// --- criterion 2: validator fault injection --------------------------------

void validator_fault_injection() {
  auto start = Clock::now();
  Check check;
  std::mt19937_64 rng(20250602);

  const ts::Corruption categories[] = {
      ts::Corruption::precedence_swap, ts::Corruption::double_book,
      ts::Corruption::capacity_overflow, ts::Corruption::deadline_miss};
  int flagged = 0, clean = 0, scoped = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto instance = ts::random_instance(rng, 6, 4, 4);
    auto schedule = jssp::seed_plan(
        instance, static_cast<jssp::PlannerRule>(rng() % 4), rng());
    if (jssp::validate_schedule(schedule, instance).valid) ++clean;

    auto corrupted = schedule;
    auto kind = categories[trial % 4];
    if (!ts::corrupt(corrupted, instance, kind, rng)) {
      check.expect(false, "corruptor found no target");
      continue;
    }
    auto report_out = jssp::validate_schedule(corrupted, instance);
    if (!report_out.valid) ++flagged;

    // Correct scoping: the error class matches the category and names a
    // concrete site.
    const char* want = nullptr;
    switch (kind) {
      case ts::Corruption::precedence_swap: want = "precedence"; break;
      case ts::Corruption::double_book: want = "machine_overlap"; break;
      case ts::Corruption::capacity_overflow: want = "machine_overlap"; break;
      case ts::Corruption::deadline_miss: want = "makespan_range"; break;
    }
    for (const auto& err : report_out.errors) {
      if (err.code == want &&
          (err.scope.job.has_value() || err.scope.machine.has_value())) {
        ++scoped;
        break;
      }
    }
  }
  check.expect(flagged == 20, "20/20 corrupted schedules flagged");
  check.expect(scoped == 20, "20/20 errors correctly scoped");
  check.expect(clean == 20, "0/20 originals flagged");
  double elapsed = seconds_since(start);
  check.expect(elapsed < 5.0, "runtime < 5 s");
  check.detail << flagged << "/20 flagged, " << scoped << "/20 scoped, " << clean
               << "/20 originals clean, " << elapsed << " s";
  report("validator fault injection (precedence/double-book/overflow/deadline)",
         check.ok, check.detail.str());
}

// --- criterion 3: repair convergence ----------------------------------------

void repair_convergence() {
  auto start = Clock::now();
  Check check;
  std::mt19937_64 rng(77001);

  int converged = 0, escalated_ok = 0, monotone = 0;
  const int kRuns = 100;
  for (int trial = 0; trial < kRuns; ++trial) {
    auto instance = ts::random_instance(rng, 4 + static_cast<int>(rng() % 5),
                                        3 + static_cast<int>(rng() % 3), 3);
    auto schedule = jssp::seed_plan(
        instance, static_cast<jssp::PlannerRule>(rng() % 4), rng());
    int faults = 3 + static_cast<int>(rng() % 8);
    for (int f = 0; f < faults; ++f) {
      // Every twentieth schedule carries a deadline miss, which the phase
      // loop cannot fix; those exercise the escalation ladder.
      auto kind = (trial % 20 == 0 && f == 0)
                      ? ts::Corruption::deadline_miss
                      : static_cast<ts::Corruption>(rng() % 3);
      ts::corrupt(schedule, instance, kind, rng);
    }
    auto errors = jssp::validate_schedule(schedule, instance).errors;
    if (errors.empty()) {
      ++converged;  // corruption cancelled out; trivially converged
      ++monotone;
      continue;
    }

    std::vector<int> counts;
    auto result = lcrp::repair(schedule, instance, errors, 5,
                               [&](int, const jssp::Schedule&, int residual) {
                                 counts.push_back(residual);
                               });
    bool non_increasing = true;
    int last = static_cast<int>(errors.size());
    for (int c : counts) {
      if (c > last) non_increasing = false;
      last = c;
    }
    if (non_increasing) ++monotone;
    if (result.errors_after == 0) {
      ++converged;
    } else {
      auto escalated = lcrp::repair_with_escalation(schedule, instance, 5);
      if (escalated.errors_after == 0 &&
          jssp::validate_schedule(escalated.schedule, instance).valid)
        ++escalated_ok;
    }
  }
  check.expect(monotone == kRuns, "violation counts non-increasing per iteration");
  check.expect(converged >= 95, ">= 95/100 reach zero violations");
  check.expect(converged + escalated_ok == kRuns, "residual cases escalate to valid");
  double elapsed = seconds_since(start);
  check.expect(elapsed < 30.0, "runtime < 30 s");
  check.detail << converged << "/100 converged, " << escalated_ok
               << " escalated, monotone " << monotone << "/100, " << elapsed << " s";
  report("repair convergence (100 corrupted schedules, budget 5)", check.ok,
         check.detail.str());
}

// --- criterion 4: oracle equivalence ----------------------------------------

void oracle_equivalence() {
  auto start = Clock::now();
  Check check;
  std::mt19937_64 rng(424242);

  int pipeline_ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    int jobs = 2 + static_cast<int>(rng() % 3);
    int ops = 1 + static_cast<int>(rng() % (12 / jobs));
    auto instance = ts::random_instance(rng, jobs, 2 + static_cast<int>(rng() % 3),
                                        ops);
    if (instance.total_operations() > 12) continue;
    std::ostringstream text;
    text << instance.job_count() << " " << instance.machine_count << "\n";
    for (const auto& job : instance.jobs) {
      for (size_t k = 0; k < job.size(); ++k)
        text << job[k].machine << " " << job[k].duration
             << (k + 1 == job.size() ? "" : " ");
      text << "\n";
    }

    runtime::RunConfig config;
    config.instance_text = text.str();
    config.instance_name = "suite" + std::to_string(trial);
    config.planner_rule = static_cast<jssp::PlannerRule>(rng() % 4);
    config.seed = rng();
    auto outcome = runtime::run_pipeline(config);
    auto optimum = jssp::brute_force_optimum(instance);

    bool ok = outcome.result.makespan >= optimum.makespan &&
              ts::naive_feasible(outcome.result.final_schedule, instance);
    if (ok) ++pipeline_ok;
    check.expect(ok, "trial " + std::to_string(trial) + " >= optimum and feasible");
  }

  runtime::RunConfig tiny;
  tiny.instance_text = ts::kTiny2x2;
  tiny.instance_name = "tiny";
  tiny.planner_rule = jssp::PlannerRule::spt;
  auto tiny_outcome = runtime::run_pipeline(tiny);
  check.expect(tiny_outcome.result.makespan == ts::kTiny2x2Optimum,
               "2x2 pipeline reaches the oracle optimum exactly");

  double elapsed = seconds_since(start);
  check.expect(elapsed < 60.0, "runtime < 60 s");
  check.detail << pipeline_ok << "/50 runs bounded below by the oracle, 2x2 exact, "
               << elapsed << " s";
  report("oracle equivalence (pipeline vs exhaustive enumeration)", check.ok,
         check.detail.str());
}

// --- criterion 5: containment vs global recompute ---------------------------

void containment_vs_global() {
  auto start = Clock::now();
  Check check;
  std::mt19937_64 rng(90210);

  double local_ops = 0, global_ops = 0;
  double local_rel_degradation = 0, global_rel_degradation = 0;
  int samples = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto instance = ts::random_instance(rng, 6, 4, 4);
    auto committed = lcrp::optimize(
        jssp::seed_plan(instance, jssp::PlannerRule::spt, rng()), instance);
    std::int64_t horizon = jssp::makespan(committed);
    int machine = static_cast<int>(rng() % 4);
    std::int64_t from = horizon / 3 + static_cast<std::int64_t>(rng() % 3);
    std::int64_t to = from + 2 + static_cast<std::int64_t>(rng() % 5);
    auto event = breakdown_event(machine, from, to);

    auto wip = lcrp::WipModel::from_schedule(committed, 1.0);
    auto compensated = lcrp::local_compensate(committed, instance, event, wip);
    auto localized = lcrp::queue_reorder(compensated.schedule, instance, event, wip);
    auto global = lcrp::global_recompute(committed, instance, event,
                                         jssp::PlannerRule::spt, trial);

    bool local_valid = jssp::validate_schedule(localized.schedule, instance,
                                               {*event.breakdown})
                           .valid;
    bool global_valid =
        jssp::validate_schedule(global, instance, {*event.breakdown}).valid;
    check.expect(local_valid, "localized repair valid at trial " +
                                  std::to_string(trial));
    check.expect(global_valid, "global recompute valid at trial " +
                                   std::to_string(trial));
    if (!local_valid || !global_valid) continue;

    auto local_radius = lcrp::edit_radius(committed, localized.schedule);
    auto global_radius = lcrp::edit_radius(committed, global);
    local_ops += local_radius.ops_touched;
    global_ops += global_radius.ops_touched;
    double pre = static_cast<double>(horizon);
    local_rel_degradation +=
        (static_cast<double>(jssp::makespan(localized.schedule)) - pre) / pre;
    global_rel_degradation +=
        (static_cast<double>(jssp::makespan(global)) - pre) / pre;
    ++samples;
  }
  local_ops /= samples;
  global_ops /= samples;
  local_rel_degradation /= samples;
  global_rel_degradation /= samples;

  check.expect(local_ops < global_ops, "mean edit radius strictly smaller");
  check.expect(local_rel_degradation <= global_rel_degradation + 0.05,
               "mean makespan degradation within global + 5%");
  double elapsed = seconds_since(start);
  check.expect(elapsed < 60.0, "runtime < 60 s");
  check.detail << "edit radius " << local_ops << " vs " << global_ops
               << " ops; degradation " << 100 * local_rel_degradation << "% vs "
               << 100 * global_rel_degradation << "%; " << elapsed << " s";
  report("containment vs global recompute (50 mid-horizon breakdowns)", check.ok,
         check.detail.str());
}

// --- criterion 6: round-trip parity -----------------------------------------

void roundtrip_parity() {
  auto start = Clock::now();
  Check check;
  int asl_ok = 0, argo_ok = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto wf = ts::generate_core_ir(seed);
    if (convert::roundtrip_check(wf, convert::Target::asl).parity_ok)
      ++asl_ok;
    else
      check.expect(false, "asl parity at seed " + std::to_string(seed));
    if (convert::roundtrip_check(wf, convert::Target::argo).parity_ok)
      ++argo_ok;
    else
      check.expect(false, "argo parity at seed " + std::to_string(seed));
  }
  check.expect(asl_ok == 200 && argo_ok == 200, "200/200 for both targets");
  double elapsed = seconds_since(start);
  check.expect(elapsed < 10.0, "runtime < 10 s");
  check.detail << "asl " << asl_ok << "/200, argo " << argo_ok << "/200, " << elapsed
               << " s";
  report("round-trip parity (node kinds, edge order, policy fields)", check.ok,
         check.detail.str());
}

// --- criterion 7: replay parity ---------------------------------------------

void replay_parity() {
  auto start = Clock::now();
  Check check;
  int parity = 0;
  for (int run = 0; run < 20; ++run) {
    runtime::RunConfig config;
    config.instance_text = run % 2 == 0 ? ts::kWhitebox5x3 : ts::kTiny2x2;
    config.instance_name = "replay" + std::to_string(run);
    config.planner_rule = static_cast<jssp::PlannerRule>(run % 4);
    config.seed = 1000 + run;
    if (run % 3 == 0) {
      policy_runtime::FaultInjection injection;
      injection.node_id = "planner";
      injection.attempt_index = 1;
      injection.kind = policy_runtime::FaultKind::constraintViolation;
      injection.label = run % 2 == 0 ? "precedence" : "overlap";
      config.faults.injections.push_back(injection);
    }
    if (run % 4 == 0) {
      policy_runtime::FaultInjection injection;
      injection.node_id = "validator";
      injection.attempt_index = 1;
      injection.kind = policy_runtime::FaultKind::toolFailure;
      config.faults.injections.push_back(injection);
    }

    auto outcome = runtime::run_pipeline(config);
    try {
      auto first = log::replay(outcome.log, runtime::pipeline_registry(), config.seed);
      auto second = log::replay(outcome.log, runtime::pipeline_registry(), config.seed);
      if (first.parity_ok && second.parity_ok &&
          first.final_state_hash == second.final_state_hash)
        ++parity;
      else
        check.expect(false, "hash mismatch at run " + std::to_string(run));
    } catch (const log::ReplayDivergence& ex) {
      check.expect(false, "divergence at run " + std::to_string(run) + ": " +
                              ex.what());
    }
  }
  check.expect(parity == 20, "20/20 replays match");
  double elapsed = seconds_since(start);
  check.expect(elapsed < 20.0, "runtime < 20 s");
  check.detail << parity << "/20 parity with identical hashes, " << elapsed << " s";
  report("replay parity (20 recorded runs, ts-excluded)", check.ok, check.detail.str());
}

// --- criterion 8: policy semantics ------------------------------------------

void policy_semantics() {
  auto start = Clock::now();
  Check check;

  auto fixture = ir::parse_ir(ts::kPlanRepairIr);
  const auto& policy = fixture.policies.at("p_default");

  log::VersionedLog log;
  policy_runtime::VirtualClock clock;
  policy_runtime::RunContext context;
  context.node_id = "task";
  policy_runtime::FaultPlan faults;
  faults.injections = {
      {"task", 1, policy_runtime::FaultKind::constraintViolation, "NetworkError"},
      {"task", 2, policy_runtime::FaultKind::constraintViolation, "NetworkError"},
  };
  auto outcome = policy_runtime::run_with_policy(
      [](policy_runtime::VirtualClock&) { return Json{{"ok", true}}; }, policy,
      faults, log, clock, context);
  check.expect(outcome.status == policy_runtime::AttemptStatus::success,
               "third attempt succeeds");
  check.expect(outcome.attempts == 3, "attempts == 3");
  check.expect(outcome.delays_applied.size() == 2 &&
                   outcome.delays_applied[0] == 0.5 &&
                   outcome.delays_applied[1] == 1.0,
               "logged retry delays exactly 0.5 and 1.0 seconds");
  int retries = 0;
  for (const auto& e : log.entries())
    if (e.event_type == log::EventType::Retry) ++retries;
  check.expect(retries == 2, "two Retry log entries");

  policy_runtime::IdempotencyStore store;
  int invocations = 0;
  auto task = [&]() {
    ++invocations;
    return Json(7);
  };
  store.execute("key", task);
  store.execute("key", task);
  check.expect(invocations == 1, "idempotent double-execution invokes once");

  double elapsed = seconds_since(start);
  check.detail << "delays {0.5, 1.0}, attempts 3, one invocation, " << elapsed
               << " s";
  report("policy semantics (default policy retries and idempotency)", check.ok,
         check.detail.str());
}

// --- scaling trend: repair wall-time vs problem size ------------------------

void scaling_trend() {
  auto start = Clock::now();
  Check check;
  std::mt19937_64 rng(555);

  const int machines = 5;
  const std::pair<int, int> sizes[] = {{4, 3}, {6, 4}, {8, 6}, {12, 8}, {16, 12}};
  std::vector<double> xs, ys;
  for (const auto& [jobs, ops] : sizes) {
    std::vector<double> times;
    for (int trial = 0; trial < 5; ++trial) {
      auto instance = ts::random_instance(rng, jobs, machines, ops);
      auto schedule = jssp::seed_plan(instance, jssp::PlannerRule::spt, rng());
      int faults = std::max(2, jobs * ops / 8);
      for (int f = 0; f < faults; ++f)
        ts::corrupt(schedule, instance, static_cast<ts::Corruption>(rng() % 3), rng);
      auto errors = jssp::validate_schedule(schedule, instance).errors;
      auto t0 = Clock::now();
      lcrp::repair(schedule, instance, errors, 5);
      times.push_back(
          std::chrono::duration<double, std::micro>(Clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    double median = std::max(times[times.size() / 2], 1.0);
    xs.push_back(std::log(static_cast<double>(jobs) * ops));
    ys.push_back(std::log(median));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double cov = 0, var = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    var += (xs[i] - mx) * (xs[i] - mx);
  }
  double slope = cov / var;
  check.expect(slope <= 2.3, "log-log slope <= 2.3");
  double elapsed = seconds_since(start);
  check.detail << "slope " << slope << " over sizes 12..192 ops, " << elapsed
               << " s";
  report("repair scaling trend (median wall-time vs J*O_max, fixed M)", check.ok,
         check.detail.str());
}

}  // namespace

int main() {
  std::cout << "acceptance suite\n================\n";
  whitebox_fixture();
  validator_fault_injection();
  repair_convergence();
  oracle_equivalence();
  containment_vs_global();
  roundtrip_parity();
  replay_parity();
  policy_semantics();
  scaling_trend();
  std::cout << "================\n"
            << (failures == 0 ? "all criteria passed" : "criteria failed") << "\n";
  return failures;
}

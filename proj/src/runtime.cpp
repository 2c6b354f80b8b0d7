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

#include "alas/runtime.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "alas/ir.hpp"

namespace alas::runtime {

namespace {

using jssp::Schedule;
using log::EventSink;
using log::EventType;
using policy_runtime::FaultKind;
using policy_runtime::FaultPlan;

// Built-in stage policy: bounded retries on transient classes, a timeout,
// and an exponential schedule.
ir::Policy builtin_stage_policy() {
  ir::Policy policy;
  policy.retry = ir::Retry{3, {"Timeout", "ToolFailure"}};
  ir::Backoff backoff;
  backoff.mode = ir::Backoff::Mode::Exponential;
  backoff.base = 0.5;
  backoff.cap = 8.0;
  policy.backoff = backoff;
  policy.timeout = ir::Timeout{30.0};
  return policy;
}

ir::Policy stage_policy_from_config(const RunConfig& config, const std::string& stage) {
  if (config.policy_file.empty()) return builtin_stage_policy();
  std::ifstream in(config.policy_file);
  if (!in) throw Error("IoError", "cannot open policy file " + config.policy_file);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  auto ir_doc = ir::parse_ir(text);
  if (ir_doc.policies.count(stage)) return ir_doc.policies.at(stage);
  if (auto fallback = ir::default_policy_name(ir_doc))
    return ir_doc.policies.at(*fallback);
  return builtin_stage_policy();
}

Json validation_errors_json(const jssp::ValidationReport& report) {
  return jssp::report_to_json(report)["errors"];
}

// Deterministic data corruption for labeled constraint violations injected
// into the planner output.
void corrupt_schedule(Schedule& schedule, const std::string& label) {
  if (schedule.entries.empty()) return;
  if (label == "overlap") {
    for (size_t i = 0; i < schedule.entries.size(); ++i)
      for (size_t j = i + 1; j < schedule.entries.size(); ++j)
        if (schedule.entries[j].machine == schedule.entries[i].machine) {
          schedule.entries[j].start = schedule.entries[i].start;
          schedule.entries[j].end =
              schedule.entries[j].start + schedule.entries[j].duration;
          return;
        }
    return;
  }
  if (label == "negative") {
    auto& e = schedule.entries.front();
    e.start = -3;
    e.end = e.start + e.duration;
    return;
  }
  if (label == "missing") {
    schedule.entries.pop_back();
    return;
  }
  // Default: a precedence violation on the first multi-step job.
  for (auto& e : schedule.entries) {
    if (e.step <= 1) continue;
    for (const auto& prev : schedule.entries) {
      if (prev.job == e.job && prev.step == e.step - 1) {
        e.start = std::max<std::int64_t>(0, prev.end - 2);
        e.end = e.start + e.duration;
        return;
      }
    }
  }
}

// Wraps a stage body in the policy runtime: injected timeouts and tool
// failures drive retries and backoff exactly as for any governed task.
// Constraint violations are data faults and are handled by the stages
// themselves.
Json run_stage_body(const Json& payload, EventSink& sink,
                    const std::function<Json()>& body) {
  ir::Policy policy = payload.contains("stagePolicy")
                          ? ir::policy_from_json(payload.at("stagePolicy"), "stagePolicy")
                          : builtin_stage_policy();
  FaultPlan plan;
  if (payload.contains("faults")) {
    FaultPlan full = FaultPlan::from_json(payload.at("faults"));
    for (const auto& injection : full.injections) {
      if (injection.node_id != sink.node_id()) continue;
      if (injection.kind == FaultKind::constraintViolation) continue;
      plan.injections.push_back(injection);
    }
  }
  policy_runtime::VirtualClock clock;
  policy_runtime::RunContext context;
  context.node_id = sink.node_id();
  context.correlation_id = sink.correlation_id();
  context.seed = payload.value("seed", std::uint64_t{0});
  auto outcome = policy_runtime::run_with_policy(
      [&](policy_runtime::VirtualClock&) { return body(); }, policy, plan,
      sink.log(), clock, context);
  if (outcome.status != policy_runtime::AttemptStatus::success)
    throw PipelineHalted("stage '" + sink.node_id() + "' failed after " +
                         std::to_string(outcome.attempts) + " attempts (" +
                         outcome.error_class.value_or("unknown") + ")");
  return *outcome.result;
}

std::vector<jssp::BreakdownWindow> downtime_from_json(const Json& list) {
  std::vector<jssp::BreakdownWindow> windows;
  for (const auto& item : list)
    windows.push_back({item.at("machine").get<int>(), item.at("from").get<std::int64_t>(),
                       item.at("to").get<std::int64_t>()});
  return windows;
}

Json downtime_to_json(const std::vector<jssp::BreakdownWindow>& windows) {
  Json list = Json::array();
  for (const auto& w : windows)
    list.push_back(Json{{"machine", w.machine}, {"from", w.from}, {"to", w.to}});
  return list;
}

Json event_to_json(const jssp::DisruptionEvent& event) {
  Json doc;
  doc["kind"] = event.kind == jssp::DisruptionKind::machineBreakdown
                    ? "machineBreakdown"
                    : "durationShock";
  doc["atTime"] = event.at_time;
  if (event.breakdown)
    doc["breakdown"] = Json{{"machine", event.breakdown->machine},
                            {"from", event.breakdown->from},
                            {"to", event.breakdown->to}};
  if (event.shock)
    doc["shock"] = Json{{"job", event.shock->job},
                        {"step", event.shock->step},
                        {"delta", event.shock->delta}};
  return doc;
}

jssp::DisruptionEvent event_from_json(const Json& doc) {
  jssp::DisruptionEvent event;
  event.kind = doc.at("kind") == "machineBreakdown"
                   ? jssp::DisruptionKind::machineBreakdown
                   : jssp::DisruptionKind::durationShock;
  event.at_time = doc.at("atTime").get<std::int64_t>();
  if (doc.contains("breakdown"))
    event.breakdown = jssp::BreakdownWindow{doc["breakdown"]["machine"].get<int>(),
                                            doc["breakdown"]["from"].get<std::int64_t>(),
                                            doc["breakdown"]["to"].get<std::int64_t>()};
  if (doc.contains("shock"))
    event.shock = jssp::DurationShock{doc["shock"]["job"].get<int>(),
                                      doc["shock"]["step"].get<int>(),
                                      doc["shock"]["delta"].get<std::int64_t>()};
  return event;
}

// --- stage implementations (pure functions of their payloads) ---

Json planner_stage(const Json& payload, EventSink& sink, std::mt19937_64& rng) {
  return run_stage_body(payload, sink, [&]() {
    auto instance = jssp::parse_instance(payload.at("instance").get<std::string>(),
                                         payload.value("name", std::string{}));
    auto rule = jssp::planner_rule_from_string(payload.at("rule").get<std::string>());
    std::uint64_t planner_seed = rng();
    Schedule schedule;
    if (payload.contains("preset"))
      schedule = jssp::schedule_from_json(payload.at("preset"));
    else
      schedule = jssp::seed_plan(instance, rule, planner_seed);
    if (payload.contains("faults")) {
      FaultPlan plan = FaultPlan::from_json(payload.at("faults"));
      if (auto injected = policy_runtime::inject_fault(plan, "planner", 1);
          injected && injected->kind == FaultKind::constraintViolation)
        corrupt_schedule(schedule, injected->label);
    }
    Json out;
    out["plannerSeed"] = planner_seed;
    out["entries"] = static_cast<int>(schedule.entries.size());
    out["makespan"] = schedule.entries.empty() ? 0 : jssp::makespan(schedule);
    out["schedule"] = jssp::schedule_to_json(schedule);
    return out;
  });
}

Json validator_stage(const Json& payload, EventSink& sink, std::mt19937_64&) {
  return run_stage_body(payload, sink, [&]() {
    auto instance = jssp::parse_instance(payload.at("instance").get<std::string>());
    auto downtime = downtime_from_json(payload.value("downtime", Json::array()));
    auto report =
        jssp::validate_schedule_json(payload.at("schedule"), instance, downtime);

    // Grounded context: the validator sees a bounded slice of the log and
    // the candidate plan, never planner-internal state.
    log::SliceSelector selector;
    selector.correlation_id = sink.correlation_id();
    selector.max_entries = 8;
    std::size_t grounded = sink.log().slice(selector).size();

    Json info;
    info["errorCount"] = static_cast<int>(report.errors.size());
    info["groundedEntries"] = static_cast<int>(grounded);
    if (report.valid) {
      sink.emit(EventType::ValidatePass, info);
    } else {
      info["firstError"] = report.errors.front().code;
      sink.emit(EventType::ValidateFail, info);
    }
    Json out;
    out["valid"] = report.valid;
    out["errorCount"] = static_cast<int>(report.errors.size());
    out["errors"] = validation_errors_json(report);
    return out;
  });
}

Json repair_stage(const Json& payload, EventSink& sink, std::mt19937_64&) {
  return run_stage_body(payload, sink, [&]() {
    auto instance = jssp::parse_instance(payload.at("instance").get<std::string>());
    Schedule schedule = jssp::schedule_from_json(payload.at("schedule"));

    if (payload.contains("event")) {
      // Disruption mode: local compensation, then WIP-penalized queue
      // reordering, then revalidation and commit.
      auto event = event_from_json(payload.at("event"));
      auto wip = lcrp::WipModel::from_schedule(schedule,
                                               payload.value("wipPenalty", 1.0));
      std::vector<jssp::BreakdownWindow> downtime;
      if (event.breakdown) downtime.push_back(*event.breakdown);

      sink.emit(EventType::RepairStart,
                {{"phase", "local-compensation"}, {"event", payload.at("event")}});
      auto compensated = lcrp::local_compensate(schedule, instance, event, wip);
      sink.emit(EventType::RepairApply,
                {{"phase", "local-compensation"},
                 {"makespan", jssp::makespan(compensated.schedule)},
                 {"opsTouched", compensated.edit_radius.ops_touched}});

      sink.emit(EventType::RepairStart, {{"phase", "queue-reorder"}});
      auto reordered = lcrp::queue_reorder(compensated.schedule, instance, event, wip);
      sink.emit(EventType::RepairApply,
                {{"phase", "queue-reorder"},
                 {"makespan", jssp::makespan(reordered.schedule)},
                 {"wipUnits", reordered.wip_units},
                 {"opsTouched", reordered.edit_radius.ops_touched}});

      Schedule final_schedule = reordered.schedule;
      bool fell_back = false;
      EventSink validator_sink(sink.log(), "validator", sink.correlation_id(),
                               [&sink]() { return sink.now(); });
      auto report = jssp::validate_schedule(final_schedule, instance, downtime);
      Json info{{"errorCount", static_cast<int>(report.errors.size())}};
      if (report.valid) {
        validator_sink.emit(EventType::ValidatePass, info);
      } else {
        validator_sink.emit(EventType::ValidateFail, info);
        // Escalation: the contained path failed; fall back to a global
        // recompute of the residual instance.
        sink.emit(EventType::RepairStart, {{"phase", "global-recompute"}});
        final_schedule = lcrp::global_recompute(
            schedule, instance, event,
            jssp::planner_rule_from_string(payload.value("rule", std::string("spt"))),
            payload.value("seed", std::uint64_t{0}));
        fell_back = true;
        sink.emit(EventType::RepairApply,
                  {{"phase", "global-recompute"},
                   {"makespan", jssp::makespan(final_schedule)}});
        auto recheck = jssp::validate_schedule(final_schedule, instance, downtime);
        Json recheck_info{{"errorCount", static_cast<int>(recheck.errors.size())}};
        if (recheck.valid)
          validator_sink.emit(EventType::ValidatePass, recheck_info);
        else
          validator_sink.emit(EventType::ValidateFail, recheck_info);
        if (!recheck.valid)
          throw PipelineHalted("revalidation failed after disruption repair with "
                               "escalation exhausted");
      }
      sink.emit(EventType::RepairCommit,
                {{"makespan", jssp::makespan(final_schedule)}});

      Json out;
      out["schedule"] = jssp::schedule_to_json(final_schedule);
      out["makespan"] = jssp::makespan(final_schedule);
      out["wipUnits"] = reordered.wip_units;
      out["opsTouched"] =
          compensated.edit_radius.ops_touched + reordered.edit_radius.ops_touched;
      out["fellBackToGlobal"] = fell_back;
      return out;
    }

    // Static mode: the five-phase loop against the validator's error list.
    auto errors = jssp::validate_schedule(schedule, instance).errors;
    int budget = payload.value("budget", 5);
    auto result = lcrp::repair(
        schedule, instance, errors, budget,
        [&](int iteration, const Schedule& snapshot, int residual) {
          sink.emit(EventType::RepairStart, {{"iteration", iteration}});
          sink.emit(EventType::RepairApply,
                    {{"iteration", iteration},
                     {"residualErrors", residual},
                     {"makespan",
                      snapshot.entries.empty() ? 0 : jssp::makespan(snapshot)}});
        });
    if (result.errors_after == 0)
      sink.emit(EventType::RepairCommit,
                {{"makespan", jssp::makespan(result.schedule)}});
    Json out;
    out["schedule"] = jssp::schedule_to_json(result.schedule);
    out["errorsBefore"] = result.errors_before;
    out["errorsAfter"] = result.errors_after;
    out["iterations"] = result.iterations_used;
    return out;
  });
}

Json optimizer_stage(const Json& payload, EventSink& sink, std::mt19937_64&) {
  return run_stage_body(payload, sink, [&]() {
    auto instance = jssp::parse_instance(payload.at("instance").get<std::string>());
    Schedule schedule = jssp::schedule_from_json(payload.at("schedule"));
    Schedule optimized = lcrp::optimize(schedule, instance);
    Json out;
    out["schedule"] = jssp::schedule_to_json(optimized);
    out["makespan"] = jssp::makespan(optimized);
    return out;
  });
}

Json supervisor_stage(const Json& payload, EventSink& sink, std::mt19937_64&) {
  return run_stage_body(payload, sink, [&]() {
    Schedule schedule = jssp::schedule_from_json(payload.at("schedule"));
    auto critical = critical_operations(schedule);
    Json ops = Json::array();
    for (const auto& key : critical)
      ops.push_back(Json{{"job", jssp::job_name(key.job)}, {"step", key.step}});
    Json out;
    out["makespan"] = schedule.entries.empty() ? 0 : jssp::makespan(schedule);
    out["operationCount"] = static_cast<int>(schedule.entries.size());
    out["criticalOps"] = std::move(ops);
    return out;
  });
}

}  // namespace

std::string RunConfig::effective_run_id() const {
  if (!run_id.empty()) return run_id;
  return instance_name + "-s" + std::to_string(seed);
}

RunConfig RunConfig::from_json(const Json& doc) {
  RunConfig config;
  config.instance_path = doc.value("instancePath", std::string{});
  config.instance_text = doc.value("instanceText", std::string{});
  config.instance_name = doc.value("instanceName", std::string("instance"));
  config.planner_rule =
      jssp::planner_rule_from_string(doc.value("rule", std::string("spt")));
  config.seed = doc.value("seed", std::uint64_t{1});
  config.repair_budget = doc.value("budget", 5);
  config.wip_penalty = doc.value("wipPenalty", 1.0);
  config.faults_path = doc.value("faultsPath", std::string{});
  config.policy_file = doc.value("policyFile", std::string{});
  config.log_dir = doc.value("logDir", std::string{});
  config.run_id = doc.value("runId", std::string{});
  config.optimize = doc.value("optimize", true);
  if (doc.contains("presetSchedule")) config.preset_schedule = doc.at("presetSchedule");
  if (doc.contains("faults"))
    config.faults = FaultPlan::from_json(doc.at("faults"));
  for (const auto& item : doc.value("disruptions", Json::array()))
    config.disruptions.push_back(event_from_json(item));
  return config;
}

log::TaskRegistry pipeline_registry() {
  log::TaskRegistry registry;
  registry["planner"] = planner_stage;
  registry["validator"] = validator_stage;
  registry["repair"] = repair_stage;
  registry["optimizer"] = optimizer_stage;
  registry["supervisor"] = supervisor_stage;
  return registry;
}

std::vector<jssp::OpKey> critical_operations(const jssp::Schedule& schedule) {
  if (schedule.entries.empty()) return {};
  std::int64_t horizon = jssp::makespan(schedule);

  struct Ref {
    jssp::OpKey key;
    const jssp::ScheduleEntry* entry;
    int machine;
  };
  std::vector<Ref> refs;
  for (const auto& e : schedule.entries) {
    int j = jssp::job_index(e.job);
    int m = jssp::machine_index(e.machine);
    if (j >= 0 && m >= 0) refs.push_back({{j, e.step}, &e, m});
  }
  std::map<jssp::OpKey, const Ref*> by_key;
  for (const auto& r : refs) by_key[r.key] = &r;
  std::map<int, std::vector<const Ref*>> queues;
  for (const auto& r : refs) queues[r.machine].push_back(&r);
  for (auto& [m, q] : queues)
    std::sort(q.begin(), q.end(), [](const Ref* a, const Ref* b) {
      return a->entry->start < b->entry->start;
    });

  std::set<jssp::OpKey> critical;
  std::vector<const Ref*> order;
  for (const auto& r : refs) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const Ref* a, const Ref* b) {
    return a->entry->end > b->entry->end;
  });
  for (const Ref* r : order) {
    if (r->entry->end == horizon) {
      critical.insert(r->key);
      continue;
    }
    jssp::OpKey job_succ{r->key.job, r->key.step + 1};
    auto js = by_key.find(job_succ);
    if (js != by_key.end() && critical.count(job_succ) &&
        js->second->entry->start == r->entry->end) {
      critical.insert(r->key);
      continue;
    }
    const auto& queue = queues[r->machine];
    for (size_t i = 0; i + 1 < queue.size(); ++i) {
      if (queue[i]->key == r->key && critical.count(queue[i + 1]->key) &&
          queue[i + 1]->entry->start == r->entry->end) {
        critical.insert(r->key);
        break;
      }
    }
  }
  return {critical.begin(), critical.end()};
}

PipelineOutcome run_pipeline(const RunConfig& config) {
  auto wall_start = std::chrono::steady_clock::now();

  RunConfig cfg = config;
  if (cfg.instance_text.empty()) {
    std::ifstream in(cfg.instance_path);
    if (!in) throw Error("IoError", "cannot open instance " + cfg.instance_path);
    cfg.instance_text.assign((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
    if (cfg.instance_name == "instance" || cfg.instance_name.empty())
      cfg.instance_name = std::filesystem::path(cfg.instance_path).stem().string();
  }
  if (!cfg.faults_path.empty() && cfg.faults.injections.empty())
    cfg.faults = FaultPlan::load(cfg.faults_path);
  auto instance = jssp::parse_instance(cfg.instance_text, cfg.instance_name);

  PipelineOutcome outcome;
  log::VersionedLog& log = outcome.log;
  auto registry = pipeline_registry();
  std::mt19937_64 rng(cfg.seed);
  std::string correlation = cfg.effective_run_id();

  // Virtual run clock: one second per log entry keeps timestamps
  // deterministic and strictly monotone.
  policy_runtime::VirtualClock run_clock;
  auto ts = [&run_clock]() {
    run_clock.advance(1.0);
    return policy_runtime::virtual_timestamp(run_clock);
  };

  Json faults_json = cfg.faults.to_json();
  auto stage_payload_common = [&](Json& payload, const std::string& stage) {
    payload["seed"] = cfg.seed;
    payload["stagePolicy"] = ir::policy_to_json(stage_policy_from_config(cfg, stage));
    if (!cfg.faults.injections.empty()) payload["faults"] = faults_json;
  };
  auto invoke = [&](const std::string& stage, Json payload) {
    stage_payload_common(payload, stage);
    EventSink sink(log, stage, correlation, ts);
    sink.emit(EventType::StartNode, payload);
    Json result = registry.at(stage)(payload, sink, rng);
    sink.emit(EventType::EndNode, result);
    return result;
  };

  // Step 1: plan proposal (a fresh seed plan, or a precomputed one).
  Json plan_payload{{"instance", cfg.instance_text},
                    {"name", cfg.instance_name},
                    {"rule", jssp::to_string(cfg.planner_rule)}};
  if (!cfg.preset_schedule.is_null()) plan_payload["preset"] = cfg.preset_schedule;
  Json planned = invoke("planner", plan_payload);
  Schedule schedule = jssp::schedule_from_json(planned.at("schedule"));

  // Step 2: non-circular validation.
  Json validated = invoke("validator", Json{{"instance", cfg.instance_text},
                                            {"schedule", planned.at("schedule")},
                                            {"downtime", Json::array()}});

  RunResult& result = outcome.result;
  result.instance_name = cfg.instance_name;
  result.seed = cfg.seed;
  bool feasible = validated.at("valid").get<bool>();

  // Steps 3 and 4: bounded local repair, then revalidation.
  if (!feasible) {
    Json repaired = invoke("repair", Json{{"instance", cfg.instance_text},
                                          {"schedule", jssp::schedule_to_json(schedule)},
                                          {"budget", cfg.repair_budget}});
    result.repair_iterations = repaired.value("iterations", 0);
    Schedule candidate = jssp::schedule_from_json(repaired.at("schedule"));

    Json revalidated =
        invoke("validator", Json{{"instance", cfg.instance_text},
                                 {"schedule", repaired.at("schedule")},
                                 {"downtime", Json::array()}});
    feasible = revalidated.at("valid").get<bool>();
    if (feasible) {
      schedule = candidate;
    } else {
      // Escalation ladder: widened neighborhoods, then a fresh plan.
      int enlargements = 0;
      auto escalated = lcrp::repair_with_escalation(
          candidate, instance, cfg.repair_budget, cfg.planner_rule, cfg.seed,
          &enlargements);
      EventSink sink(log, "repair", correlation, ts);
      sink.emit(EventType::RepairApply,
                {{"phase", "escalation"},
                 {"enlargements", enlargements},
                 {"fellBackToGlobal", escalated.fell_back_to_global},
                 {"errorsAfter", escalated.errors_after}});
      if (escalated.errors_after != 0)
        throw PipelineHalted("schedule validation failed after repair");
      sink.emit(EventType::RepairCommit,
                {{"makespan", jssp::makespan(escalated.schedule)}});
      schedule = escalated.schedule;
      result.fell_back_to_global = escalated.fell_back_to_global;
      result.optimization_skipped = true;  // proceed with the best feasible plan
      feasible = true;
    }
  }
  log.snapshot(jssp::schedule_to_json(schedule).dump());

  // Steps 5 and 6: optimize and final check.
  if (!cfg.optimize) result.optimization_skipped = true;
  if (!result.optimization_skipped) {
    Json optimized = invoke("optimizer", Json{{"instance", cfg.instance_text},
                                              {"schedule",
                                               jssp::schedule_to_json(schedule)}});
    Json final_check = invoke("validator", Json{{"instance", cfg.instance_text},
                                                {"schedule", optimized.at("schedule")},
                                                {"downtime", Json::array()}});
    if (final_check.at("valid").get<bool>())
      schedule = jssp::schedule_from_json(optimized.at("schedule"));
  }

  // Disruptions fire against the committed schedule in clock order.
  std::vector<jssp::DisruptionEvent> events = cfg.disruptions;
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.at_time < b.at_time; });
  for (const auto& event : events) {
    if (event.breakdown) result.downtime.push_back(*event.breakdown);
    Json handled = invoke("repair", Json{{"instance", cfg.instance_text},
                                         {"schedule", jssp::schedule_to_json(schedule)},
                                         {"event", event_to_json(event)},
                                         {"wipPenalty", cfg.wip_penalty},
                                         {"rule", jssp::to_string(cfg.planner_rule)}});
    schedule = jssp::schedule_from_json(handled.at("schedule"));
    result.wip_units += handled.value("wipUnits", 0);
    if (handled.value("fellBackToGlobal", false)) result.fell_back_to_global = true;
    log.snapshot(jssp::schedule_to_json(schedule).dump());
  }

  // Step 7: supervise and log.
  Json supervised = invoke("supervisor", Json{{"schedule",
                                               jssp::schedule_to_json(schedule)}});

  result.final_schedule = schedule;
  result.makespan = supervised.at("makespan").get<std::int64_t>();
  for (const auto& item : supervised.at("criticalOps"))
    result.critical_ops.push_back(
        {jssp::job_index(item.at("job").get<std::string>()), item.at("step").get<int>()});
  result.valid =
      jssp::validate_schedule(schedule, instance, result.downtime).valid;

  Schedule planner_schedule = jssp::schedule_from_json(planned.at("schedule"));
  try {
    result.edit_radius = lcrp::edit_radius(planner_schedule, schedule);
  } catch (const KeyMismatch&) {
    result.edit_radius = {static_cast<int>(schedule.entries.size()),
                          instance.job_count()};
  }

  auto wall_end = std::chrono::steady_clock::now();
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(wall_end - wall_start).count();

  if (!cfg.log_dir.empty()) {
    std::filesystem::create_directories(cfg.log_dir);
    std::string base = (std::filesystem::path(cfg.log_dir) /
                        cfg.effective_run_id())
                           .string();
    result.log_path = base + ".ndjson";
    log.save_ndjson(result.log_path);
    std::ofstream out(base + ".result.json");
    out << result.to_json().dump(2) << "\n";
  }
  return outcome;
}

Json RunResult::to_json() const {
  Json doc;
  doc["instance"] = instance_name;
  doc["seed"] = seed;
  doc["makespan"] = makespan;
  doc["valid"] = valid;
  doc["optimizationSkipped"] = optimization_skipped;
  doc["repairIterations"] = repair_iterations;
  doc["editRadius"] = Json{{"opsTouched", edit_radius.ops_touched},
                           {"jobsTouched", edit_radius.jobs_touched}};
  doc["wipUnits"] = wip_units;
  doc["fellBackToGlobal"] = fell_back_to_global;
  doc["wallTimeMs"] = wall_time_ms;
  doc["logPath"] = log_path;
  Json ops = Json::array();
  for (const auto& key : critical_ops)
    ops.push_back(Json{{"job", jssp::job_name(key.job)}, {"step", key.step}});
  doc["criticalOps"] = std::move(ops);
  doc["downtime"] = downtime_to_json(downtime);
  doc["finalSchedule"] = jssp::schedule_to_json(final_schedule);
  return doc;
}

RunResult RunResult::from_json(const Json& doc) {
  RunResult result;
  result.instance_name = doc.value("instance", std::string{});
  result.seed = doc.value("seed", std::uint64_t{0});
  result.makespan = doc.value("makespan", std::int64_t{0});
  result.valid = doc.value("valid", false);
  result.optimization_skipped = doc.value("optimizationSkipped", false);
  result.repair_iterations = doc.value("repairIterations", 0);
  if (doc.contains("editRadius")) {
    result.edit_radius.ops_touched = doc["editRadius"].value("opsTouched", 0);
    result.edit_radius.jobs_touched = doc["editRadius"].value("jobsTouched", 0);
  }
  result.wip_units = doc.value("wipUnits", 0);
  result.fell_back_to_global = doc.value("fellBackToGlobal", false);
  result.wall_time_ms = doc.value("wallTimeMs", 0.0);
  result.log_path = doc.value("logPath", std::string{});
  for (const auto& item : doc.value("criticalOps", Json::array()))
    result.critical_ops.push_back(
        {jssp::job_index(item.at("job").get<std::string>()), item.at("step").get<int>()});
  if (doc.contains("downtime")) {
    for (const auto& item : doc.at("downtime"))
      result.downtime.push_back({item.at("machine").get<int>(),
                                 item.at("from").get<std::int64_t>(),
                                 item.at("to").get<std::int64_t>()});
  }
  if (doc.contains("finalSchedule"))
    result.final_schedule = jssp::schedule_from_json(doc.at("finalSchedule"));
  return result;
}

Summary supervise(const std::vector<RunResult>& results) {
  if (results.empty()) throw EmptyInput("supervise needs at least one run result");
  Summary summary;
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].makespan < results[best].makespan ||
        (results[i].makespan == results[best].makespan &&
         results[i].seed < results[best].seed))
      best = i;
  }
  summary.best_index = best;
  summary.best = results[best];
  double ops = 0, jobs = 0, ok = 0;
  for (const auto& r : results) {
    ops += r.edit_radius.ops_touched;
    jobs += r.edit_radius.jobs_touched;
    ok += r.valid ? 1.0 : 0.0;
  }
  summary.mean_edit_radius_ops = ops / static_cast<double>(results.size());
  summary.mean_edit_radius_jobs = jobs / static_cast<double>(results.size());
  summary.success_fraction = ok / static_cast<double>(results.size());
  return summary;
}

Json Summary::to_json() const {
  Json doc;
  doc["bestIndex"] = best_index;
  doc["best"] = best.to_json();
  doc["meanEditRadiusOps"] = mean_edit_radius_ops;
  doc["meanEditRadiusJobs"] = mean_edit_radius_jobs;
  doc["successFraction"] = success_fraction;
  return doc;
}

}  // namespace alas::runtime

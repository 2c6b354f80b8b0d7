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
// Python bindings. Structured values cross the boundary as JSON text; the
// alas package decodes them into plain dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "alas/convert.hpp"
#include "alas/ir.hpp"
#include "alas/jssp.hpp"
#include "alas/lcrp.hpp"
#include "alas/log.hpp"
#include "alas/policy_runtime.hpp"
#include "alas/runtime.hpp"

namespace py = pybind11;

namespace {

using namespace alas;

jssp::DisruptionEvent event_from_text(const std::string& text) {
  Json doc = Json::parse(text);
  jssp::DisruptionEvent event;
  event.kind = doc.value("kind", std::string("machineBreakdown")) == "durationShock"
                   ? jssp::DisruptionKind::durationShock
                   : jssp::DisruptionKind::machineBreakdown;
  event.at_time = doc.value("atTime", std::int64_t{0});
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

std::string run_config_json(const std::string& config_text) {
  Json doc = Json::parse(config_text);
  runtime::RunConfig config;
  config.instance_text = doc.value("instanceText", std::string{});
  config.instance_path = doc.value("instancePath", std::string{});
  config.instance_name = doc.value("instanceName", std::string("instance"));
  config.planner_rule =
      jssp::planner_rule_from_string(doc.value("rule", std::string("spt")));
  config.seed = doc.value("seed", std::uint64_t{1});
  config.repair_budget = doc.value("budget", 5);
  config.wip_penalty = doc.value("wipPenalty", 1.0);
  config.log_dir = doc.value("logDir", std::string{});
  config.run_id = doc.value("runId", std::string{});
  config.optimize = doc.value("optimize", true);
  if (doc.contains("presetSchedule")) {
    config.preset_schedule = doc.at("presetSchedule");
    if (doc.contains("disruptions") && !doc.at("disruptions").empty())
      config.optimize = doc.value("optimize", false);
  }
  if (doc.contains("faults"))
    config.faults = policy_runtime::FaultPlan::from_json(doc.at("faults"));
  for (const auto& item : doc.value("disruptions", Json::array()))
    config.disruptions.push_back(event_from_text(item.dump()));
  auto outcome = runtime::run_pipeline(config);
  Json result = outcome.result.to_json();
  Json entries = Json::array();
  for (const auto& entry : outcome.log.entries())
    entries.push_back(log::entry_to_json(entry));
  result["log"] = std::move(entries);
  return result.dump();
}

}  // namespace

PYBIND11_MODULE(_alas, m) {
  m.doc() = "Disruption-aware scheduling and workflow reliability engine";

  py::register_exception<Error>(m, "AlasError");

  m.def("seed_plan",
        [](const std::string& instance_text, const std::string& rule,
           std::uint64_t seed) {
          auto instance = jssp::parse_instance(instance_text);
          auto schedule =
              jssp::seed_plan(instance, jssp::planner_rule_from_string(rule), seed);
          return jssp::schedule_to_json(schedule).dump();
        },
        py::arg("instance"), py::arg("rule") = "spt", py::arg("seed") = 1,
        "Non-delay list schedule; returns the schedule entry list as JSON.");

  m.def("makespan", [](const std::string& schedule_json) {
    return jssp::makespan(jssp::schedule_from_json(Json::parse(schedule_json)));
  });

  m.def("validate",
        [](const std::string& schedule_json, const std::string& instance_text) {
          auto instance = jssp::parse_instance(instance_text);
          auto report =
              jssp::validate_schedule_json(Json::parse(schedule_json), instance);
          return jssp::report_to_json(report).dump();
        },
        py::arg("schedule"), py::arg("instance"),
        "Structural validation report as JSON.");

  m.def("repair",
        [](const std::string& schedule_json, const std::string& instance_text,
           int budget) {
          auto instance = jssp::parse_instance(instance_text);
          auto schedule = jssp::schedule_from_json(Json::parse(schedule_json));
          auto errors = jssp::validate_schedule(schedule, instance).errors;
          auto result = lcrp::repair(schedule, instance, errors, budget);
          return lcrp::repair_result_to_json(result).dump();
        },
        py::arg("schedule"), py::arg("instance"), py::arg("budget") = 5);

  m.def("optimize",
        [](const std::string& schedule_json, const std::string& instance_text) {
          auto instance = jssp::parse_instance(instance_text);
          auto schedule = jssp::schedule_from_json(Json::parse(schedule_json));
          return jssp::schedule_to_json(lcrp::optimize(schedule, instance)).dump();
        },
        py::arg("schedule"), py::arg("instance"));

  m.def("brute_force_optimum", [](const std::string& instance_text) {
    auto instance = jssp::parse_instance(instance_text);
    auto result = jssp::brute_force_optimum(instance);
    Json doc;
    doc["makespan"] = result.makespan;
    doc["schedule"] = jssp::schedule_to_json(result.schedule);
    return doc.dump();
  });

  m.def("local_compensate",
        [](const std::string& schedule_json, const std::string& instance_text,
           const std::string& event_json, double wip_penalty) {
          auto instance = jssp::parse_instance(instance_text);
          auto schedule = jssp::schedule_from_json(Json::parse(schedule_json));
          auto wip = lcrp::WipModel::from_schedule(schedule, wip_penalty);
          auto result = lcrp::local_compensate(schedule, instance,
                                               event_from_text(event_json), wip);
          return lcrp::repair_result_to_json(result).dump();
        },
        py::arg("schedule"), py::arg("instance"), py::arg("event"),
        py::arg("wip_penalty") = 1.0);

  m.def("queue_reorder",
        [](const std::string& schedule_json, const std::string& committed_json,
           const std::string& instance_text, const std::string& event_json,
           double wip_penalty) {
          auto instance = jssp::parse_instance(instance_text);
          auto schedule = jssp::schedule_from_json(Json::parse(schedule_json));
          auto committed = jssp::schedule_from_json(Json::parse(committed_json));
          auto wip = lcrp::WipModel::from_schedule(committed, wip_penalty);
          auto result = lcrp::queue_reorder(schedule, instance,
                                            event_from_text(event_json), wip);
          return lcrp::repair_result_to_json(result).dump();
        },
        py::arg("schedule"), py::arg("committed"), py::arg("instance"),
        py::arg("event"), py::arg("wip_penalty") = 1.0);

  m.def("run", &run_config_json, py::arg("config"),
        "Full pipeline over a JSON run configuration; returns the run result "
        "with the event log inlined.");

  m.def("parse_ir", [](const std::string& text) {
    return ir::serialize_ir(ir::parse_ir(text));
  });
  m.def("check_well_formed", [](const std::string& text) {
    return ir::diagnostics_to_json(ir::check_well_formed(ir::parse_ir(text))).dump();
  });
  m.def("check_policies", [](const std::string& text) {
    return ir::diagnostics_to_json(ir::check_policies(ir::parse_ir(text))).dump();
  });

  m.def("emit_asl",
        [](const std::string& text) { return convert::emit_asl(ir::parse_ir(text)); });
  m.def("emit_argo",
        [](const std::string& text) { return convert::emit_argo(ir::parse_ir(text)); });
  m.def("ingest_asl", [](const std::string& text) {
    return ir::serialize_ir(convert::ingest_asl(text));
  });
  m.def("ingest_argo", [](const std::string& text) {
    return ir::serialize_ir(convert::ingest_argo(text));
  });
  m.def("roundtrip_check", [](const std::string& text, const std::string& target) {
    auto report = convert::roundtrip_check(
        ir::parse_ir(text),
        target == "argo" ? convert::Target::argo : convert::Target::asl);
    return convert::report_to_json(report).dump();
  });

  m.def("compute_backoff",
        [](const std::string& mode, double base, double cap, double jitter,
           int attempt, std::uint64_t seed) {
          ir::Backoff backoff;
          backoff.mode = mode == "fixed" ? ir::Backoff::Mode::Fixed
                                         : ir::Backoff::Mode::Exponential;
          backoff.base = base;
          if (cap > 0) backoff.cap = cap;
          backoff.jitter = jitter;
          return policy_runtime::compute_backoff(backoff, attempt, seed);
        },
        py::arg("mode"), py::arg("base"), py::arg("cap") = 0.0,
        py::arg("jitter") = 0.0, py::arg("attempt") = 1, py::arg("seed") = 0);

  m.def("replay_file", [](const std::string& path, std::uint64_t seed) {
    auto recorded = log::VersionedLog::load_ndjson(path);
    auto outcome = log::replay(recorded, runtime::pipeline_registry(), seed);
    Json doc;
    doc["parityOk"] = outcome.parity_ok;
    doc["finalStateHash"] = outcome.final_state_hash;
    return doc.dump();
  });

  m.attr("__version__") = "0.1.0";
}

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
// Argo Workflows converter. Tasks become container templates wired through
// a DAG; retries ride retryStrategy, timeouts activeDeadlineSeconds, guards
// `when` clauses, compensation exit hooks. Metadata without a native home
// rides template annotations, the declared fallback carrier.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <sstream>

#include "alas/convert.hpp"
#include "convert_detail.hpp"

namespace alas::convert {

namespace {

using namespace detail;

constexpr const char* kNodeAnnotation = "alas.io/node";
constexpr const char* kWorkflowAnnotation = "alas.io/workflow";

std::string seconds_string(double seconds) {
  std::ostringstream out;
  out << seconds << "s";
  return out.str();
}

double seconds_from_string(const std::string& text) {
  return std::strtod(text.c_str(), nullptr);
}

const ir::Policy* resolved_policy(const ir::WorkflowIR& ir, const ir::NodeSpec& node) {
  if (node.policy_ref) return &ir.policies.at(*node.policy_ref);
  if (auto fallback = ir::default_policy_name(ir))
    return &ir.policies.at(*fallback);
  return nullptr;
}

Json node_annotation(const ir::WorkflowIR& ir, const ir::NodeSpec& node) {
  Json meta;
  meta["kind"] = ir::to_string(node.kind);
  meta["name"] = node.name;
  if (!node.capabilities.empty()) meta["capabilities"] = node.capabilities;
  if (!node.params.empty()) meta["params"] = node.params;
  if (node.io_ref)
    meta["ioRef"] = *node.io_ref;
  else
    meta["io"] = ir::io_schema_to_json(node.io);
  if (node.log_schema_ref) meta["logSchemaRef"] = *node.log_schema_ref;
  if (node.policy_ref) meta["policyRef"] = *node.policy_ref;

  const ir::Policy* policy = resolved_policy(ir, node);
  if (policy) {
    if (policy->retry) meta["retryOn"] = policy->retry->retry_on;
    if (policy->backoff && policy->backoff->jitter > 0.0)
      meta["jitter"] = policy->backoff->jitter;
    if (policy->timeout) meta["timeoutSeconds"] = policy->timeout->seconds;
    if (policy->loop_guards) {
      ir::Policy shell;
      shell.loop_guards = policy->loop_guards;
      meta["loopGuards"] = ir::policy_to_json(shell)["loopGuards"];
    }
    if (policy->idempotency_key) {
      meta["idemScope"] = policy->idempotency_key->scope;
      if (policy->idempotency_key->path) meta["idemPath"] = true;
    }
    if (!policy->catches.empty()) {
      Json catches = Json::array();
      for (const auto& rule : policy->catches)
        catches.push_back(Json{{"errors", rule.errors}, {"handler", rule.handler}});
      meta["catches"] = std::move(catches);
    }
    if (policy->compensation) {
      // Exit hooks live on dag tasks; nested children keep the handler here.
      meta["compHandler"] = policy->compensation->handler;
      meta["compTrigger"] = policy->compensation->trigger;
      meta["compSafeReinvoke"] = policy->compensation->safe_reinvoke;
    }
  }
  return meta;
}

YAML::Node container_for(const std::string& id) {
  YAML::Node container;
  container["image"] = "alas/noop:latest";
  container["command"].push_back("alas-node");
  container["args"].push_back(id);
  return container;
}

void apply_template_policy(YAML::Node& tmpl, const ir::Policy* policy) {
  if (!policy) return;
  if (policy->retry) {
    YAML::Node retry;
    retry["limit"] = policy->retry->max_attempts;
    retry["retryPolicy"] = "Always";
    if (policy->backoff) {
      YAML::Node backoff;
      backoff["duration"] = seconds_string(policy->backoff->base);
      backoff["factor"] =
          policy->backoff->mode == ir::Backoff::Mode::Exponential ? 2 : 1;
      if (policy->backoff->cap)
        backoff["maxDuration"] = seconds_string(*policy->backoff->cap);
      retry["backoff"] = backoff;
    }
    tmpl["retryStrategy"] = retry;
  }
  if (policy->timeout) {
    double seconds = policy->timeout->seconds;
    if (seconds == static_cast<double>(static_cast<std::int64_t>(seconds)))
      tmpl["activeDeadlineSeconds"] = static_cast<std::int64_t>(seconds);
  }
  if (policy->idempotency_key) {
    std::string key = policy->idempotency_key->key_template
                          ? *policy->idempotency_key->key_template
                          : policy->idempotency_key->path.value_or("");
    YAML::Node param;
    param["name"] = "__alas_idem_key";
    param["value"] = key;
    tmpl["inputs"]["parameters"].push_back(param);
  }
}

}  // namespace

std::string emit_argo(const ir::WorkflowIR& ir) {
  if (ir.nodes.empty()) throw UnsupportedFeature("cannot emit an empty workflow");
  auto links = build_links(ir);
  auto nested = nested_children(ir, links);

  // Incoming edges per top-level node, with fan-node re-attribution.
  std::map<std::string, std::string> parent_of;  // nested child -> fan node
  for (const auto& node : ir.nodes) {
    if (node.kind != ir::NodeKind::Parallel && node.kind != ir::NodeKind::Map)
      continue;
    for (const auto& child : resolve_fanout(ir, node, links).children)
      parent_of[child] = node.id;
  }

  YAML::Node doc;
  doc["apiVersion"] = "argoproj.io/v1alpha1";
  doc["kind"] = "Workflow";
  doc["metadata"]["name"] = ir.name;
  Json top;
  if (auto fallback = ir::default_policy_name(ir)) top["defaultPolicy"] = *fallback;
  top["meta"] = ir.meta;
  Json schemas = Json::object();
  for (const auto& [name, schema] : ir.schemas)
    schemas[name] = ir::io_schema_to_json(schema);
  top["schemas"] = std::move(schemas);
  Json log_schemas = Json::object();
  for (const auto& [name, schema] : ir.log_schemas) log_schemas[name] = schema;
  top["logSchemas"] = std::move(log_schemas);
  doc["metadata"]["annotations"][kWorkflowAnnotation] = top.dump();

  doc["spec"]["entrypoint"] = "main";

  // DAG over the top-level nodes.
  YAML::Node tasks(YAML::NodeType::Sequence);
  std::vector<std::pair<std::string, std::string>> catch_tasks;  // node, handler
  std::set<std::string> synthetic_handlers;

  for (const auto& node : ir.nodes) {
    if (nested.count(node.id)) continue;
    YAML::Node task;
    task["name"] = node.id;
    task["template"] = node.id;

    std::vector<std::string> deps;
    std::optional<std::string> when;
    for (const auto& edge : ir.edges) {
      if (edge.to != node.id) continue;
      std::string source =
          parent_of.count(edge.from) ? parent_of.at(edge.from) : edge.from;
      if (std::find(deps.begin(), deps.end(), source) == deps.end())
        deps.push_back(source);
      if (edge.kind == ir::EdgeKind::Branch) {
        if (when)
          throw UnsupportedFeature("node '" + node.id +
                                   "' has more than one incoming branch edge");
        if (!edge.guard)
          throw UnsupportedFeature("branch edge without a guard into '" + node.id +
                                   "'");
        auto expr = guard::normalize(guard::parse(*edge.guard));
        when = when_from_guard(expr, edge.from);
      }
    }
    if (!deps.empty()) {
      YAML::Node dep_list(YAML::NodeType::Sequence);
      for (const auto& d : deps) dep_list.push_back(d);
      task["dependencies"] = dep_list;
    }
    if (when) task["when"] = *when;

    const ir::Policy* policy = resolved_policy(ir, node);
    if (policy && policy->compensation) {
      task["hooks"]["exit"]["template"] = policy->compensation->handler;
      if (!ir.find_node(policy->compensation->handler))
        synthetic_handlers.insert(policy->compensation->handler);
    }
    if (policy) {
      for (size_t i = 0; i < policy->catches.size(); ++i) {
        catch_tasks.push_back({node.id, policy->catches[i].handler});
        if (!ir.find_node(policy->catches[i].handler))
          synthetic_handlers.insert(policy->catches[i].handler);
      }
    }
    tasks.push_back(task);
  }
  // Failure-routed catch tasks, after the regular flow.
  for (size_t i = 0; i < catch_tasks.size(); ++i) {
    YAML::Node task;
    task["name"] = catch_tasks[i].first + "--catch-" + std::to_string(i);
    task["template"] = catch_tasks[i].second;
    task["depends"] = catch_tasks[i].first + ".Failed";
    tasks.push_back(task);
  }

  YAML::Node main_template;
  main_template["name"] = "main";
  main_template["dag"]["tasks"] = tasks;
  doc["spec"]["templates"].push_back(main_template);

  // One template per node, in IR order (nested children included).
  for (const auto& node : ir.nodes) {
    YAML::Node tmpl;
    tmpl["name"] = node.id;
    tmpl["metadata"]["annotations"][kNodeAnnotation] =
        node_annotation(ir, node).dump();
    const ir::Policy* policy = resolved_policy(ir, node);
    switch (node.kind) {
      case ir::NodeKind::Task:
      case ir::NodeKind::Choice:
        tmpl["container"] = container_for(node.id);
        break;
      case ir::NodeKind::Parallel: {
        auto fan = resolve_fanout(ir, node, links);
        YAML::Node group(YAML::NodeType::Sequence);
        for (const auto& child : fan.children) {
          YAML::Node step;
          step["name"] = child;
          step["template"] = child;
          group.push_back(step);
        }
        tmpl["steps"].push_back(group);
        break;
      }
      case ir::NodeKind::Map: {
        auto fan = resolve_fanout(ir, node, links);
        YAML::Node step;
        step["name"] = "iterate";
        step["template"] = fan.children.front();
        if (node.params.contains("items") && node.params.at("items").is_array()) {
          YAML::Node items(YAML::NodeType::Sequence);
          for (const auto& item : node.params.at("items"))
            items.push_back(item.dump());
          step["withItems"] = items;
        } else {
          step["withParam"] = "{{workflow.parameters.items}}";
        }
        YAML::Node group(YAML::NodeType::Sequence);
        group.push_back(step);
        tmpl["steps"].push_back(group);
        break;
      }
    }
    apply_template_policy(tmpl, policy);
    doc["spec"]["templates"].push_back(tmpl);
  }

  for (const auto& handler : synthetic_handlers) {
    YAML::Node tmpl;
    tmpl["name"] = handler;
    tmpl["metadata"]["annotations"][kNodeAnnotation] =
        Json{{"synthetic", "handler"}}.dump();
    tmpl["container"] = container_for(handler);
    doc["spec"]["templates"].push_back(tmpl);
  }

  return YAML::Dump(doc) + "\n";
}

namespace {

struct DagTaskInfo {
  std::vector<std::string> deps;
  std::optional<std::string> when;
  std::optional<std::string> exit_hook;
};

struct TemplateInfo {
  Json meta = Json::object();
  ir::NodeKind kind = ir::NodeKind::Task;
  bool synthetic = false;
  std::vector<std::string> step_children;
  bool with_items = false;
  std::optional<ir::Retry> retry;
  std::optional<ir::Backoff> backoff;
  std::optional<double> active_deadline;
  std::optional<std::string> idem_key;
};

TemplateInfo read_template(const YAML::Node& tmpl) {
  TemplateInfo info;
  if (tmpl["metadata"] && tmpl["metadata"]["annotations"] &&
      tmpl["metadata"]["annotations"][kNodeAnnotation]) {
    try {
      info.meta = Json::parse(
          tmpl["metadata"]["annotations"][kNodeAnnotation].as<std::string>());
    } catch (const Json::exception&) {
      info.meta = Json::object();
    }
  }
  if (info.meta.value("synthetic", std::string{}) == "handler")
    info.synthetic = true;

  std::string kind = info.meta.value("kind", std::string{});
  if (kind == "choice")
    info.kind = ir::NodeKind::Choice;
  else if (kind == "parallel")
    info.kind = ir::NodeKind::Parallel;
  else if (kind == "map")
    info.kind = ir::NodeKind::Map;
  else if (kind == "task" || tmpl["container"])
    info.kind = ir::NodeKind::Task;
  else if (tmpl["steps"])
    info.kind = ir::NodeKind::Parallel;
  else if (tmpl["dag"])
    throw UnsupportedConstruct("nested dag templates are outside the subset");
  else
    throw UnsupportedConstruct("template '" + tmpl["name"].as<std::string>() +
                               "' has no recognizable body");

  if (tmpl["steps"]) {
    for (const auto& group : tmpl["steps"]) {
      for (const auto& step : group) {
        info.step_children.push_back(step["template"].as<std::string>());
        if (step["withItems"] || step["withParam"]) info.with_items = true;
      }
    }
  }
  if (tmpl["retryStrategy"]) {
    const auto& rs = tmpl["retryStrategy"];
    ir::Retry retry;
    retry.max_attempts = rs["limit"] ? rs["limit"].as<int>() : 0;
    if (info.meta.contains("retryOn"))
      retry.retry_on = info.meta.at("retryOn").get<std::vector<std::string>>();
    info.retry = retry;
    if (rs["backoff"]) {
      ir::Backoff backoff;
      backoff.base = seconds_from_string(rs["backoff"]["duration"].as<std::string>());
      int factor = rs["backoff"]["factor"] ? rs["backoff"]["factor"].as<int>() : 2;
      backoff.mode =
          factor == 1 ? ir::Backoff::Mode::Fixed : ir::Backoff::Mode::Exponential;
      if (rs["backoff"]["maxDuration"])
        backoff.cap =
            seconds_from_string(rs["backoff"]["maxDuration"].as<std::string>());
      backoff.jitter = info.meta.value("jitter", 0.0);
      info.backoff = backoff;
    }
  }
  if (tmpl["activeDeadlineSeconds"])
    info.active_deadline = tmpl["activeDeadlineSeconds"].as<double>();
  if (tmpl["inputs"] && tmpl["inputs"]["parameters"]) {
    for (const auto& param : tmpl["inputs"]["parameters"]) {
      if (param["name"].as<std::string>() == "__alas_idem_key")
        info.idem_key = param["value"].as<std::string>();
    }
  }
  return info;
}

ir::Policy assemble_policy(const TemplateInfo& info,
                           const std::optional<std::string>& exit_hook,
                           bool* present) {
  ir::Policy policy;
  *present = false;
  if (info.retry) {
    policy.retry = info.retry;
    *present = true;
  }
  if (info.backoff) {
    policy.backoff = info.backoff;
    *present = true;
  }
  if (info.meta.contains("timeoutSeconds")) {
    policy.timeout = ir::Timeout{info.meta.at("timeoutSeconds").get<double>()};
    *present = true;
  } else if (info.active_deadline) {
    policy.timeout = ir::Timeout{*info.active_deadline};
    *present = true;
  }
  if (info.idem_key) {
    ir::IdempotencyKey key;
    if (info.meta.value("idemPath", false))
      key.path = *info.idem_key;
    else
      key.key_template = *info.idem_key;
    key.scope = info.meta.value("idemScope", "workflow");
    policy.idempotency_key = std::move(key);
    *present = true;
  }
  if (info.meta.contains("catches")) {
    for (const auto& item : info.meta.at("catches")) {
      ir::CatchRule rule;
      rule.errors = item.at("errors").get<std::vector<std::string>>();
      rule.handler = item.at("handler").get<std::string>();
      policy.catches.push_back(std::move(rule));
    }
    *present = true;
  }
  std::optional<std::string> handler = exit_hook;
  if (!handler && info.meta.contains("compHandler"))
    handler = info.meta.at("compHandler").get<std::string>();
  if (handler) {
    ir::Compensation comp;
    comp.handler = *handler;
    comp.trigger = info.meta.value("compTrigger", "onFailure");
    comp.safe_reinvoke = info.meta.value("compSafeReinvoke", false);
    policy.compensation = std::move(comp);
    *present = true;
  }
  if (info.meta.contains("loopGuards")) {
    Json shell;
    shell["loopGuards"] = info.meta.at("loopGuards");
    policy.loop_guards = ir::policy_from_json(shell, "loopGuards").loop_guards;
    *present = true;
  }
  return policy;
}

}  // namespace

ir::WorkflowIR ingest_argo(const std::string& text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& ex) {
    throw SyntaxError(std::string("malformed Argo document: ") + ex.what());
  }
  if (!doc["kind"] || doc["kind"].as<std::string>() != "Workflow")
    throw UnsupportedConstruct("document kind is not Workflow");
  if (!doc["spec"] || !doc["spec"]["templates"])
    throw UnsupportedConstruct("workflow has no templates");

  ir::WorkflowIR ir;
  ir.name = doc["metadata"] && doc["metadata"]["name"]
                ? doc["metadata"]["name"].as<std::string>()
                : "workflow";
  std::string default_policy;
  if (doc["metadata"] && doc["metadata"]["annotations"] &&
      doc["metadata"]["annotations"][kWorkflowAnnotation]) {
    try {
      Json top = Json::parse(
          doc["metadata"]["annotations"][kWorkflowAnnotation].as<std::string>());
      default_policy = top.value("defaultPolicy", std::string{});
      ir.meta = top.value("meta", Json::object());
      Json schema_map = top.value("schemas", Json::object());
      for (const auto& [name, schema] : schema_map.items())
        ir.schemas[name] = ir::io_schema_from_json(schema, "schemas." + name);
      Json log_schema_map = top.value("logSchemas", Json::object());
      for (const auto& [name, schema] : log_schema_map.items())
        ir.log_schemas[name] = schema;
    } catch (const Json::exception&) {
    }
  }

  // Pass 1: dag structure.
  std::map<std::string, DagTaskInfo> dag;
  std::vector<std::string> dag_order;
  YAML::Node main_copy;
  for (const auto& tmpl : doc["spec"]["templates"])
    if (tmpl["name"].as<std::string>() == "main" && tmpl["dag"])
      main_copy = static_cast<YAML::Node>(tmpl);
  if (!main_copy) throw UnsupportedConstruct("no main dag template");
  for (const auto& task : main_copy["dag"]["tasks"]) {
    std::string name = task["name"].as<std::string>();
    if (name.find("--catch-") != std::string::npos) continue;  // decorative
    DagTaskInfo info;
    if (task["dependencies"])
      for (const auto& dep : task["dependencies"])
        info.deps.push_back(dep.as<std::string>());
    if (task["when"]) info.when = task["when"].as<std::string>();
    if (task["hooks"] && task["hooks"]["exit"] && task["hooks"]["exit"]["template"])
      info.exit_hook = task["hooks"]["exit"]["template"].as<std::string>();
    dag[name] = std::move(info);
    dag_order.push_back(name);
  }

  // Pass 2: templates -> nodes and policy content.
  std::map<std::string, TemplateInfo> templates;
  std::vector<std::string> template_order;
  for (const auto& tmpl : doc["spec"]["templates"]) {
    std::string name = tmpl["name"].as<std::string>();
    if (name == "main") continue;
    TemplateInfo info = read_template(tmpl);
    if (info.synthetic) continue;
    templates[name] = info;
    template_order.push_back(name);
  }

  std::map<std::string, std::vector<std::string>> children_of;
  for (const auto& name : template_order) {
    const auto& info = templates.at(name);
    if (info.kind == ir::NodeKind::Parallel || info.kind == ir::NodeKind::Map)
      children_of[name] = info.step_children;
  }

  for (const auto& name : template_order) {
    const auto& info = templates.at(name);
    ir::NodeSpec node;
    node.id = name;
    node.kind = info.kind;
    node.name = info.meta.value("name", name);
    node.capabilities = info.meta.value("capabilities", Json::object());
    node.params = info.meta.value("params", Json::object());
    if (info.meta.contains("ioRef")) {
      node.io_ref = info.meta.at("ioRef").get<std::string>();
      auto it = ir.schemas.find(*node.io_ref);
      if (it != ir.schemas.end()) node.io = it->second;
    } else if (info.meta.contains("io")) {
      node.io = ir::io_schema_from_json(info.meta.at("io"), name + ".io");
    }
    if (info.meta.contains("logSchemaRef"))
      node.log_schema_ref = info.meta.at("logSchemaRef").get<std::string>();
    if (info.meta.contains("policyRef"))
      node.policy_ref = info.meta.at("policyRef").get<std::string>();

    std::optional<std::string> exit_hook;
    auto dag_it = dag.find(name);
    if (dag_it != dag.end()) exit_hook = dag_it->second.exit_hook;
    bool present = false;
    ir::Policy policy = assemble_policy(info, exit_hook, &present);
    if (present || node.policy_ref) {
      std::string policy_name =
          node.policy_ref ? *node.policy_ref
                          : (default_policy.empty() ? "default" : default_policy);
      if (!ir.policies.count(policy_name)) ir.policies[policy_name] = policy;
    }
    ir.nodes.push_back(std::move(node));
  }

  // Pass 3: edges in dag order, re-attributing fan-node dependencies.
  auto kind_of = [&](const std::string& id) {
    auto it = templates.find(id);
    return it != templates.end() ? it->second.kind : ir::NodeKind::Task;
  };
  for (const auto& name : dag_order) {
    const auto& info = dag.at(name);
    for (const auto& dep : info.deps) {
      std::vector<std::string> sources;
      if (children_of.count(dep)) {
        auto kind = kind_of(dep);
        if (kind == ir::NodeKind::Map)
          sources = {children_of.at(dep).front()};
        else
          sources = children_of.at(dep);
      } else {
        sources = {dep};
      }
      for (const auto& source : sources) {
        ir::EdgeSpec edge;
        edge.from = source;
        edge.to = name;
        if (info.when) {
          edge.kind = ir::EdgeKind::Branch;
          edge.guard = detail::canonical_guard(guard_text_from_when(*info.when));
        } else if (kind_of(source) == ir::NodeKind::Choice) {
          edge.kind = ir::EdgeKind::Default;
        } else {
          edge.kind = ir::EdgeKind::Sequence;
        }
        ir.edges.push_back(std::move(edge));
      }
    }
    if (children_of.count(name)) {
      for (const auto& child : children_of.at(name)) {
        ir::EdgeSpec edge;
        edge.from = name;
        edge.to = child;
        edge.kind = ir::EdgeKind::Sequence;
        ir.edges.push_back(std::move(edge));
      }
    }
  }
  return ir;
}

}  // namespace alas::convert

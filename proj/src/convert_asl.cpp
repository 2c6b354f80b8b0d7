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
// Amazon States Language converter. Policy semantics ride the native Retry/
// Catch/TimeoutSeconds fields; metadata without a native home rides state
// Comments and the reserved __alas_idem_key input field, as declared in the
// conformance notes.

#include <algorithm>

#include "alas/convert.hpp"
#include "convert_detail.hpp"

namespace alas::convert {

namespace detail2 {

using namespace detail;

std::vector<std::string> classes_to_asl(const std::vector<std::string>& classes) {
  std::vector<std::string> out;
  for (const auto& c : classes) out.push_back(c == "*" ? "States.ALL" : c);
  return out;
}

std::vector<std::string> classes_from_asl(const Json& list) {
  std::vector<std::string> out;
  for (const auto& item : list)
    out.push_back(item.get<std::string>() == "States.ALL" ? "*"
                                                          : item.get<std::string>());
  return out;
}

Json node_meta(const ir::WorkflowIR& ir, const ir::NodeSpec& node) {
  Json meta = Json::object();
  meta["name"] = node.name;
  if (node.policy_ref) meta["policyRef"] = *node.policy_ref;
  if (!node.capabilities.empty()) meta["capabilities"] = node.capabilities;
  if (node.kind != ir::NodeKind::Task && !node.params.empty())
    meta["params"] = node.params;
  if (node.io_ref)
    meta["ioRef"] = *node.io_ref;
  else
    meta["io"] = ir::io_schema_to_json(node.io);
  if (node.log_schema_ref) meta["logSchemaRef"] = *node.log_schema_ref;

  const ir::Policy* policy = nullptr;
  if (node.policy_ref)
    policy = &ir.policies.at(*node.policy_ref);
  else if (auto name = ir::default_policy_name(ir))
    policy = &ir.policies.at(*name);
  if (policy) {
    if (node.kind == ir::NodeKind::Choice) {
      // Choice states carry no native policy fields; tunnel the content.
      meta["policy"] = ir::policy_to_json(*policy);
    } else {
      if (policy->backoff && policy->backoff->jitter > 0.0)
        meta["jitter"] = policy->backoff->jitter;
      if (policy->loop_guards) {
        ir::Policy shell;
        shell.loop_guards = policy->loop_guards;
        meta["loopGuards"] = ir::policy_to_json(shell)["loopGuards"];
      }
      if (policy->idempotency_key) meta["idemScope"] = policy->idempotency_key->scope;
      if (policy->retry && policy->retry->retry_on.empty())
        meta["retryNoClasses"] = policy->retry->max_attempts;
    }
  }
  return meta;
}

struct SyntheticStates {
  Json states = Json::object();

  void ensure_catch_handler(const std::string& id) {
    if (states.contains(id)) return;
    Json state;
    state["Type"] = "Task";
    state["Comment"] = Json{{"synthetic", "catch-handler"}}.dump();
    state["Resource"] = "alas:local:handler/" + id;
    state["End"] = true;
    states[id] = std::move(state);
  }

  void ensure_compensation_handler(const std::string& id, const ir::Compensation& comp) {
    if (states.contains(id)) return;
    Json state;
    state["Type"] = "Task";
    state["Comment"] = Json{{"synthetic", "compensation-handler"},
                            {"trigger", comp.trigger},
                            {"safeReinvoke", comp.safe_reinvoke}}
                           .dump();
    state["Resource"] = "alas:local:handler/" + id;
    state["End"] = true;
    states[id] = std::move(state);
  }
};

void apply_policy_natives(Json& state, const ir::WorkflowIR& ir,
                          const ir::NodeSpec& node, SyntheticStates& synthetic) {
  const ir::Policy* policy = nullptr;
  if (node.policy_ref)
    policy = &ir.policies.at(*node.policy_ref);
  else if (auto name = ir::default_policy_name(ir))
    policy = &ir.policies.at(*name);
  if (!policy) return;

  if (policy->timeout) state["TimeoutSeconds"] = policy->timeout->seconds;
  if (policy->retry && !policy->retry->retry_on.empty()) {
    Json entry;
    entry["ErrorEquals"] = classes_to_asl(policy->retry->retry_on);
    entry["MaxAttempts"] = policy->retry->max_attempts;
    if (policy->backoff) {
      entry["IntervalSeconds"] = policy->backoff->base;
      entry["BackoffRate"] =
          policy->backoff->mode == ir::Backoff::Mode::Exponential ? 2.0 : 1.0;
      if (policy->backoff->cap) entry["MaxDelaySeconds"] = *policy->backoff->cap;
      if (policy->backoff->jitter > 0.0) entry["JitterStrategy"] = "FULL";
    }
    state["Retry"] = Json::array({entry});
  }
  Json catches = Json::array();
  for (const auto& rule : policy->catches) {
    if (!ir.find_node(rule.handler)) synthetic.ensure_catch_handler(rule.handler);
    Json entry;
    entry["ErrorEquals"] = classes_to_asl(rule.errors);
    entry["Next"] = rule.handler;
    catches.push_back(std::move(entry));
  }
  if (policy->compensation) {
    if (ir.find_node(policy->compensation->handler))
      throw UnsupportedFeature(
          "ASL compensation handler must not also be a workflow node: " +
          policy->compensation->handler);
    synthetic.ensure_compensation_handler(policy->compensation->handler,
                                          *policy->compensation);
    Json entry;
    entry["ErrorEquals"] = Json::array({"States.ALL"});
    entry["Next"] = policy->compensation->handler;
    catches.push_back(std::move(entry));
  }
  if (!catches.empty()) state["Catch"] = std::move(catches);
  if (policy->idempotency_key) {
    std::string key = policy->idempotency_key->key_template
                          ? *policy->idempotency_key->key_template
                          : policy->idempotency_key->path.value_or("");
    if (!state.contains("Parameters")) state["Parameters"] = Json::object();
    state["Parameters"]["__alas_idem_key"] = key;
  }
}

Json emit_task_state(const ir::WorkflowIR& ir, const ir::NodeSpec& node,
                     SyntheticStates& synthetic) {
  Json state;
  state["Type"] = "Task";
  state["Comment"] = node_meta(ir, node).dump();
  std::string resource = "alas:local:task/" + node.id;
  if (node.params.contains("resource") && node.params.at("resource").is_string())
    resource = node.params.at("resource").get<std::string>();
  state["Resource"] = resource;

  Json parameters = Json::object();
  for (const auto& [key, value] : node.params.items())
    if (key != "resource") parameters[key] = value;
  if (!parameters.empty()) state["Parameters"] = std::move(parameters);
  apply_policy_natives(state, ir, node, synthetic);
  return state;
}

}  // namespace detail2

std::string to_string(Target target) { return target == Target::asl ? "asl" : "argo"; }

std::string emit_asl(const ir::WorkflowIR& ir) {
  using namespace detail;
  using namespace detail2;
  if (ir.nodes.empty()) throw UnsupportedFeature("cannot emit an empty workflow");

  auto links = build_links(ir);
  auto nested = nested_children(ir, links);
  SyntheticStates synthetic;
  Json states = Json::object();

  auto sequence_next = [&](const ir::NodeSpec& node, Json& state) {
    const auto& out = links.at(node.id).sequence_out;
    if (out.size() > 1)
      throw UnsupportedFeature("sequence fan-out from '" + node.id +
                               "' has no ASL mapping outside parallel nodes");
    if (out.size() == 1)
      state["Next"] = out[0]->to;
    else
      state["End"] = true;
  };

  for (const auto& node : ir.nodes) {
    if (nested.count(node.id)) continue;
    const auto& node_links = links.at(node.id);
    if (node.kind != ir::NodeKind::Choice &&
        (!node_links.branch_out.empty() || node_links.default_out))
      throw UnsupportedFeature("branch edges from non-choice node '" + node.id + "'");

    switch (node.kind) {
      case ir::NodeKind::Task: {
        Json state = emit_task_state(ir, node, synthetic);
        sequence_next(node, state);
        states[node.id] = std::move(state);
        break;
      }
      case ir::NodeKind::Choice: {
        Json state;
        state["Type"] = "Choice";
        state["Comment"] = node_meta(ir, node).dump();
        Json choices = Json::array();
        for (const auto* edge : node_links.branch_out) {
          if (!edge->guard)
            throw UnsupportedFeature("branch edge without a guard on '" + node.id +
                                     "'");
          auto expr = guard::normalize(guard::parse(*edge->guard));
          Json rule = condition_from_guard(expr);
          rule["Next"] = edge->to;
          choices.push_back(std::move(rule));
        }
        state["Choices"] = std::move(choices);
        if (node_links.default_out) state["Default"] = node_links.default_out->to;
        if (!node_links.sequence_out.empty())
          throw UnsupportedFeature("sequence edge from choice node '" + node.id + "'");
        states[node.id] = std::move(state);
        break;
      }
      case ir::NodeKind::Parallel: {
        auto fan = resolve_fanout(ir, node, links);
        Json state;
        state["Type"] = "Parallel";
        state["Comment"] = node_meta(ir, node).dump();
        Json branches = Json::array();
        for (const auto& child_id : fan.children) {
          const ir::NodeSpec* child = ir.find_node(child_id);
          if (child->kind != ir::NodeKind::Task)
            throw UnsupportedFeature("parallel branch '" + child_id +
                                     "' is not a task node");
          Json branch;
          branch["StartAt"] = child_id;
          Json child_state = emit_task_state(ir, *child, synthetic);
          child_state["End"] = true;
          branch["States"] = Json{{child_id, std::move(child_state)}};
          branches.push_back(std::move(branch));
        }
        state["Branches"] = std::move(branches);
        apply_policy_natives(state, ir, node, synthetic);
        if (!fan.join.empty())
          state["Next"] = fan.join;
        else
          state["End"] = true;
        states[node.id] = std::move(state);
        break;
      }
      case ir::NodeKind::Map: {
        auto fan = resolve_fanout(ir, node, links);
        const ir::NodeSpec* body = ir.find_node(fan.children.front());
        if (body->kind != ir::NodeKind::Task)
          throw UnsupportedFeature("map body '" + body->id + "' is not a task node");
        Json state;
        state["Type"] = "Map";
        state["Comment"] = node_meta(ir, node).dump();
        std::string items_path = "$.items";
        if (node.params.contains("itemsPath") && node.params.at("itemsPath").is_string())
          items_path = node.params.at("itemsPath").get<std::string>();
        state["ItemsPath"] = items_path;
        Json iterator;
        iterator["StartAt"] = body->id;
        Json body_state = detail2::emit_task_state(ir, *body, synthetic);
        body_state["End"] = true;
        iterator["States"] = Json{{body->id, std::move(body_state)}};
        state["Iterator"] = std::move(iterator);
        apply_policy_natives(state, ir, node, synthetic);
        if (!fan.join.empty())
          state["Next"] = fan.join;
        else
          state["End"] = true;
        states[node.id] = std::move(state);
        break;
      }
    }
  }

  for (const auto& [id, state] : synthetic.states.items()) states[id] = state;

  Json top_meta;
  top_meta["workflow"] = ir.name;
  if (auto fallback = ir::default_policy_name(ir)) top_meta["defaultPolicy"] = *fallback;
  top_meta["meta"] = ir.meta;
  Json schemas = Json::object();
  for (const auto& [name, schema] : ir.schemas)
    schemas[name] = ir::io_schema_to_json(schema);
  top_meta["schemas"] = std::move(schemas);
  Json log_schemas = Json::object();
  for (const auto& [name, schema] : ir.log_schemas) log_schemas[name] = schema;
  top_meta["logSchemas"] = std::move(log_schemas);

  Json doc;
  doc["Comment"] = top_meta.dump();
  doc["StartAt"] = detail::start_node(ir, links, nested);
  doc["States"] = std::move(states);
  return doc.dump(2) + "\n";
}

namespace detail2 {

struct StateMeta {
  Json meta = Json::object();
  bool synthetic = false;
  std::string synthetic_kind;
};

StateMeta read_meta(const Json& state) {
  StateMeta out;
  if (state.contains("Comment") && state.at("Comment").is_string()) {
    try {
      out.meta = Json::parse(state.at("Comment").get<std::string>());
    } catch (const Json::exception&) {
      out.meta = Json::object();
    }
  }
  if (out.meta.contains("synthetic")) {
    out.synthetic = true;
    out.synthetic_kind = out.meta.at("synthetic").get<std::string>();
  }
  return out;
}

// Rebuilds a NodeSpec plus its policy content from one state object.
struct IngestedNode {
  ir::NodeSpec node;
  ir::Policy policy;
  bool policy_present = false;
};

IngestedNode ingest_state_node(const std::string& id, const Json& state,
                               ir::NodeKind kind, const Json& states,
                               const std::map<std::string, ir::IoSchema>& schemas) {
  IngestedNode out;
  StateMeta meta = read_meta(state);
  out.node.id = id;
  out.node.kind = kind;
  out.node.name = meta.meta.value("name", id);
  out.node.capabilities = meta.meta.value("capabilities", Json::object());
  if (meta.meta.contains("ioRef")) {
    out.node.io_ref = meta.meta.at("ioRef").get<std::string>();
    auto it = schemas.find(*out.node.io_ref);
    if (it != schemas.end()) out.node.io = it->second;
  } else if (meta.meta.contains("io")) {
    out.node.io = ir::io_schema_from_json(meta.meta.at("io"), id + ".io");
  }
  if (meta.meta.contains("logSchemaRef"))
    out.node.log_schema_ref = meta.meta.at("logSchemaRef").get<std::string>();
  if (meta.meta.contains("policyRef"))
    out.node.policy_ref = meta.meta.at("policyRef").get<std::string>();

  if (kind == ir::NodeKind::Task) {
    if (state.contains("Resource")) {
      std::string resource = state.at("Resource").get<std::string>();
      if (resource.find(":activity:") != std::string::npos)
        throw UnsupportedConstruct("Activity ARN state '" + id + "'");
      if (resource != "alas:local:task/" + id) out.node.params["resource"] = resource;
    }
    if (state.contains("Parameters")) {
      for (const auto& [key, value] : state.at("Parameters").items()) {
        if (key == "__alas_idem_key") continue;
        out.node.params[key] = value;
      }
    }
  } else {
    out.node.params = meta.meta.value("params", Json::object());
  }

  // Policy content: tunneled wholesale for choice states, native otherwise.
  ir::Policy policy;
  bool present = false;
  if (meta.meta.contains("policy")) {
    policy = ir::policy_from_json(meta.meta.at("policy"), id + ".policy");
    present = true;
  } else {
    if (state.contains("TimeoutSeconds")) {
      policy.timeout = ir::Timeout{state.at("TimeoutSeconds").get<double>()};
      present = true;
    }
    if (state.contains("Retry") && state.at("Retry").is_array() &&
        !state.at("Retry").empty()) {
      const Json& entry = state.at("Retry")[0];
      ir::Retry retry;
      retry.max_attempts = entry.value("MaxAttempts", 0);
      retry.retry_on = classes_from_asl(entry.value("ErrorEquals", Json::array()));
      policy.retry = retry;
      ir::Backoff backoff;
      backoff.base = entry.value("IntervalSeconds", 0.0);
      backoff.mode = entry.value("BackoffRate", 2.0) == 1.0
                         ? ir::Backoff::Mode::Fixed
                         : ir::Backoff::Mode::Exponential;
      if (entry.contains("MaxDelaySeconds"))
        backoff.cap = entry.at("MaxDelaySeconds").get<double>();
      backoff.jitter = meta.meta.value("jitter", 0.0);
      policy.backoff = backoff;
      present = true;
    } else if (meta.meta.contains("retryNoClasses")) {
      policy.retry = ir::Retry{meta.meta.at("retryNoClasses").get<int>(), {}};
      present = true;
    }
    if (state.contains("Catch")) {
      for (const auto& entry : state.at("Catch")) {
        std::string target = entry.at("Next").get<std::string>();
        StateMeta target_meta;
        if (states.contains(target)) target_meta = read_meta(states.at(target));
        if (target_meta.synthetic_kind == "compensation-handler") {
          ir::Compensation comp;
          comp.handler = target;
          comp.trigger = target_meta.meta.value("trigger", "onFailure");
          comp.safe_reinvoke = target_meta.meta.value("safeReinvoke", false);
          policy.compensation = comp;
        } else {
          ir::CatchRule rule;
          rule.errors = classes_from_asl(entry.value("ErrorEquals", Json::array()));
          rule.handler = target;
          policy.catches.push_back(std::move(rule));
        }
        present = true;
      }
    }
    if (state.contains("Parameters") &&
        state.at("Parameters").contains("__alas_idem_key")) {
      ir::IdempotencyKey key;
      key.key_template =
          state.at("Parameters").at("__alas_idem_key").get<std::string>();
      key.scope = meta.meta.value("idemScope", "workflow");
      policy.idempotency_key = std::move(key);
      present = true;
    }
    if (meta.meta.contains("loopGuards")) {
      Json shell;
      shell["loopGuards"] = meta.meta.at("loopGuards");
      policy.loop_guards =
          ir::policy_from_json(shell, id + ".loopGuards").loop_guards;
      present = true;
    }
  }
  out.policy = std::move(policy);
  out.policy_present = present;
  return out;
}

}  // namespace detail2

ir::WorkflowIR ingest_asl(const std::string& text) {
  using namespace detail;
  using namespace detail2;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& ex) {
    throw SyntaxError(std::string("malformed ASL document: ") + ex.what());
  }
  if (!doc.is_object() || !doc.contains("States"))
    throw UnsupportedConstruct("document has no States object");

  ir::WorkflowIR ir;
  ir.name = "workflow";
  std::string default_policy;
  if (doc.contains("Comment") && doc.at("Comment").is_string()) {
    try {
      Json top = Json::parse(doc.at("Comment").get<std::string>());
      ir.name = top.value("workflow", std::string("workflow"));
      ir.meta = top.value("meta", Json::object());
      default_policy = top.value("defaultPolicy", std::string{});
      Json schema_map = top.value("schemas", Json::object());
      for (const auto& [name, schema] : schema_map.items())
        ir.schemas[name] = ir::io_schema_from_json(schema, "schemas." + name);
      Json log_schema_map = top.value("logSchemas", Json::object());
      for (const auto& [name, schema] : log_schema_map.items())
        ir.log_schemas[name] = schema;
    } catch (const Json::exception&) {
      // Not an emitted document; plain comments are fine.
    }
  }

  const Json& states = doc.at("States");

  auto register_policy = [&](const detail2::IngestedNode& ingested) {
    if (!ingested.policy_present && !ingested.node.policy_ref) return;
    std::string name = ingested.node.policy_ref
                           ? *ingested.node.policy_ref
                           : (default_policy.empty() ? "default" : default_policy);
    if (!ir.policies.count(name)) ir.policies[name] = ingested.policy;
  };

  for (const auto& [id, state] : states.items()) {
    StateMeta meta = read_meta(state);
    if (meta.synthetic) continue;
    std::string type = state.value("Type", std::string{});
    ir::NodeKind kind;
    if (type == "Task")
      kind = ir::NodeKind::Task;
    else if (type == "Choice")
      kind = ir::NodeKind::Choice;
    else if (type == "Parallel")
      kind = ir::NodeKind::Parallel;
    else if (type == "Map")
      kind = ir::NodeKind::Map;
    else
      throw UnsupportedConstruct("state type '" + type + "' is outside the subset");

    auto ingested = ingest_state_node(id, state, kind, states, ir.schemas);
    register_policy(ingested);
    ir.nodes.push_back(ingested.node);

    auto add_edge = [&](const std::string& from, const std::string& to,
                        ir::EdgeKind edge_kind, std::optional<std::string> g = {}) {
      ir::EdgeSpec edge;
      edge.from = from;
      edge.to = to;
      edge.kind = edge_kind;
      edge.guard = std::move(g);
      ir.edges.push_back(std::move(edge));
    };

    switch (kind) {
      case ir::NodeKind::Task: {
        if (state.contains("Next"))
          add_edge(id, state.at("Next").get<std::string>(), ir::EdgeKind::Sequence);
        break;
      }
      case ir::NodeKind::Choice: {
        for (const auto& rule : state.value("Choices", Json::array())) {
          Json condition = rule;
          condition.erase("Next");
          auto expr = guard::normalize(guard_from_condition(condition));
          add_edge(id, rule.at("Next").get<std::string>(), ir::EdgeKind::Branch,
                   guard::print(expr));
        }
        if (state.contains("Default"))
          add_edge(id, state.at("Default").get<std::string>(), ir::EdgeKind::Default);
        break;
      }
      case ir::NodeKind::Parallel: {
        std::vector<std::string> children;
        for (const auto& branch : state.value("Branches", Json::array())) {
          std::string child_id = branch.at("StartAt").get<std::string>();
          const Json& child_state = branch.at("States").at(child_id);
          auto child = ingest_state_node(child_id, child_state, ir::NodeKind::Task,
                                         states, ir.schemas);
          register_policy(child);
          ir.nodes.push_back(child.node);
          children.push_back(child_id);
        }
        for (const auto& child_id : children)
          add_edge(id, child_id, ir::EdgeKind::Sequence);
        if (state.contains("Next"))
          for (const auto& child_id : children)
            add_edge(child_id, state.at("Next").get<std::string>(),
                     ir::EdgeKind::Sequence);
        break;
      }
      case ir::NodeKind::Map: {
        const Json& iterator = state.at("Iterator");
        std::string body_id = iterator.at("StartAt").get<std::string>();
        const Json& body_state = iterator.at("States").at(body_id);
        auto body = ingest_state_node(body_id, body_state, ir::NodeKind::Task, states,
                                      ir.schemas);
        register_policy(body);
        ir.nodes.push_back(body.node);
        add_edge(id, body_id, ir::EdgeKind::Sequence);
        if (state.contains("Next"))
          add_edge(body_id, state.at("Next").get<std::string>(),
                   ir::EdgeKind::Sequence);
        break;
      }
    }
  }
  return ir;
}

Json core_projection(const ir::WorkflowIR& ir) {
  Json out;
  out["nodes"] = Json::array();
  for (const auto& node : ir.nodes)
    out["nodes"].push_back(Json{{"id", node.id}, {"kind", ir::to_string(node.kind)}});
  out["edges"] = Json::array();
  for (const auto& edge : ir.edges) {
    Json e;
    e["from"] = edge.from;
    e["to"] = edge.to;
    e["kind"] = ir::to_string(edge.kind);
    e["guard"] = edge.guard ? Json(detail::canonical_guard(*edge.guard)) : Json(nullptr);
    out["edges"].push_back(std::move(e));
  }
  out["policies"] = Json::array();
  for (const auto& node : ir.nodes) {
    Json p;
    p["id"] = node.id;
    p["policyRef"] = node.policy_ref ? Json(*node.policy_ref) : Json(nullptr);
    const ir::Policy* policy = nullptr;
    if (node.policy_ref)
      policy = &ir.policies.at(*node.policy_ref);
    else if (auto fallback = ir::default_policy_name(ir))
      policy = &ir.policies.at(*fallback);
    p["policy"] = policy ? ir::policy_to_json(*policy) : Json(nullptr);
    out["policies"].push_back(std::move(p));
  }
  return out;
}

namespace {

// Per-node policy field groups present anywhere in the workflow.
std::set<std::string> present_policy_features(const ir::WorkflowIR& ir) {
  std::set<std::string> present;
  for (const auto& node : ir.nodes) {
    const ir::Policy* policy = nullptr;
    if (node.policy_ref)
      policy = &ir.policies.at(*node.policy_ref);
    else if (auto fallback = ir::default_policy_name(ir))
      policy = &ir.policies.at(*fallback);
    if (!policy) continue;
    if (policy->retry) present.insert("retry");
    if (policy->backoff) present.insert("backoff");
    if (!policy->catches.empty()) present.insert("catch");
    if (policy->timeout) present.insert("timeout");
    if (policy->idempotency_key) present.insert("idempotencyKey");
    if (policy->compensation) present.insert("compensation");
    if (policy->loop_guards) present.insert("loopGuards");
  }
  return present;
}

Json policy_field(const Json& policy, const std::string& feature) {
  if (policy.is_null() || !policy.contains(feature)) return Json(nullptr);
  return policy.at(feature);
}

}  // namespace

ConversionReport roundtrip_check(const ir::WorkflowIR& ir, Target target) {
  ConversionReport report;
  report.target = target;

  std::string text = target == Target::asl ? emit_asl(ir) : emit_argo(ir);
  ir::WorkflowIR back = target == Target::asl ? ingest_asl(text) : ingest_argo(text);

  Json a = core_projection(ir);
  Json b = core_projection(back);

  bool all_ok = true;
  auto record = [&](const std::string& feature, bool ok) {
    if (ok)
      report.preserved.push_back(feature);
    else
      all_ok = false;
  };

  record("node-kinds", a["nodes"] == b["nodes"]);
  record("edge-order", a["edges"] == b["edges"]);

  auto features = present_policy_features(ir);
  for (const auto& feature : features) {
    bool ok = a["policies"].size() == b["policies"].size();
    for (size_t i = 0; ok && i < a["policies"].size(); ++i) {
      ok = a["policies"][i]["id"] == b["policies"][i]["id"] &&
           policy_field(a["policies"][i]["policy"], feature) ==
               policy_field(b["policies"][i]["policy"], feature);
    }
    record(feature, ok);
  }

  // Fallback carriers used, by target.
  bool has_default_edge = false;
  for (const auto& edge : ir.edges)
    if (edge.kind == ir::EdgeKind::Default) has_default_edge = true;
  if (target == Target::asl) {
    if (features.count("idempotencyKey"))
      report.lossy.push_back({"idempotencyKey", "state input field __alas_idem_key"});
    if (features.count("loopGuards"))
      report.lossy.push_back({"loopGuards", "state Comment metadata"});
    if (features.count("compensation"))
      report.lossy.push_back({"compensation", "handler task routed via Catch"});
  } else {
    if (features.count("idempotencyKey"))
      report.lossy.push_back(
          {"idempotencyKey", "template input parameter __alas_idem_key"});
    if (features.count("loopGuards"))
      report.lossy.push_back({"loopGuards", "template annotation"});
    if (features.count("catch"))
      report.lossy.push_back({"catch", "failure-dependency task plus annotation"});
    if (has_default_edge)
      report.lossy.push_back({"choice-default", "unconditioned dependency"});
  }

  report.parity_ok = all_ok;
  return report;
}

Json report_to_json(const ConversionReport& report) {
  Json out;
  out["target"] = to_string(report.target);
  out["preserved"] = report.preserved;
  out["lossy"] = Json::array();
  for (const auto& item : report.lossy)
    out["lossy"].push_back(
        Json{{"feature", item.feature}, {"fallbackUsed", item.fallback_used}});
  out["parityOk"] = report.parity_ok;
  return out;
}

}  // namespace alas::convert

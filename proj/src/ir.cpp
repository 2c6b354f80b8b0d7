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

#include "alas/ir.hpp"

#include <algorithm>
#include <functional>

#include "alas/guard.hpp"

namespace alas::ir {

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

const Json& require_field(const Json& obj, const std::string& path, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    schema_fail(path + "." + key, "required field missing");
  return obj.at(key);
}

std::string require_string(const Json& obj, const std::string& path, const char* key) {
  const Json& value = require_field(obj, path, key);
  if (!value.is_string()) schema_fail(path + "." + key, "expected a string");
  return value.get<std::string>();
}

void reject_unknown(const Json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) schema_fail(path + "." + key, "unknown field");
  }
}

std::map<std::string, std::string> parse_field_map(const Json& obj,
                                                   const std::string& path) {
  std::map<std::string, std::string> out;
  if (obj.is_null()) return out;
  if (!obj.is_object()) schema_fail(path, "expected an object of field -> type");
  for (const auto& [key, value] : obj.items()) {
    if (!value.is_string()) schema_fail(path + "." + key, "expected a type name");
    out[key] = value.get<std::string>();
  }
  return out;
}

IoSchema parse_io_schema_impl(const Json& obj, const std::string& path) {
  IoSchema io;
  if (!obj.is_object()) schema_fail(path, "expected an io schema object");
  io.input = parse_field_map(obj.value("input", Json::object()), path + ".input");
  io.output = parse_field_map(obj.value("output", Json::object()), path + ".output");
  io.error = parse_field_map(obj.value("error", Json::object()), path + ".error");
  return io;
}

Policy parse_policy_impl(const Json& obj, const std::string& path) {
  Policy policy;
  if (!obj.is_object()) schema_fail(path, "expected a policy object");
  reject_unknown(obj, path,
                 {"retry", "backoff", "catch", "timeout", "idempotencyKey",
                  "compensation", "loopGuards"});
  if (obj.contains("retry")) {
    const Json& r = obj.at("retry");
    reject_unknown(r, path + ".retry", {"maxAttempts", "retryOn"});
    Retry retry;
    const Json& max_attempts = require_field(r, path + ".retry", "maxAttempts");
    if (!max_attempts.is_number_integer() || max_attempts.get<int>() < 0)
      schema_fail(path + ".retry.maxAttempts", "expected a non-negative integer");
    retry.max_attempts = max_attempts.get<int>();
    if (r.contains("retryOn")) {
      for (const auto& item : r.at("retryOn")) {
        if (!item.is_string())
          schema_fail(path + ".retry.retryOn", "expected error-class names");
        retry.retry_on.push_back(item.get<std::string>());
      }
    }
    policy.retry = std::move(retry);
  }
  if (obj.contains("backoff")) {
    const Json& b = obj.at("backoff");
    reject_unknown(b, path + ".backoff", {"mode", "base", "cap", "jitter"});
    Backoff backoff;
    std::string mode = require_string(b, path + ".backoff", "mode");
    if (mode == "fixed")
      backoff.mode = Backoff::Mode::Fixed;
    else if (mode == "exponential")
      backoff.mode = Backoff::Mode::Exponential;
    else
      schema_fail(path + ".backoff.mode", "expected fixed or exponential");
    backoff.base = b.value("base", 0.0);
    if (backoff.base < 0) schema_fail(path + ".backoff.base", "must be >= 0");
    if (b.contains("cap")) {
      backoff.cap = b.at("cap").get<double>();
      if (*backoff.cap < backoff.base)
        schema_fail(path + ".backoff.cap", "must be >= base");
    }
    backoff.jitter = b.value("jitter", 0.0);
    if (backoff.jitter < 0.0 || backoff.jitter > 1.0)
      schema_fail(path + ".backoff.jitter", "must lie in [0, 1]");
    policy.backoff = backoff;
  }
  if (obj.contains("catch")) {
    const Json& list = obj.at("catch");
    if (!list.is_array()) schema_fail(path + ".catch", "expected an array");
    for (size_t i = 0; i < list.size(); ++i) {
      std::string cpath = path + ".catch[" + std::to_string(i) + "]";
      const Json& c = list[i];
      CatchRule rule;
      const Json& errors = require_field(c, cpath, "errors");
      if (!errors.is_array()) schema_fail(cpath + ".errors", "expected an array");
      for (const auto& e : errors) rule.errors.push_back(e.get<std::string>());
      rule.handler = require_string(c, cpath, "handler");
      policy.catches.push_back(std::move(rule));
    }
  }
  if (obj.contains("timeout")) {
    const Json& t = obj.at("timeout");
    Timeout timeout;
    const Json& seconds = require_field(t, path + ".timeout", "seconds");
    if (!seconds.is_number() || seconds.get<double>() < 0)
      schema_fail(path + ".timeout.seconds", "expected a non-negative duration");
    timeout.seconds = seconds.get<double>();
    policy.timeout = timeout;
  }
  if (obj.contains("idempotencyKey")) {
    const Json& k = obj.at("idempotencyKey");
    reject_unknown(k, path + ".idempotencyKey", {"path", "template", "scope"});
    IdempotencyKey key;
    if (k.contains("path")) key.path = k.at("path").get<std::string>();
    if (k.contains("template")) key.key_template = k.at("template").get<std::string>();
    if (!key.path && !key.key_template)
      schema_fail(path + ".idempotencyKey", "needs a path or a template");
    key.scope = k.value("scope", "workflow");
    if (key.scope != "workflow" && key.scope != "node" && key.scope != "resource")
      schema_fail(path + ".idempotencyKey.scope", "expected workflow|node|resource");
    policy.idempotency_key = std::move(key);
  }
  if (obj.contains("compensation")) {
    const Json& c = obj.at("compensation");
    Compensation comp;
    comp.handler = require_string(c, path + ".compensation", "handler");
    const Json& safe = require_field(c, path + ".compensation", "safeReinvoke");
    if (!safe.is_boolean())
      schema_fail(path + ".compensation.safeReinvoke", "expected a boolean");
    comp.safe_reinvoke = safe.get<bool>();
    comp.trigger = c.value("trigger", "onFailure");
    if (comp.trigger != "onFailure" && comp.trigger != "onCancel" &&
        comp.trigger != "manual")
      schema_fail(path + ".compensation.trigger", "expected onFailure|onCancel|manual");
    policy.compensation = std::move(comp);
  }
  if (obj.contains("loopGuards")) {
    const Json& g = obj.at("loopGuards");
    reject_unknown(g, path + ".loopGuards",
                   {"maxIters", "deadlineSeconds", "timeBudget"});
    LoopGuards guards;
    if (g.contains("maxIters")) {
      if (!g.at("maxIters").is_number_integer() || g.at("maxIters").get<int>() < 1)
        schema_fail(path + ".loopGuards.maxIters", "expected a positive count");
      guards.max_iters = g.at("maxIters").get<int>();
    }
    if (g.contains("deadlineSeconds"))
      guards.deadline_seconds = g.at("deadlineSeconds").get<double>();
    if (g.contains("timeBudget")) guards.time_budget = g.at("timeBudget").get<double>();
    policy.loop_guards = guards;
  }
  return policy;
}

Json field_map_to_json(const std::map<std::string, std::string>& fields) {
  Json out = Json::object();
  for (const auto& [key, value] : fields) out[key] = value;
  return out;
}

Json io_schema_to_json_impl(const IoSchema& io) {
  Json out;
  out["input"] = field_map_to_json(io.input);
  out["output"] = field_map_to_json(io.output);
  out["error"] = field_map_to_json(io.error);
  return out;
}

Json policy_to_json_impl(const Policy& policy) {
  Json out = Json::object();
  if (policy.retry) {
    Json r;
    r["maxAttempts"] = policy.retry->max_attempts;
    if (!policy.retry->retry_on.empty()) r["retryOn"] = policy.retry->retry_on;
    out["retry"] = std::move(r);
  }
  if (policy.backoff) {
    Json b;
    b["mode"] = policy.backoff->mode == Backoff::Mode::Fixed ? "fixed" : "exponential";
    b["base"] = policy.backoff->base;
    if (policy.backoff->cap) b["cap"] = *policy.backoff->cap;
    if (policy.backoff->jitter != 0.0) b["jitter"] = policy.backoff->jitter;
    out["backoff"] = std::move(b);
  }
  if (!policy.catches.empty()) {
    Json list = Json::array();
    for (const auto& rule : policy.catches) {
      Json c;
      c["errors"] = rule.errors;
      c["handler"] = rule.handler;
      list.push_back(std::move(c));
    }
    out["catch"] = std::move(list);
  }
  if (policy.timeout) out["timeout"] = Json{{"seconds", policy.timeout->seconds}};
  if (policy.idempotency_key) {
    Json k = Json::object();
    if (policy.idempotency_key->path) k["path"] = *policy.idempotency_key->path;
    if (policy.idempotency_key->key_template)
      k["template"] = *policy.idempotency_key->key_template;
    k["scope"] = policy.idempotency_key->scope;
    out["idempotencyKey"] = std::move(k);
  }
  if (policy.compensation) {
    Json c;
    c["handler"] = policy.compensation->handler;
    c["trigger"] = policy.compensation->trigger;
    c["safeReinvoke"] = policy.compensation->safe_reinvoke;
    out["compensation"] = std::move(c);
  }
  if (policy.loop_guards) {
    Json g = Json::object();
    if (policy.loop_guards->max_iters) g["maxIters"] = *policy.loop_guards->max_iters;
    if (policy.loop_guards->deadline_seconds)
      g["deadlineSeconds"] = *policy.loop_guards->deadline_seconds;
    if (policy.loop_guards->time_budget)
      g["timeBudget"] = *policy.loop_guards->time_budget;
    out["loopGuards"] = std::move(g);
  }
  return out;
}

bool truthy(const Json& value) {
  if (value.is_boolean()) return value.get<bool>();
  if (value.is_string()) return value.get<std::string>() == "true";
  return false;
}

// Expands an idempotency template against the canonical binding: nodeId is
// substituted, inputs and runId stay symbolic.
std::string expand_key(const std::string& tmpl, const std::string& node_id) {
  std::string out = tmpl;
  std::string marker = "{nodeId}";
  size_t pos;
  while ((pos = out.find(marker)) != std::string::npos)
    out.replace(pos, marker.size(), node_id);
  return out;
}

}  // namespace

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Task: return "task";
    case NodeKind::Choice: return "choice";
    case NodeKind::Parallel: return "parallel";
    case NodeKind::Map: return "map";
  }
  return "task";
}

std::string to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Sequence: return "sequence";
    case EdgeKind::Branch: return "branch";
    case EdgeKind::Default: return "default";
  }
  return "sequence";
}

std::string to_string(Repairable tag) {
  switch (tag) {
    case Repairable::Time: return "time";
    case Repairable::Order: return "order";
    case Repairable::Resource: return "resource";
    case Repairable::None: return "none";
  }
  return "none";
}

std::string to_string(EditKind kind) {
  switch (kind) {
    case EditKind::TimeShift: return "time-shift";
    case EditKind::OrderSwap: return "order-swap";
    case EditKind::ResourceReassign: return "resource-reassign";
  }
  return "time-shift";
}

const NodeSpec* WorkflowIR::find_node(const std::string& id) const {
  for (const auto& node : nodes)
    if (node.id == id) return &node;
  return nullptr;
}

WorkflowIR parse_ir(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& ex) {
    throw SyntaxError(std::string("malformed document: ") + ex.what());
  }
  if (!doc.is_object() || !doc.contains("Workflow"))
    schema_fail("Workflow", "required field missing");
  const Json& wf = doc.at("Workflow");
  for (const char* key : {"name", "nodes", "edges", "policies", "schemas",
                          "logSchemas", "meta"})
    require_field(wf, "Workflow", key);

  WorkflowIR ir;
  ir.name = require_string(wf, "Workflow", "name");

  const Json& schemas = wf.at("schemas");
  if (!schemas.is_object()) schema_fail("Workflow.schemas", "expected an object");
  for (const auto& [name, value] : schemas.items())
    ir.schemas[name] = parse_io_schema_impl(value, "Workflow.schemas." + name);

  const Json& policies = wf.at("policies");
  if (!policies.is_object()) schema_fail("Workflow.policies", "expected an object");
  for (const auto& [name, value] : policies.items())
    ir.policies[name] = parse_policy_impl(value, "Workflow.policies." + name);

  const Json& log_schemas = wf.at("logSchemas");
  if (!log_schemas.is_object()) schema_fail("Workflow.logSchemas", "expected an object");
  for (const auto& [name, value] : log_schemas.items()) ir.log_schemas[name] = value;

  if (!wf.at("meta").is_object()) schema_fail("Workflow.meta", "expected an object");
  ir.meta = wf.at("meta");

  const Json& nodes = wf.at("nodes");
  if (!nodes.is_array()) schema_fail("Workflow.nodes", "expected an array");
  for (size_t i = 0; i < nodes.size(); ++i) {
    std::string path = "Workflow.nodes[" + std::to_string(i) + "]";
    const Json& n = nodes[i];
    NodeSpec node;
    node.id = require_string(n, path, "id");
    std::string type = require_string(n, path, "type");
    if (type == "task")
      node.kind = NodeKind::Task;
    else if (type == "choice")
      node.kind = NodeKind::Choice;
    else if (type == "parallel")
      node.kind = NodeKind::Parallel;
    else if (type == "map")
      node.kind = NodeKind::Map;
    else
      schema_fail(path + ".type",
                  "'" + type + "' is not one of task|choice|parallel|map");
    node.name = require_string(n, path, "name");
    node.capabilities = n.value("capabilities", Json::object());
    node.params = n.value("params", Json::object());
    const Json& io = require_field(n, path, "io");
    if (io.is_string()) {
      node.io_ref = io.get<std::string>();
      auto it = ir.schemas.find(*node.io_ref);
      if (it == ir.schemas.end())
        schema_fail(path + ".io", "schema '" + *node.io_ref + "' is not declared");
      node.io = it->second;
    } else {
      node.io = parse_io_schema_impl(io, path + ".io");
    }
    if (n.contains("policyRef")) {
      node.policy_ref = n.at("policyRef").get<std::string>();
      if (!ir.policies.count(*node.policy_ref))
        schema_fail(path + ".policyRef",
                    "policy '" + *node.policy_ref + "' is not declared");
    }
    if (n.contains("logSchemaRef")) {
      node.log_schema_ref = n.at("logSchemaRef").get<std::string>();
      if (!ir.log_schemas.count(*node.log_schema_ref))
        schema_fail(path + ".logSchemaRef",
                    "log schema '" + *node.log_schema_ref + "' is not declared");
    }
    for (const auto& existing : ir.nodes)
      if (existing.id == node.id) schema_fail(path + ".id", "duplicate node id");
    ir.nodes.push_back(std::move(node));
  }

  const Json& edges = wf.at("edges");
  if (!edges.is_array()) schema_fail("Workflow.edges", "expected an array");
  for (size_t i = 0; i < edges.size(); ++i) {
    std::string path = "Workflow.edges[" + std::to_string(i) + "]";
    const Json& e = edges[i];
    EdgeSpec edge;
    edge.from = require_string(e, path, "from");
    edge.to = require_string(e, path, "to");
    if (!ir.find_node(edge.from))
      schema_fail(path + ".from", "no node named '" + edge.from + "'");
    if (!ir.find_node(edge.to))
      schema_fail(path + ".to", "no node named '" + edge.to + "'");
    std::string kind = require_string(e, path, "kind");
    if (kind == "sequence")
      edge.kind = EdgeKind::Sequence;
    else if (kind == "branch")
      edge.kind = EdgeKind::Branch;
    else if (kind == "default")
      edge.kind = EdgeKind::Default;
    else
      schema_fail(path + ".kind", "'" + kind + "' is not one of sequence|branch|default");
    if (e.contains("guard")) edge.guard = e.at("guard").get<std::string>();
    std::string repairable = e.value("repairable", "none");
    if (repairable == "time")
      edge.repairable = Repairable::Time;
    else if (repairable == "order")
      edge.repairable = Repairable::Order;
    else if (repairable == "resource")
      edge.repairable = Repairable::Resource;
    else if (repairable == "none")
      edge.repairable = Repairable::None;
    else
      schema_fail(path + ".repairable",
                  "'" + repairable + "' is not one of time|order|resource|none");
    ir.edges.push_back(std::move(edge));
  }
  return ir;
}

Json ir_to_json(const WorkflowIR& ir) {
  Json wf;
  wf["name"] = ir.name;
  wf["nodes"] = Json::array();
  for (const auto& node : ir.nodes) {
    Json n;
    n["id"] = node.id;
    n["type"] = to_string(node.kind);
    n["name"] = node.name;
    n["capabilities"] = node.capabilities;
    n["params"] = node.params;
    if (node.io_ref)
      n["io"] = *node.io_ref;
    else
      n["io"] = io_schema_to_json_impl(node.io);
    if (node.policy_ref) n["policyRef"] = *node.policy_ref;
    if (node.log_schema_ref) n["logSchemaRef"] = *node.log_schema_ref;
    wf["nodes"].push_back(std::move(n));
  }
  wf["edges"] = Json::array();
  for (const auto& edge : ir.edges) {
    Json e;
    e["from"] = edge.from;
    e["to"] = edge.to;
    e["kind"] = to_string(edge.kind);
    if (edge.guard) e["guard"] = *edge.guard;
    e["repairable"] = to_string(edge.repairable);
    wf["edges"].push_back(std::move(e));
  }
  wf["policies"] = Json::object();
  for (const auto& [name, policy] : ir.policies) wf["policies"][name] = policy_to_json_impl(policy);
  wf["schemas"] = Json::object();
  for (const auto& [name, schema] : ir.schemas) wf["schemas"][name] = io_schema_to_json_impl(schema);
  wf["logSchemas"] = Json::object();
  for (const auto& [name, schema] : ir.log_schemas) wf["logSchemas"][name] = schema;
  wf["meta"] = ir.meta;
  Json doc;
  doc["Workflow"] = std::move(wf);
  return doc;
}

std::string serialize_ir(const WorkflowIR& ir) { return ir_to_json(ir).dump(2); }

std::optional<std::string> default_policy_name(const WorkflowIR& ir) {
  if (ir.meta.contains("defaultPolicy") && ir.meta.at("defaultPolicy").is_string()) {
    std::string name = ir.meta.at("defaultPolicy").get<std::string>();
    if (ir.policies.count(name)) return name;
  }
  if (ir.policies.count("default")) return std::string("default");
  if (ir.policies.count("p_default")) return std::string("p_default");
  return std::nullopt;
}

const Policy& resolve_policy(const WorkflowIR& ir, const std::string& node_id) {
  const NodeSpec* node = ir.find_node(node_id);
  if (!node) throw MissingPolicy("no node named '" + node_id + "'");
  if (node->policy_ref) return ir.policies.at(*node->policy_ref);
  auto fallback = default_policy_name(ir);
  if (!fallback)
    throw MissingPolicy("node '" + node_id +
                        "' has no policyRef and the workflow declares no default");
  return ir.policies.at(*fallback);
}

namespace {

// Tarjan SCC over sequence edges; any nontrivial component (or self loop)
// without a map node violates rule 1.
struct SccState {
  std::map<std::string, int> index, low;
  std::map<std::string, bool> on_stack;
  std::vector<std::string> stack;
  int counter = 0;
  std::vector<std::vector<std::string>> components;
};

void strong_connect(const std::string& v,
                    const std::map<std::string, std::vector<std::string>>& adj,
                    SccState& st) {
  st.index[v] = st.low[v] = st.counter++;
  st.stack.push_back(v);
  st.on_stack[v] = true;
  auto it = adj.find(v);
  if (it != adj.end()) {
    for (const auto& w : it->second) {
      if (!st.index.count(w)) {
        strong_connect(w, adj, st);
        st.low[v] = std::min(st.low[v], st.low[w]);
      } else if (st.on_stack[w]) {
        st.low[v] = std::min(st.low[v], st.index[w]);
      }
    }
  }
  if (st.low[v] == st.index[v]) {
    std::vector<std::string> component;
    while (true) {
      std::string w = st.stack.back();
      st.stack.pop_back();
      st.on_stack[w] = false;
      component.push_back(w);
      if (w == v) break;
    }
    st.components.push_back(std::move(component));
  }
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<Diagnostic> check_well_formed(const WorkflowIR& ir) {
  std::vector<Diagnostic> diagnostics;

  // Rule 1: sequence-edge acyclicity outside map-bounded loops.
  std::map<std::string, std::vector<std::string>> adj;
  std::set<std::pair<std::string, std::string>> sequence_pairs;
  for (const auto& edge : ir.edges) {
    if (edge.kind != EdgeKind::Sequence) continue;
    adj[edge.from].push_back(edge.to);
    sequence_pairs.insert({edge.from, edge.to});
  }
  SccState st;
  for (const auto& node : ir.nodes)
    if (!st.index.count(node.id)) strong_connect(node.id, adj, st);
  for (const auto& component : st.components) {
    bool cyclic = component.size() > 1 ||
                  (component.size() == 1 &&
                   sequence_pairs.count({component[0], component[0]}));
    if (!cyclic) continue;
    bool map_bounded = false;
    for (const auto& id : component) {
      const NodeSpec* node = ir.find_node(id);
      if (node && node->kind == NodeKind::Map) map_bounded = true;
    }
    if (!map_bounded) {
      std::vector<std::string> sorted = component;
      std::sort(sorted.begin(), sorted.end());
      diagnostics.push_back({"wf.rule1", "edges",
                             "sequence edges form a cycle through " +
                                 join(sorted, ", ") + " with no bounding map node"});
    }
  }

  // Rule 2: branch guards present and type-correct.
  for (size_t i = 0; i < ir.edges.size(); ++i) {
    const auto& edge = ir.edges[i];
    std::string path = "edges[" + std::to_string(i) + "]";
    if (edge.kind == EdgeKind::Branch) {
      if (!edge.guard) {
        diagnostics.push_back({"wf.rule2", path, "branch edge has no guard"});
        continue;
      }
      try {
        auto expr = guard::parse(*edge.guard);
        const NodeSpec* from = ir.find_node(edge.from);
        auto error = guard::type_check(expr, from ? from->io.output
                                                  : std::map<std::string, std::string>{});
        if (error)
          diagnostics.push_back({"wf.rule2", path + ".guard", *error});
      } catch (const SyntaxError& ex) {
        diagnostics.push_back({"wf.rule2", path + ".guard", ex.what()});
      }
    } else if (edge.guard) {
      diagnostics.push_back(
          {"wf.rule2", path + ".guard", "guard on a non-branch edge"});
    }
  }

  // Rule 3: every node resolves to a policy.
  auto fallback = default_policy_name(ir);
  for (size_t i = 0; i < ir.nodes.size(); ++i) {
    if (!ir.nodes[i].policy_ref && !fallback)
      diagnostics.push_back({"wf.rule3", "nodes[" + std::to_string(i) + "]",
                             "node '" + ir.nodes[i].id +
                                 "' has no policyRef and no workflow default exists"});
  }

  // Rule 4: structural schema compatibility along every edge.
  for (size_t i = 0; i < ir.edges.size(); ++i) {
    const auto& edge = ir.edges[i];
    const NodeSpec* from = ir.find_node(edge.from);
    const NodeSpec* to = ir.find_node(edge.to);
    if (!from || !to) continue;
    for (const auto& [field, type] : to->io.input) {
      auto it = from->io.output.find(field);
      if (it == from->io.output.end()) {
        diagnostics.push_back({"wf.rule4", "edges[" + std::to_string(i) + "]",
                               "input field '" + field + "' of '" + to->id +
                                   "' is missing from the output of '" + from->id +
                                   "'"});
      } else if (it->second != type) {
        diagnostics.push_back({"wf.rule4", "edges[" + std::to_string(i) + "]",
                               "field '" + field + "' has type '" + it->second +
                                   "' upstream but '" + type + "' downstream"});
      }
    }
  }

  // Rule 5: compensation needs declared idempotence or a key.
  for (size_t i = 0; i < ir.nodes.size(); ++i) {
    const auto& node = ir.nodes[i];
    const Policy* policy = nullptr;
    if (node.policy_ref)
      policy = &ir.policies.at(*node.policy_ref);
    else if (fallback)
      policy = &ir.policies.at(*fallback);
    if (!policy || !policy->compensation) continue;
    bool declared_idempotent =
        node.capabilities.contains("idempotent") && truthy(node.capabilities["idempotent"]);
    if (!declared_idempotent && !policy->idempotency_key)
      diagnostics.push_back({"wf.rule5", "nodes[" + std::to_string(i) + "]",
                             "node '" + node.id +
                                 "' defines compensation without declared idempotent "
                                 "effects or an idempotencyKey"});
  }
  return diagnostics;
}

std::vector<Diagnostic> check_policies(const WorkflowIR& ir) {
  std::vector<Diagnostic> diagnostics;
  auto fallback = default_policy_name(ir);

  // Check 1: policyRef or workflow default.
  for (size_t i = 0; i < ir.nodes.size(); ++i) {
    if (!ir.nodes[i].policy_ref && !fallback)
      diagnostics.push_back({"policy.check1", "nodes[" + std::to_string(i) + "]",
                             "node '" + ir.nodes[i].id +
                                 "' has no policyRef and no default policy applies"});
  }

  // Check 2: retry implies a backoff schedule.
  for (const auto& [name, policy] : ir.policies) {
    if (policy.retry && !policy.backoff)
      diagnostics.push_back({"policy.check2", "policies." + name,
                             "retry is declared without a backoff schedule"});
  }

  auto resolved = [&](const NodeSpec& node) -> const Policy* {
    if (node.policy_ref) return &ir.policies.at(*node.policy_ref);
    if (fallback) return &ir.policies.at(*fallback);
    return nullptr;
  };

  // Check 3: finite timeout on external-tool task nodes.
  for (size_t i = 0; i < ir.nodes.size(); ++i) {
    const auto& node = ir.nodes[i];
    bool external = node.capabilities.contains("external") &&
                    truthy(node.capabilities["external"]);
    if (node.kind != NodeKind::Task || !external) continue;
    const Policy* policy = resolved(node);
    if (policy && !policy->timeout)
      diagnostics.push_back({"policy.check3", "nodes[" + std::to_string(i) + "]",
                             "external-tool task '" + node.id +
                                 "' has no finite timeout"});
  }

  // Check 4: compensation implies idempotence (declared) or a key.
  for (size_t i = 0; i < ir.nodes.size(); ++i) {
    const auto& node = ir.nodes[i];
    const Policy* policy = resolved(node);
    if (!policy || !policy->compensation) continue;
    bool declared_idempotent =
        node.capabilities.contains("idempotent") && truthy(node.capabilities["idempotent"]);
    if (!declared_idempotent && !policy->idempotency_key)
      diagnostics.push_back({"policy.check4", "nodes[" + std::to_string(i) + "]",
                             "compensation on '" + node.id +
                                 "' lacks an idempotencyKey and no idempotent effect "
                                 "is declared"});
  }

  // Check 5: finite loop guards on iterative constructs.
  for (size_t i = 0; i < ir.nodes.size(); ++i) {
    const auto& node = ir.nodes[i];
    if (node.kind != NodeKind::Map) continue;
    const Policy* policy = resolved(node);
    if (!policy) continue;
    bool bounded = policy->loop_guards &&
                   (policy->loop_guards->max_iters || policy->loop_guards->time_budget ||
                    policy->loop_guards->deadline_seconds);
    if (!bounded)
      diagnostics.push_back({"policy.check5", "nodes[" + std::to_string(i) + "]",
                             "map node '" + node.id +
                                 "' has no finite loop guard (maxIters or time budget)"});
  }

  // Check 6: idempotency keys unique per logical action.
  std::map<std::string, std::string> expansions;  // expanded key -> node id
  for (const auto& node : ir.nodes) {
    const Policy* policy = resolved(node);
    if (!policy || !policy->idempotency_key) continue;
    const auto& key = *policy->idempotency_key;
    std::string tmpl = key.key_template ? *key.key_template
                                        : (key.path ? *key.path : std::string{});
    if (tmpl.empty()) continue;
    std::string expanded = expand_key(tmpl, node.id);
    auto [it, inserted] = expansions.try_emplace(expanded, node.id);
    if (!inserted && it->second != node.id)
      diagnostics.push_back({"policy.check6", "nodes",
                             "idempotency key '" + expanded + "' collides between '" +
                                 it->second + "' and '" + node.id + "'"});
  }
  return diagnostics;
}

std::vector<Diagnostic> check_repair_coverage(
    const WorkflowIR& ir, const std::vector<RepairSpec>& specs,
    const std::vector<std::string>& disruption_classes) {
  std::vector<Diagnostic> diagnostics;

  auto canonical_class = [](std::string name) -> std::string {
    for (auto& c : name)
      if (c == '_') c = '-';
    if (name == "machineBreakdown" || name == "machine-breakdown")
      return "machine-breakdown";
    if (name == "durationShock" || name == "duration-shock") return "duration-shock";
    if (name == "resourceSwap" || name == "resource-swap" ||
        name == "resource-reassign")
      return "resource-swap";
    return name;
  };
  auto edits_for_class = [](const std::string& cls) -> std::set<EditKind> {
    if (cls == "machine-breakdown")
      return {EditKind::TimeShift, EditKind::OrderSwap, EditKind::ResourceReassign};
    if (cls == "duration-shock") return {EditKind::TimeShift, EditKind::OrderSwap};
    if (cls == "resource-swap") return {EditKind::ResourceReassign};
    return {};
  };

  // Per-spec structural checks; unusable specs do not count toward coverage.
  std::vector<const RepairSpec*> usable;
  for (size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    std::string path = "repairSpecs[" + std::to_string(i) + "]";
    bool ok = true;

    auto arrow = spec.target.find("->");
    if (arrow != std::string::npos) {
      std::string from = spec.target.substr(0, arrow);
      std::string to = spec.target.substr(arrow + 2);
      const EdgeSpec* found = nullptr;
      for (const auto& edge : ir.edges)
        if (edge.from == from && edge.to == to) found = &edge;
      if (!found) {
        diagnostics.push_back({"repair.target", path,
                               "no edge '" + spec.target + "' in the workflow"});
        ok = false;
      } else {
        std::set<EditKind> permitted;
        switch (found->repairable) {
          case Repairable::Time: permitted = {EditKind::TimeShift}; break;
          case Repairable::Order: permitted = {EditKind::OrderSwap}; break;
          case Repairable::Resource: permitted = {EditKind::ResourceReassign}; break;
          case Repairable::None: permitted = {}; break;
        }
        for (EditKind edit : spec.allowed_edits) {
          if (!permitted.count(edit)) {
            diagnostics.push_back({"repair.edits", path,
                                   "edit '" + to_string(edit) +
                                       "' is not permitted by the edge's repairable "
                                       "tag '" +
                                       to_string(found->repairable) + "'"});
            ok = false;
          }
        }
      }
    } else if (!ir.find_node(spec.target)) {
      diagnostics.push_back(
          {"repair.target", path, "no node named '" + spec.target + "'"});
      ok = false;
    }

    if (!spec.bounds.max_shift || !spec.bounds.max_neighborhood) {
      diagnostics.push_back({"repair.bounds", path,
                             "repair spec bounds are not finite (maxShift and "
                             "maxNeighborhood are both required)"});
      ok = false;
    }
    if (ok) usable.push_back(&spec);
  }

  for (const auto& raw : disruption_classes) {
    std::string cls = canonical_class(raw);
    auto needed = edits_for_class(cls);
    if (needed.empty()) {
      diagnostics.push_back({"repair.uncovered", "disruptions",
                             "unknown disruption class '" + raw + "'"});
      continue;
    }
    bool covered = false;
    for (const RepairSpec* spec : usable)
      for (EditKind edit : spec->allowed_edits)
        if (needed.count(edit)) covered = true;
    if (!covered)
      diagnostics.push_back({"repair.uncovered", "disruptions",
                             "no repair spec addresses disruption class '" + raw +
                                 "'"});
  }
  return diagnostics;
}

Json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics) {
  Json out = Json::array();
  for (const auto& d : diagnostics) {
    Json item;
    item["ruleId"] = d.rule_id;
    item["path"] = d.path;
    item["message"] = d.message;
    out.push_back(std::move(item));
  }
  return out;
}

Json policy_to_json(const Policy& policy) { return policy_to_json_impl(policy); }

Policy policy_from_json(const Json& doc, const std::string& path) {
  return parse_policy_impl(doc, path);
}

Json io_schema_to_json(const IoSchema& io) { return io_schema_to_json_impl(io); }

IoSchema io_schema_from_json(const Json& doc, const std::string& path) {
  return parse_io_schema_impl(doc, path);
}

}  // namespace alas::ir

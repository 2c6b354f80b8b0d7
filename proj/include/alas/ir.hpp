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
// Canonical workflow IR: parsing, re-serialization, well-formedness rules,
// policy-set checks, and repair-coverage checks. All operations are pure
// functions over immutable values.

#ifndef ALAS_IR_HPP_
#define ALAS_IR_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "alas/error.hpp"
#include "alas/json.hpp"

namespace alas::ir {

enum class NodeKind { Task, Choice, Parallel, Map };
enum class EdgeKind { Sequence, Branch, Default };
enum class Repairable { Time, Order, Resource, None };

std::string to_string(NodeKind kind);
std::string to_string(EdgeKind kind);
std::string to_string(Repairable tag);

struct IoSchema {
  std::map<std::string, std::string> input;   // field -> semantic type
  std::map<std::string, std::string> output;
  std::map<std::string, std::string> error;

  bool operator==(const IoSchema&) const = default;
};

struct Retry {
  int max_attempts = 0;
  std::vector<std::string> retry_on;

  bool operator==(const Retry&) const = default;
};

struct Backoff {
  enum class Mode { Fixed, Exponential };
  Mode mode = Mode::Fixed;
  double base = 0.0;
  std::optional<double> cap;
  double jitter = 0.0;

  bool operator==(const Backoff&) const = default;
};

struct CatchRule {
  std::vector<std::string> errors;  // error-class names; "*" matches all
  std::string handler;

  bool operator==(const CatchRule&) const = default;
};

struct Timeout {
  double seconds = 0.0;

  bool operator==(const Timeout&) const = default;
};

struct IdempotencyKey {
  std::optional<std::string> path;
  std::optional<std::string> key_template;
  std::string scope = "workflow";  // workflow | node | resource

  bool operator==(const IdempotencyKey&) const = default;
};

struct Compensation {
  std::string handler;
  std::string trigger = "onFailure";  // onFailure | onCancel | manual
  bool safe_reinvoke = false;

  bool operator==(const Compensation&) const = default;
};

struct LoopGuards {
  std::optional<int> max_iters;
  std::optional<double> deadline_seconds;
  std::optional<double> time_budget;

  bool operator==(const LoopGuards&) const = default;
};

struct Policy {
  std::optional<Retry> retry;
  std::optional<Backoff> backoff;
  std::vector<CatchRule> catches;
  std::optional<Timeout> timeout;
  std::optional<IdempotencyKey> idempotency_key;
  std::optional<Compensation> compensation;
  std::optional<LoopGuards> loop_guards;

  bool operator==(const Policy&) const = default;
};

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::Task;
  std::string name;
  Json capabilities = Json::object();
  Json params = Json::object();
  std::optional<std::string> io_ref;  // set when the document referenced a schema by name
  IoSchema io;
  std::optional<std::string> policy_ref;
  std::optional<std::string> log_schema_ref;

  bool operator==(const NodeSpec&) const = default;
};

struct EdgeSpec {
  std::string from;
  std::string to;
  EdgeKind kind = EdgeKind::Sequence;
  std::optional<std::string> guard;
  Repairable repairable = Repairable::None;

  bool operator==(const EdgeSpec&) const = default;
};

struct WorkflowIR {
  std::string name;
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  std::map<std::string, Policy> policies;
  std::map<std::string, IoSchema> schemas;
  std::map<std::string, Json> log_schemas;
  Json meta = Json::object();

  const NodeSpec* find_node(const std::string& id) const;

  bool operator==(const WorkflowIR&) const = default;
};

struct Diagnostic {
  std::string rule_id;
  std::string path;
  std::string message;
};

enum class EditKind { TimeShift, OrderSwap, ResourceReassign };

std::string to_string(EditKind kind);

struct RepairBounds {
  std::optional<std::int64_t> max_shift;
  std::optional<int> max_neighborhood;
};

struct RepairSpec {
  std::string target;  // node id, or "from->to" for an edge
  std::set<EditKind> allowed_edits;
  RepairBounds bounds;
};

// --- operations ---

// Parses the JSON wire document ({"Workflow": {...}}). SyntaxError on
// malformed text, SchemaError naming the offending path otherwise. Unknown
// keys inside `meta` are preserved verbatim.
WorkflowIR parse_ir(const std::string& text);

Json ir_to_json(const WorkflowIR& ir);
std::string serialize_ir(const WorkflowIR& ir);

// Well-formedness rules, one Diagnostic per violation:
//   wf.rule1  sequence edges form a DAG outside map-bounded loops
//   wf.rule2  every branch edge carries a guard that type checks
//   wf.rule3  every node resolves to a policy (own ref or workflow default)
//   wf.rule4  output schema of u is compatible with input schema of v
//   wf.rule5  compensation implies declared idempotent effects or a key
std::vector<Diagnostic> check_well_formed(const WorkflowIR& ir);

// Policy-set checks, one Diagnostic per violation:
//   policy.check1  policyRef present or workflow default exists
//   policy.check2  retry implies backoff with finite maxAttempts
//   policy.check3  finite timeout on external-tool task nodes
//   policy.check4  compensation implies idempotency key or declared idempotence
//   policy.check5  finite loop guards on iterative constructs
//   policy.check6  idempotency keys unique per logical action
std::vector<Diagnostic> check_policies(const WorkflowIR& ir);

// The node's policy, or the workflow default. The default policy is named by
// meta.defaultPolicy, or failing that a policy literally named "default" or
// "p_default". Throws MissingPolicy when neither exists.
const Policy& resolve_policy(const WorkflowIR& ir, const std::string& node_id);
std::optional<std::string> default_policy_name(const WorkflowIR& ir);

// Repair coverage: every disruption class needs at least one spec whose
// allowed edits can address it, with finite bounds.
std::vector<Diagnostic> check_repair_coverage(
    const WorkflowIR& ir, const std::vector<RepairSpec>& specs,
    const std::vector<std::string>& disruption_classes);

Json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics);

// Wire helpers shared with the engine converters and the runtime policy
// loader; field names follow the document format exactly.
Json policy_to_json(const Policy& policy);
Policy policy_from_json(const Json& doc, const std::string& path);
Json io_schema_to_json(const IoSchema& io);
IoSchema io_schema_from_json(const Json& doc, const std::string& path);

}  // namespace alas::ir

#endif  // ALAS_IR_HPP_

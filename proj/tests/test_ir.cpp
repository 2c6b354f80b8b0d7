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
#include <random>

#include "alas/guard.hpp"
#include "alas/ir.hpp"
#include "doctest.h"
#include "support/ir_fixtures.hpp"

using namespace alas;
using namespace alas::ir;
namespace ts = alas::testsupport;

namespace {

bool has_rule(const std::vector<Diagnostic>& diagnostics, const std::string& rule) {
  for (const auto& d : diagnostics)
    if (d.rule_id == rule) return true;
  return false;
}

}  // namespace

TEST_CASE("parse_ir accepts the minimal document") {
  auto ir = parse_ir(ts::kMinimalIr);
  CHECK(ir.name == "minimal");
  CHECK(ir.nodes.size() == 1);
  CHECK(ir.edges.empty());
  CHECK(ir.policies.count("p0") == 1);
}

TEST_CASE("parse_ir reads the plan/repair fixture") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  CHECK(ir.nodes.size() == 2);
  REQUIRE(ir.policies.count("p_default") == 1);
  const auto& policy = ir.policies.at("p_default");
  REQUIRE(policy.retry.has_value());
  CHECK(policy.retry->max_attempts == 3);
  REQUIRE(policy.backoff.has_value());
  CHECK(policy.backoff->mode == Backoff::Mode::Exponential);
  CHECK(policy.backoff->base == doctest::Approx(0.5));
  CHECK(policy.backoff->cap == doctest::Approx(8.0));
  REQUIRE(policy.timeout.has_value());
  CHECK(policy.timeout->seconds == doctest::Approx(30.0));
  REQUIRE(policy.compensation.has_value());
  CHECK(policy.compensation->safe_reinvoke);
  REQUIRE(policy.loop_guards.has_value());
  CHECK(policy.loop_guards->max_iters == 5);
}

TEST_CASE("parse_ir rejects an out-of-enum node kind") {
  std::string doc = ts::kMinimalIr;
  doc.replace(doc.find("\"task\""), 6, "\"loop\"");
  try {
    parse_ir(doc);
    FAIL("expected SchemaError");
  } catch (const SchemaError& ex) {
    std::string what = ex.what();
    CHECK(what.find("nodes[0].type") != std::string::npos);
    CHECK(what.find("task|choice|parallel|map") != std::string::npos);
  }
}

TEST_CASE("parse_ir names paths for broken references") {
  std::string doc = ts::kPlanRepairIr;
  doc.replace(doc.find("\"policyRef\": \"p_default\""), 24,
              "\"policyRef\": \"missing\"");
  CHECK_THROWS_AS(parse_ir(doc), SchemaError);

  CHECK_THROWS_AS(parse_ir("{not json"), SyntaxError);
  CHECK_THROWS_AS(parse_ir("{}"), SchemaError);
}

TEST_CASE("parse/serialize round trip is idempotent") {
  for (const char* text : {ts::kMinimalIr, ts::kPlanRepairIr}) {
    auto first = parse_ir(text);
    auto second = parse_ir(serialize_ir(first));
    CHECK(first == second);
    // Serialization itself is deterministic.
    CHECK(serialize_ir(first) == serialize_ir(second));
  }
}

TEST_CASE("parse_ir preserves unknown meta fields verbatim") {
  std::string doc = ts::kMinimalIr;
  doc.replace(doc.find("\"meta\": {}"), 10,
              "\"meta\": {\"x-custom\": {\"deep\": [1, 2, 3]}}");
  auto ir = parse_ir(doc);
  CHECK(ir.meta["x-custom"]["deep"][1] == 2);
  auto round = parse_ir(serialize_ir(ir));
  CHECK(round.meta == ir.meta);
}

TEST_CASE("check_well_formed is empty on the plan/repair fixture") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  auto diagnostics = check_well_formed(ir);
  CHECK(diagnostics.empty());
}

TEST_CASE("rule 1 flags a two-node sequence cycle") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  ir.edges.push_back({"repair_local", "validate_plan", EdgeKind::Sequence,
                      std::nullopt, Repairable::None});
  auto diagnostics = check_well_formed(ir);
  REQUIRE(has_rule(diagnostics, "wf.rule1"));
  for (const auto& d : diagnostics)
    if (d.rule_id == "wf.rule1") {
      CHECK(d.message.find("repair_local") != std::string::npos);
      CHECK(d.message.find("validate_plan") != std::string::npos);
    }
}

TEST_CASE("rule 1 permits a map-bounded loop") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  NodeSpec map_node;
  map_node.id = "iterate";
  map_node.kind = NodeKind::Map;
  map_node.name = "Iterate";
  map_node.io = ir.nodes[0].io;
  map_node.policy_ref = "p_default";
  ir.nodes.push_back(map_node);
  ir.edges.push_back({"repair_local", "iterate", EdgeKind::Sequence, std::nullopt,
                      Repairable::None});
  ir.edges.push_back({"iterate", "validate_plan", EdgeKind::Sequence, std::nullopt,
                      Repairable::None});
  CHECK(!has_rule(check_well_formed(ir), "wf.rule1"));
}

TEST_CASE("rule 2 covers missing, malformed, and ill-typed guards") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  ir.edges[0].kind = EdgeKind::Branch;  // no guard
  CHECK(has_rule(check_well_formed(ir), "wf.rule2"));

  ir.edges[0].guard = "plan == 'ok'";  // plan: string, fine
  CHECK(!has_rule(check_well_formed(ir), "wf.rule2"));

  ir.edges[0].guard = "plan > 3";  // string compared to a number
  CHECK(has_rule(check_well_formed(ir), "wf.rule2"));

  ir.edges[0].guard = "plan == ";  // malformed
  CHECK(has_rule(check_well_formed(ir), "wf.rule2"));

  ir.edges[0].kind = EdgeKind::Sequence;  // guard on a non-branch edge
  ir.edges[0].guard = "plan == 'ok'";
  CHECK(has_rule(check_well_formed(ir), "wf.rule2"));
}

TEST_CASE("rule 3 requires a policy or a workflow default") {
  auto ir = parse_ir(ts::kMinimalIr);  // node without policyRef, no default
  CHECK(has_rule(check_well_formed(ir), "wf.rule3"));

  ir.meta["defaultPolicy"] = "p0";
  CHECK(!has_rule(check_well_formed(ir), "wf.rule3"));
}

TEST_CASE("rule 4 flags incompatible schemas") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  ir.nodes[1].io.input["budget"] = "number";  // upstream lacks the field
  auto diagnostics = check_well_formed(ir);
  REQUIRE(has_rule(diagnostics, "wf.rule4"));

  ir.nodes[1].io.input.erase("budget");
  ir.nodes[1].io.input["plan"] = "number";  // type clash
  CHECK(has_rule(check_well_formed(ir), "wf.rule4"));
}

TEST_CASE("rule 5 ties compensation to idempotence") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  ir.policies.at("p_default").idempotency_key.reset();
  CHECK(has_rule(check_well_formed(ir), "wf.rule5"));

  ir.nodes[0].capabilities["idempotent"] = true;
  ir.nodes[1].capabilities["idempotent"] = true;
  CHECK(!has_rule(check_well_formed(ir), "wf.rule5"));
}

TEST_CASE("check_policies passes the default policy fixture") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  CHECK(check_policies(ir).empty());
}

TEST_CASE("check 2: retry without backoff") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  ir.policies.at("p_default").backoff.reset();
  CHECK(has_rule(check_policies(ir), "policy.check2"));
}

TEST_CASE("check 3: external tool task needs a timeout") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  ir.nodes[0].capabilities["external"] = true;
  CHECK(!has_rule(check_policies(ir), "policy.check3"));  // timeout present
  ir.policies.at("p_default").timeout.reset();
  CHECK(has_rule(check_policies(ir), "policy.check3"));
}

TEST_CASE("check 5: map node needs finite loop guards") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  ir.nodes[0].kind = NodeKind::Map;
  CHECK(!has_rule(check_policies(ir), "policy.check5"));
  ir.policies.at("p_default").loop_guards->max_iters.reset();
  ir.policies.at("p_default").loop_guards->time_budget.reset();
  ir.policies.at("p_default").loop_guards->deadline_seconds.reset();
  CHECK(has_rule(check_policies(ir), "policy.check5"));
}

TEST_CASE("check 6: idempotency key collisions across distinct nodes") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  ir.policies.at("p_default").idempotency_key->key_template = "shared-literal";
  auto diagnostics = check_policies(ir);
  REQUIRE(has_rule(diagnostics, "policy.check6"));
  for (const auto& d : diagnostics)
    if (d.rule_id == "policy.check6") {
      CHECK(d.message.find("validate_plan") != std::string::npos);
      CHECK(d.message.find("repair_local") != std::string::npos);
    }
}

TEST_CASE("resolve_policy follows ref, default, then fails") {
  auto ir = parse_ir(ts::kPlanRepairIr);
  CHECK(resolve_policy(ir, "validate_plan").retry->max_attempts == 3);

  ir.nodes[0].policy_ref.reset();
  CHECK(resolve_policy(ir, "validate_plan").retry->max_attempts == 3);  // default

  auto bare = parse_ir(ts::kMinimalIr);
  CHECK_THROWS_AS(resolve_policy(bare, "solo"), MissingPolicy);
  CHECK_THROWS_AS(resolve_policy(bare, "ghost"), MissingPolicy);
}

TEST_CASE("repair coverage over disruption classes") {
  auto ir = parse_ir(ts::kPlanRepairIr);

  RepairSpec shift;
  shift.target = "validate_plan->repair_local";
  shift.allowed_edits = {EditKind::TimeShift};
  shift.bounds.max_shift = 100;
  shift.bounds.max_neighborhood = 8;

  CHECK(check_repair_coverage(ir, {shift}, {"machine-breakdown"}).empty());

  auto uncovered = check_repair_coverage(ir, {shift}, {"resource-swap"});
  REQUIRE(!uncovered.empty());
  CHECK(has_rule(uncovered, "repair.uncovered"));

  RepairSpec unbounded = shift;
  unbounded.bounds.max_neighborhood.reset();
  CHECK(has_rule(check_repair_coverage(ir, {unbounded}, {"machine-breakdown"}),
                 "repair.bounds"));

  // Edits must be consistent with the edge's repairable tag.
  RepairSpec wrong = shift;
  wrong.allowed_edits = {EditKind::ResourceReassign};
  CHECK(has_rule(check_repair_coverage(ir, {wrong}, {"machine-breakdown"}),
                 "repair.edits"));
}

TEST_CASE("guard parser round trips a canonical form") {
  auto expr = guard::parse("(x > 0 && y <= 5) || !(name == 'done')");
  auto printed = guard::print(expr);
  auto reparsed = guard::parse(printed);
  CHECK(guard::print(reparsed) == printed);
}

// Every diagnostic carries a concrete rule id and a concrete path, over a
// population of randomly mutated workflows.
TEST_CASE("diagnostics always name a rule and a path") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 120; ++trial) {
    auto ir = parse_ir(ts::kPlanRepairIr);
    switch (rng() % 8) {
      case 0:
        ir.edges.push_back({"repair_local", "validate_plan", EdgeKind::Sequence,
                            std::nullopt, Repairable::None});
        break;
      case 1:
        ir.edges[0].kind = EdgeKind::Branch;
        break;
      case 2:
        ir.nodes[rng() % 2].policy_ref.reset();
        ir.meta.erase("defaultPolicy");
        ir.policies.erase("p_default");
        ir.policies["other"] = Policy{};
        for (auto& node : ir.nodes) node.policy_ref.reset();
        break;
      case 3:
        ir.nodes[1].io.input["extra"] = "number";
        break;
      case 4:
        ir.policies.at("p_default").idempotency_key.reset();
        break;
      case 5:
        ir.policies.at("p_default").backoff.reset();
        break;
      case 6:
        ir.nodes[rng() % 2].kind = NodeKind::Map;
        ir.policies.at("p_default").loop_guards.reset();
        break;
      case 7:
        ir.edges[0].guard = "plan > 12";
        ir.edges[0].kind = EdgeKind::Branch;
        break;
    }
    auto all = check_well_formed(ir);
    auto policies = check_policies(ir);
    all.insert(all.end(), policies.begin(), policies.end());
    for (const auto& d : all) {
      CHECK(!d.rule_id.empty());
      CHECK(!d.path.empty());
      CHECK(!d.message.empty());
    }
  }
}

TEST_CASE("diagnostics serialize as ruleId/path/message") {
  auto ir = parse_ir(ts::kMinimalIr);
  auto doc = diagnostics_to_json(check_well_formed(ir));
  REQUIRE(doc.is_array());
  REQUIRE(!doc.empty());
  CHECK(doc[0].contains("ruleId"));
  CHECK(doc[0].contains("path"));
  CHECK(doc[0].contains("message"));
}

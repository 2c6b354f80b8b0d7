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
// Internal helpers shared by the ASL and Argo converters.

#ifndef ALAS_SRC_CONVERT_DETAIL_HPP_
#define ALAS_SRC_CONVERT_DETAIL_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "alas/convert.hpp"
#include "alas/guard.hpp"
#include "alas/ir.hpp"

namespace alas::convert::detail {

struct NodeLinks {
  std::vector<const ir::EdgeSpec*> sequence_out;
  std::vector<const ir::EdgeSpec*> branch_out;
  const ir::EdgeSpec* default_out = nullptr;
  int incoming = 0;
};

inline std::map<std::string, NodeLinks> build_links(const ir::WorkflowIR& ir) {
  std::map<std::string, NodeLinks> links;
  for (const auto& node : ir.nodes) links[node.id];
  for (const auto& edge : ir.edges) {
    auto& from = links[edge.from];
    switch (edge.kind) {
      case ir::EdgeKind::Sequence: from.sequence_out.push_back(&edge); break;
      case ir::EdgeKind::Branch: from.branch_out.push_back(&edge); break;
      case ir::EdgeKind::Default: from.default_out = &edge; break;
    }
    links[edge.to].incoming++;
  }
  return links;
}

// Fan-out structure of a parallel or map node: nested children and the
// optional join every child converges on. Children must be single nodes in
// the conformance core.
struct FanOut {
  std::vector<std::string> children;
  std::string join;  // empty when the branches terminate
};

inline FanOut resolve_fanout(const ir::WorkflowIR& ir, const ir::NodeSpec& node,
                             const std::map<std::string, NodeLinks>& links) {
  FanOut fan;
  const auto& out = links.at(node.id).sequence_out;
  if (out.empty())
    throw UnsupportedFeature("node '" + node.id + "' of kind " +
                             ir::to_string(node.kind) + " has no children");
  if (node.kind == ir::NodeKind::Map && out.size() != 1)
    throw UnsupportedFeature("map node '" + node.id + "' needs exactly one body");
  std::set<std::string> joins;
  for (const auto* edge : out) {
    fan.children.push_back(edge->to);
    const auto& child_links = links.at(edge->to);
    if (!child_links.branch_out.empty() || child_links.default_out)
      throw UnsupportedFeature("child '" + edge->to +
                               "' of a fan-out node carries branch edges");
    if (child_links.sequence_out.size() > 1)
      throw UnsupportedFeature("child '" + edge->to + "' fans out further");
    if (child_links.sequence_out.size() == 1)
      joins.insert(child_links.sequence_out[0]->to);
  }
  if (joins.size() > 1)
    throw UnsupportedFeature("children of '" + node.id +
                             "' do not converge on one join node");
  if (joins.size() == 1) fan.join = *joins.begin();
  return fan;
}

inline std::string start_node(const ir::WorkflowIR& ir,
                              const std::map<std::string, NodeLinks>& links,
                              const std::set<std::string>& nested) {
  for (const auto& node : ir.nodes) {
    if (nested.count(node.id)) continue;
    if (links.at(node.id).incoming == 0) return node.id;
  }
  return ir.nodes.empty() ? std::string{} : ir.nodes.front().id;
}

// Which nodes are nested inside parallel/map constructs (and therefore not
// top-level states or dag tasks).
inline std::set<std::string> nested_children(
    const ir::WorkflowIR& ir, const std::map<std::string, NodeLinks>& links) {
  std::set<std::string> nested;
  for (const auto& node : ir.nodes) {
    if (node.kind != ir::NodeKind::Parallel && node.kind != ir::NodeKind::Map)
      continue;
    for (const auto& child : resolve_fanout(ir, node, links).children)
      nested.insert(child);
  }
  return nested;
}

inline std::string canonical_guard(const std::string& text) {
  try {
    return guard::print(guard::normalize(guard::parse(text)));
  } catch (const SyntaxError&) {
    return text;
  }
}

// --- guard <-> ASL Choice condition ---

inline Json condition_from_guard(const guard::ExprPtr& expr) {
  using guard::Expr;
  switch (expr->kind) {
    case Expr::Kind::And: {
      Json list = Json::array();
      for (const auto& child : expr->children)
        list.push_back(condition_from_guard(child));
      return Json{{"And", std::move(list)}};
    }
    case Expr::Kind::Or: {
      Json list = Json::array();
      for (const auto& child : expr->children)
        list.push_back(condition_from_guard(child));
      return Json{{"Or", std::move(list)}};
    }
    case Expr::Kind::Not:
      return Json{{"Not", condition_from_guard(expr->children[0])}};
    case Expr::Kind::Compare: {
      Json out;
      out["Variable"] = "$." + expr->field;
      const Json& lit = expr->literal;
      std::string op;
      if (lit.is_boolean()) {
        if (expr->op == "==" ) {
          out["BooleanEquals"] = lit;
          return out;
        }
        if (expr->op == "!=") {
          Json inner;
          inner["Variable"] = "$." + expr->field;
          inner["BooleanEquals"] = lit;
          return Json{{"Not", std::move(inner)}};
        }
        throw UnsupportedFeature("boolean guard only supports == and !=");
      }
      std::string prefix = lit.is_string() ? "String" : "Numeric";
      if (expr->op == "==")
        op = prefix + "Equals";
      else if (expr->op == "<")
        op = prefix + "LessThan";
      else if (expr->op == "<=")
        op = prefix + "LessThanEquals";
      else if (expr->op == ">")
        op = prefix + "GreaterThan";
      else if (expr->op == ">=")
        op = prefix + "GreaterThanEquals";
      else if (expr->op == "!=") {
        Json inner;
        inner["Variable"] = "$." + expr->field;
        inner[prefix + "Equals"] = lit;
        return Json{{"Not", std::move(inner)}};
      }
      out[op] = lit;
      return out;
    }
  }
  throw UnsupportedFeature("unreachable guard kind");
}

inline guard::ExprPtr guard_from_condition(const Json& condition) {
  using guard::Expr;
  auto node = std::make_shared<Expr>();
  if (condition.contains("And") || condition.contains("Or")) {
    bool is_and = condition.contains("And");
    node->kind = is_and ? Expr::Kind::And : Expr::Kind::Or;
    for (const auto& child : condition.at(is_and ? "And" : "Or"))
      node->children.push_back(guard_from_condition(child));
    return node;
  }
  if (condition.contains("Not")) {
    node->kind = Expr::Kind::Not;
    node->children = {guard_from_condition(condition.at("Not"))};
    return node;
  }
  if (!condition.contains("Variable"))
    throw UnsupportedConstruct("choice rule without a Variable comparison");
  node->kind = Expr::Kind::Compare;
  std::string variable = condition.at("Variable").get<std::string>();
  node->field = variable.rfind("$.", 0) == 0 ? variable.substr(2) : variable;
  static const std::pair<const char*, const char*> kOps[] = {
      {"NumericEquals", "=="},          {"NumericLessThanEquals", "<="},
      {"NumericGreaterThanEquals", ">="}, {"NumericLessThan", "<"},
      {"NumericGreaterThan", ">"},      {"StringEquals", "=="},
      {"StringLessThanEquals", "<="},   {"StringGreaterThanEquals", ">="},
      {"StringLessThan", "<"},          {"StringGreaterThan", ">"},
      {"BooleanEquals", "=="},
  };
  for (const auto& [key, op] : kOps) {
    if (condition.contains(key)) {
      node->op = op;
      node->literal = condition.at(key);
      return node;
    }
  }
  throw UnsupportedConstruct("unsupported choice comparison in " + condition.dump());
}

// --- guard <-> Argo when expression ---

inline std::string when_literal(const Json& lit) {
  if (lit.is_string()) return "'" + lit.get<std::string>() + "'";
  return lit.dump();
}

inline std::string when_from_guard(const guard::ExprPtr& expr,
                                   const std::string& from_task,
                                   bool parenthesize = false) {
  using guard::Expr;
  switch (expr->kind) {
    case Expr::Kind::Compare:
      return "{{tasks." + from_task + ".outputs.parameters." + expr->field + "}} " +
             expr->op + " " + when_literal(expr->literal);
    case Expr::Kind::Not:
      return "!(" + when_from_guard(expr->children[0], from_task) + ")";
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      std::string joiner = expr->kind == Expr::Kind::And ? " && " : " || ";
      std::string out;
      for (size_t i = 0; i < expr->children.size(); ++i) {
        if (i) out += joiner;
        out += when_from_guard(expr->children[i], from_task, true);
      }
      return parenthesize ? "(" + out + ")" : out;
    }
  }
  return {};
}

// Strips the {{tasks.X.outputs.parameters.FIELD}} wrappers back to FIELD.
inline std::string guard_text_from_when(const std::string& when) {
  std::string out;
  size_t pos = 0;
  const std::string open = "{{tasks.";
  const std::string mid = ".outputs.parameters.";
  while (pos < when.size()) {
    size_t start = when.find(open, pos);
    if (start == std::string::npos) {
      out += when.substr(pos);
      break;
    }
    out += when.substr(pos, start - pos);
    size_t field_at = when.find(mid, start);
    size_t close = when.find("}}", start);
    if (field_at == std::string::npos || close == std::string::npos ||
        field_at > close)
      throw UnsupportedConstruct("unsupported when expression: " + when);
    out += when.substr(field_at + mid.size(), close - field_at - mid.size());
    pos = close + 2;
  }
  return out;
}

}  // namespace alas::convert::detail

#endif  // ALAS_SRC_CONVERT_DETAIL_HPP_

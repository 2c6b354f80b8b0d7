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

#include "alas/guard.hpp"

#include <cctype>
#include <map>
#include <cstring>
#include <sstream>

namespace alas::guard {

namespace {

struct Parser {
  const std::string& text;
  size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool eat(const std::string& token) {
    skip_ws();
    if (text.compare(pos, token.size(), token) == 0) {
      pos += token.size();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw SyntaxError("guard: " + what + " at offset " + std::to_string(pos));
  }

  ExprPtr parse_or() {
    auto left = parse_and();
    std::vector<ExprPtr> terms{left};
    while (eat("||")) terms.push_back(parse_and());
    if (terms.size() == 1) return left;
    auto node = std::make_shared<Expr>();
    node->kind = Expr::Kind::Or;
    node->children = std::move(terms);
    return node;
  }

  ExprPtr parse_and() {
    auto left = parse_unary();
    std::vector<ExprPtr> terms{left};
    while (true) {
      skip_ws();
      // "&&" only; a single '&' is malformed.
      if (text.compare(pos, 2, "&&") == 0) {
        pos += 2;
        terms.push_back(parse_unary());
      } else {
        break;
      }
    }
    if (terms.size() == 1) return left;
    auto node = std::make_shared<Expr>();
    node->kind = Expr::Kind::And;
    node->children = std::move(terms);
    return node;
  }

  ExprPtr parse_unary() {
    skip_ws();
    if (eat("!")) {
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::Not;
      node->children = {parse_unary()};
      return node;
    }
    if (eat("(")) {
      auto inner = parse_or();
      if (!eat(")")) fail("expected ')'");
      return inner;
    }
    return parse_compare();
  }

  std::string parse_field() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')
        ++pos;
      else
        break;
    }
    if (pos == start) fail("expected field name");
    return text.substr(start, pos - start);
  }

  ExprPtr parse_compare() {
    auto node = std::make_shared<Expr>();
    node->kind = Expr::Kind::Compare;
    node->field = parse_field();
    skip_ws();
    static const char* ops[] = {"==", "!=", "<=", ">=", "<", ">"};
    node->op.clear();
    for (const char* op : ops) {
      if (text.compare(pos, std::strlen(op), op) == 0) {
        node->op = op;
        pos += std::strlen(op);
        break;
      }
    }
    if (node->op.empty()) fail("expected comparison operator");
    skip_ws();
    if (pos >= text.size()) fail("expected literal");
    char c = text[pos];
    if (c == '\'') {
      size_t close = text.find('\'', pos + 1);
      if (close == std::string::npos) fail("unterminated string literal");
      node->literal = text.substr(pos + 1, close - pos - 1);
      pos = close + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+') {
      size_t start = pos;
      if (c == '-' || c == '+') ++pos;
      bool saw_dot = false;
      while (pos < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[pos])) ||
              (!saw_dot && text[pos] == '.'))) {
        if (text[pos] == '.') saw_dot = true;
        ++pos;
      }
      std::string num = text.substr(start, pos - start);
      if (num == "-" || num == "+") fail("expected number");
      node->literal = saw_dot ? Json(std::stod(num)) : Json(std::stoll(num));
    } else if (text.compare(pos, 4, "true") == 0) {
      node->literal = true;
      pos += 4;
    } else if (text.compare(pos, 5, "false") == 0) {
      node->literal = false;
      pos += 5;
    } else {
      fail("expected literal");
    }
    return node;
  }
};

bool numeric_type(const std::string& t) {
  return t == "number" || t == "int" || t == "integer" || t == "float" ||
         t == "double" || t == "duration" || t == "count";
}

bool string_type(const std::string& t) {
  return t == "string" || t == "text" || t == "identifier" || t == "id" ||
         t == "enum";
}

bool bool_type(const std::string& t) { return t == "bool" || t == "boolean"; }

void collect(const ExprPtr& expr,
             const std::map<std::string, std::string>& bindings,
             std::optional<std::string>& error) {
  if (error) return;
  if (expr->kind == Expr::Kind::Compare) {
    auto it = bindings.find(expr->field);
    if (it == bindings.end()) {
      error = "unknown field '" + expr->field + "'";
      return;
    }
    const std::string& type = it->second;
    if (expr->literal.is_number() && !numeric_type(type))
      error = "field '" + expr->field + "' of type '" + type +
              "' compared to a number";
    else if (expr->literal.is_string() && !string_type(type))
      error = "field '" + expr->field + "' of type '" + type +
              "' compared to a string";
    else if (expr->literal.is_boolean() && !bool_type(type))
      error = "field '" + expr->field + "' of type '" + type +
              "' compared to a boolean";
    else if (expr->literal.is_boolean() && expr->op != "==" && expr->op != "!=")
      error = "boolean field '" + expr->field + "' only supports == and !=";
    return;
  }
  for (const auto& child : expr->children) collect(child, bindings, error);
}

std::string literal_text(const Json& literal) {
  if (literal.is_string()) return "'" + literal.get<std::string>() + "'";
  return literal.dump();
}

void print_into(const ExprPtr& expr, std::ostringstream& out, bool parenthesize) {
  switch (expr->kind) {
    case Expr::Kind::Compare:
      out << expr->field << ' ' << expr->op << ' ' << literal_text(expr->literal);
      return;
    case Expr::Kind::Not:
      out << '!';
      if (expr->children[0]->kind == Expr::Kind::Compare) out << '(';
      print_into(expr->children[0], out, true);
      if (expr->children[0]->kind == Expr::Kind::Compare) out << ')';
      return;
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      const char* joiner = expr->kind == Expr::Kind::And ? " && " : " || ";
      if (parenthesize) out << '(';
      for (size_t i = 0; i < expr->children.size(); ++i) {
        if (i) out << joiner;
        print_into(expr->children[i], out, true);
      }
      if (parenthesize) out << ')';
      return;
    }
  }
}

}  // namespace

ExprPtr parse(const std::string& text) {
  Parser parser(text);
  auto expr = parser.parse_or();
  parser.skip_ws();
  if (parser.pos != text.size())
    throw SyntaxError("guard: trailing input at offset " + std::to_string(parser.pos));
  return expr;
}

std::optional<std::string> type_check(
    const ExprPtr& expr, const std::map<std::string, std::string>& bindings) {
  std::optional<std::string> error;
  collect(expr, bindings, error);
  return error;
}

std::string print(const ExprPtr& expr) {
  std::ostringstream out;
  print_into(expr, out, false);
  return out.str();
}

ExprPtr normalize(const ExprPtr& expr) {
  static const std::map<std::string, std::string> complement = {
      {"==", "!="}, {"!=", "=="}, {"<", ">="},
      {">=", "<"},  {">", "<="},  {"<=", ">"},
  };
  if (expr->kind == Expr::Kind::Not) {
    auto inner = normalize(expr->children[0]);
    if (inner->kind == Expr::Kind::Compare) {
      auto folded = std::make_shared<Expr>(*inner);
      folded->op = complement.at(inner->op);
      return folded;
    }
    auto node = std::make_shared<Expr>();
    node->kind = Expr::Kind::Not;
    node->children = {inner};
    return node;
  }
  if (expr->kind == Expr::Kind::Compare) return expr;
  auto node = std::make_shared<Expr>();
  node->kind = expr->kind;
  for (const auto& child : expr->children) node->children.push_back(normalize(child));
  return node;
}

}  // namespace alas::guard

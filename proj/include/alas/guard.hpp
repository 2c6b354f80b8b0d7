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
// Guard expressions on branch edges: comparisons over scalar input bindings,
// combined with && || ! and parentheses.
//
//   guard   := or
//   or      := and ("||" and)*
//   and     := unary ("&&" unary)*
//   unary   := "!" unary | "(" guard ")" | compare
//   compare := field OP literal
//   OP      := == != < <= > >=
//   literal := number | 'single-quoted string' | true | false
//
// Fields are dotted identifiers resolved against the source node's output
// schema; comparisons type check against the field's semantic type.

#ifndef ALAS_GUARD_HPP_
#define ALAS_GUARD_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alas/error.hpp"
#include "alas/json.hpp"

namespace alas::guard {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Compare, And, Or, Not };
  Kind kind = Kind::Compare;

  // Compare
  std::string field;
  std::string op;  // == != < <= > >=
  Json literal;

  // And/Or hold two or more children; Not holds one.
  std::vector<ExprPtr> children;
};

// Throws SyntaxError on malformed text.
ExprPtr parse(const std::string& text);

// Returns an error message when the expression does not type check against
// the bindings (field -> semantic type), nullopt when fine. Numeric literals
// require number-like field types, quoted strings string-like, booleans
// bool-like.
std::optional<std::string> type_check(const ExprPtr& expr,
                                      const std::map<std::string, std::string>& bindings);

// Canonical text: minimal parentheses, normalized spacing. parse(print(e))
// reproduces e.
std::string print(const ExprPtr& expr);

// Folds negated comparisons into their complementary operator
// (!(x == 1) becomes x != 1) so equivalent guards share one spelling.
ExprPtr normalize(const ExprPtr& expr);

}  // namespace alas::guard

#endif  // ALAS_GUARD_HPP_

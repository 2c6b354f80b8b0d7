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

#ifndef ALAS_ERROR_HPP_
#define ALAS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace alas {

// Base for all domain errors. `code()` is a stable machine-readable tag,
// what() carries the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define ALAS_DEFINE_ERROR(Name, code_str)                   \
  class Name : public ::alas::Error {                       \
   public:                                                  \
    explicit Name(const std::string& message)               \
        : ::alas::Error(code_str, message) {}               \
  }

ALAS_DEFINE_ERROR(SyntaxError, "SyntaxError");
ALAS_DEFINE_ERROR(SchemaError, "SchemaError");
ALAS_DEFINE_ERROR(MissingPolicy, "MissingPolicy");
ALAS_DEFINE_ERROR(UnsupportedFeature, "UnsupportedFeature");
ALAS_DEFINE_ERROR(UnsupportedConstruct, "UnsupportedConstruct");
ALAS_DEFINE_ERROR(NoSuchSnapshot, "NoSuchSnapshot");
ALAS_DEFINE_ERROR(FormatError, "FormatError");
ALAS_DEFINE_ERROR(EmptySchedule, "EmptySchedule");
ALAS_DEFINE_ERROR(TooLarge, "TooLarge");
ALAS_DEFINE_ERROR(KeyMismatch, "KeyMismatch");
ALAS_DEFINE_ERROR(PreconditionViolated, "PreconditionViolated");
ALAS_DEFINE_ERROR(InfeasibleLocally, "InfeasibleLocally");
ALAS_DEFINE_ERROR(LoopGuardExceeded, "LoopGuardExceeded");
ALAS_DEFINE_ERROR(EmptyInput, "EmptyInput");
ALAS_DEFINE_ERROR(NoResults, "NoResults");
ALAS_DEFINE_ERROR(PipelineHalted, "PipelineHalted");

#undef ALAS_DEFINE_ERROR

}  // namespace alas

#endif  // ALAS_ERROR_HPP_

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
// Engine converters: emit and ingest Amazon States Language (JSON) and Argo
// Workflows (YAML) documents, and verify round-trip preservation against the
// conformance core.
//
// Conformance core: the four node kinds on chain/choice/diamond topologies,
// sequence/branch/default edges with grammar guards, and the full policy
// field set. Policy semantics ride native engine fields (Retry/Catch/
// TimeoutSeconds, retryStrategy/activeDeadlineSeconds); features without a
// native home ride declared fallback carriers (reserved input field
// __alas_idem_key, state Comment metadata, template annotations) and are
// listed as lossy in the ConversionReport.

#ifndef ALAS_CONVERT_HPP_
#define ALAS_CONVERT_HPP_

#include <string>
#include <vector>

#include "alas/ir.hpp"

namespace alas::convert {

enum class Target { asl, argo };

std::string to_string(Target target);

struct LossyFeature {
  std::string feature;
  std::string fallback_used;
};

struct ConversionReport {
  Target target = Target::asl;
  std::vector<std::string> preserved;  // features whose values survived
  std::vector<LossyFeature> lossy;     // features that rode a fallback carrier
  bool parity_ok = false;              // every present core feature survived
};

// Deterministic emission: equal IRs yield byte-identical text. Preconditions:
// check_well_formed(ir) is empty. Throws UnsupportedFeature for constructs
// outside the conformance core (for example sequence fan-out from a task
// node, or multi-node parallel branches).
std::string emit_asl(const ir::WorkflowIR& ir);
std::string emit_argo(const ir::WorkflowIR& ir);

// Inverse of the corresponding emitter over the conformance core. Throws
// UnsupportedConstruct (named) for documents outside the subset, for example
// an Activity ARN task state.
ir::WorkflowIR ingest_asl(const std::string& text);
ir::WorkflowIR ingest_argo(const std::string& text);

// Compares ir against ingest(emit(ir)): node kinds, edge order, guards, and
// every policy field reachable from a node.
ConversionReport roundtrip_check(const ir::WorkflowIR& ir, Target target);

// The projection the round trip is checked on.
Json core_projection(const ir::WorkflowIR& ir);

Json report_to_json(const ConversionReport& report);

}  // namespace alas::convert

#endif  // ALAS_CONVERT_HPP_

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
// Executes one task attempt under a policy: bounded retries with backoff,
// timeouts, catch routing, compensation, idempotent execution, and fault
// injection. Time is virtual; everything is deterministic per seed.

#ifndef ALAS_POLICY_RUNTIME_HPP_
#define ALAS_POLICY_RUNTIME_HPP_

#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "alas/ir.hpp"
#include "alas/json.hpp"
#include "alas/log.hpp"

namespace alas::policy_runtime {

// Simulated clock in seconds. Delays and timeouts advance it; nothing sleeps.
struct VirtualClock {
  double now = 0.0;
  void advance(double seconds) { now += seconds; }
};

// ISO-8601 rendering of the virtual instant against a fixed epoch.
std::string virtual_timestamp(const VirtualClock& clock);

enum class FaultKind { timeout, toolFailure, constraintViolation };

struct FaultInjection {
  std::string node_id;
  int attempt_index = 1;  // >= 1
  FaultKind kind = FaultKind::toolFailure;
  std::string label;  // error class for constraintViolation
};

struct FaultPlan {
  std::vector<FaultInjection> injections;

  static FaultPlan from_json(const Json& doc);
  static FaultPlan load(const std::string& path);
  Json to_json() const;
};

// Exact match on (nodeId, attemptIndex).
std::optional<FaultInjection> inject_fault(const FaultPlan& plan,
                                           const std::string& node_id,
                                           int attempt_index);

// fixed -> base; exponential -> min(cap, base * 2^(attempt-1)). Jitter j
// draws a multiplier uniformly from [1-j, 1+j] using a generator derived
// from (seed, attempt), so a delay depends only on those two values.
double compute_backoff(const ir::Backoff& backoff, int attempt, std::uint64_t seed);

enum class AttemptStatus {
  success,
  failedHandled,
  failedUnhandled,
  timedOut,
  compensated,
};

std::string to_string(AttemptStatus status);

struct AttemptOutcome {
  AttemptStatus status = AttemptStatus::success;
  int attempts = 0;
  std::vector<double> delays_applied;
  std::optional<Json> result;
  std::optional<std::string> error_class;
};

// A task either returns a payload or throws alas::Error whose code() is the
// error class. It may consume virtual time through the clock.
using PolicyTask = std::function<Json(VirtualClock&)>;

struct RunContext {
  std::string node_id = "task";
  std::string correlation_id = "run";
  std::uint64_t seed = 0;
  // Invoked when compensation triggers onFailure; wrapped in the idempotency
  // store when safeReinvoke is set and a store is supplied.
  std::function<void(VirtualClock&)> compensator;
  class IdempotencyStore* idempotency_store = nullptr;
};

// Runs the task under the policy, logging every Retry/Catch/Compensate/
// Timeout decision with its evaluated parameters.
AttemptOutcome run_with_policy(const PolicyTask& task, const ir::Policy& policy,
                               const FaultPlan& faults, log::VersionedLog& log,
                               VirtualClock& clock, const RunContext& context);

struct IdempotencyRecord {
  enum class State { SUCCESS, PENDING };
  State state = State::PENDING;
  std::optional<Json> result;
};

// Bounds an iterative construct by maxIters and/or a virtual-time budget.
// tick() at the top of each pass; throws LoopGuardExceeded when either
// bound is crossed.
class LoopGuard {
 public:
  LoopGuard(const ir::LoopGuards& guards, const VirtualClock& clock)
      : guards_(guards), clock_(clock), started_(clock.now) {}

  void tick();
  int iterations() const { return iterations_; }

 private:
  ir::LoopGuards guards_;
  const VirtualClock& clock_;
  double started_ = 0.0;
  int iterations_ = 0;
};

// At-most-once effect per key. SUCCESS returns the cached result without
// invoking the task; PENDING blocks until the owning execution finishes;
// failure clears the record and rethrows, waking waiters to retry.
class IdempotencyStore {
 public:
  Json execute(const std::string& key, const std::function<Json()>& task);

  std::optional<IdempotencyRecord> lookup(const std::string& key) const;
  int invocations() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::string, IdempotencyRecord> records_;
  int invocations_ = 0;
};

}  // namespace alas::policy_runtime

#endif  // ALAS_POLICY_RUNTIME_HPP_

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

#include "alas/policy_runtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace alas::policy_runtime {

namespace {

constexpr std::int64_t kEpochSeconds = 1735689600;  // 2025-01-01T00:00:00Z

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

bool matches_class(const std::vector<std::string>& classes, const std::string& cls) {
  for (const auto& c : classes)
    if (c == "*" || c == cls) return true;
  return false;
}

}  // namespace

std::string virtual_timestamp(const VirtualClock& clock) {
  std::int64_t total = kEpochSeconds + static_cast<std::int64_t>(clock.now);
  std::int64_t days = total / 86400;
  std::int64_t rem = total % 86400;
  // Days since civil epoch to y/m/d (Howard Hinnant's algorithm).
  std::int64_t z = days + 719468;
  std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  std::int64_t doe = z - era * 146097;
  std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = yoe + era * 400;
  std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  std::int64_t mp = (5 * doy + 2) / 153;
  std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
  std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
  if (m <= 2) ++y;
  char buf[72];
  std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lldT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), static_cast<long long>(m),
                static_cast<long long>(d), static_cast<long long>(rem / 3600),
                static_cast<long long>((rem % 3600) / 60),
                static_cast<long long>(rem % 60));
  return buf;
}

FaultPlan FaultPlan::from_json(const Json& doc) {
  FaultPlan plan;
  const Json* items = &doc;
  if (doc.is_object() && doc.contains("injections")) items = &doc.at("injections");
  if (!items->is_array()) throw SchemaError("fault plan: expected an injections array");
  for (const auto& item : *items) {
    FaultInjection injection;
    injection.node_id = item.at("nodeId").get<std::string>();
    injection.attempt_index = item.at("attemptIndex").get<int>();
    if (injection.attempt_index < 1)
      throw SchemaError("fault plan: attemptIndex must be >= 1");
    std::string kind = item.at("fault").get<std::string>();
    if (kind == "timeout")
      injection.kind = FaultKind::timeout;
    else if (kind == "toolFailure")
      injection.kind = FaultKind::toolFailure;
    else if (kind == "constraintViolation")
      injection.kind = FaultKind::constraintViolation;
    else
      throw SchemaError("fault plan: unknown fault kind '" + kind + "'");
    injection.label = item.value("label", std::string{});
    plan.injections.push_back(std::move(injection));
  }
  return plan;
}

FaultPlan FaultPlan::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open fault plan " + path);
  Json doc = Json::parse(in, nullptr, true);
  return from_json(doc);
}

Json FaultPlan::to_json() const {
  Json doc;
  doc["injections"] = Json::array();
  for (const auto& injection : injections) {
    Json item;
    item["nodeId"] = injection.node_id;
    item["attemptIndex"] = injection.attempt_index;
    switch (injection.kind) {
      case FaultKind::timeout: item["fault"] = "timeout"; break;
      case FaultKind::toolFailure: item["fault"] = "toolFailure"; break;
      case FaultKind::constraintViolation: item["fault"] = "constraintViolation"; break;
    }
    if (!injection.label.empty()) item["label"] = injection.label;
    doc["injections"].push_back(std::move(item));
  }
  return doc;
}

std::optional<FaultInjection> inject_fault(const FaultPlan& plan,
                                           const std::string& node_id,
                                           int attempt_index) {
  for (const auto& injection : plan.injections)
    if (injection.node_id == node_id && injection.attempt_index == attempt_index)
      return injection;
  return std::nullopt;
}

double compute_backoff(const ir::Backoff& backoff, int attempt, std::uint64_t seed) {
  double delay = backoff.base;
  if (backoff.mode == ir::Backoff::Mode::Exponential) {
    delay = backoff.base * std::pow(2.0, attempt - 1);
    if (backoff.cap) delay = std::min(delay, *backoff.cap);
  }
  if (backoff.jitter > 0.0) {
    std::uint64_t draw =
        splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(attempt)));
    double multiplier =
        (1.0 - backoff.jitter) + unit_uniform(draw) * 2.0 * backoff.jitter;
    delay *= multiplier;
  }
  return std::max(delay, 0.0);
}

std::string to_string(AttemptStatus status) {
  switch (status) {
    case AttemptStatus::success: return "success";
    case AttemptStatus::failedHandled: return "failedHandled";
    case AttemptStatus::failedUnhandled: return "failedUnhandled";
    case AttemptStatus::timedOut: return "timedOut";
    case AttemptStatus::compensated: return "compensated";
  }
  return "success";
}

AttemptOutcome run_with_policy(const PolicyTask& task, const ir::Policy& policy,
                               const FaultPlan& faults, log::VersionedLog& log,
                               VirtualClock& clock, const RunContext& context) {
  AttemptOutcome outcome;
  int max_attempts = 1 + (policy.retry ? policy.retry->max_attempts : 0);
  std::string last_class;

  auto emit = [&](log::EventType type, Json payload) {
    log::LogEntry entry;
    entry.ts = virtual_timestamp(clock);
    entry.node_id = context.node_id;
    entry.event_type = type;
    entry.payload = std::move(payload);
    entry.correlation_id = context.correlation_id;
    log.append(std::move(entry));
  };

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    outcome.attempts = attempt;
    std::optional<std::string> failure;

    auto injected = inject_fault(faults, context.node_id, attempt);
    if (injected) {
      switch (injected->kind) {
        case FaultKind::timeout: {
          double limit = policy.timeout ? policy.timeout->seconds : 0.0;
          clock.advance(limit);
          emit(log::EventType::Timeout,
               {{"attempt", attempt}, {"limitSeconds", limit}, {"injected", true}});
          failure = "Timeout";
          break;
        }
        case FaultKind::toolFailure:
          failure = injected->label.empty() ? "ToolFailure" : injected->label;
          break;
        case FaultKind::constraintViolation:
          failure = injected->label.empty() ? "ConstraintViolation" : injected->label;
          break;
      }
    } else {
      double started = clock.now;
      try {
        Json result = task(clock);
        double elapsed = clock.now - started;
        if (policy.timeout && elapsed > policy.timeout->seconds) {
          emit(log::EventType::Timeout, {{"attempt", attempt},
                                         {"limitSeconds", policy.timeout->seconds},
                                         {"elapsedSeconds", elapsed}});
          failure = "Timeout";
        } else {
          outcome.status = AttemptStatus::success;
          outcome.result = std::move(result);
          return outcome;
        }
      } catch (const Error& ex) {
        double elapsed = clock.now - started;
        if (policy.timeout && elapsed > policy.timeout->seconds) {
          emit(log::EventType::Timeout, {{"attempt", attempt},
                                         {"limitSeconds", policy.timeout->seconds},
                                         {"elapsedSeconds", elapsed}});
          failure = "Timeout";
        } else {
          failure = ex.code();
        }
      }
    }

    last_class = *failure;
    bool retriable = policy.retry && attempt < max_attempts &&
                     matches_class(policy.retry->retry_on, last_class);
    if (retriable) {
      double delay = policy.backoff
                         ? compute_backoff(*policy.backoff, attempt, context.seed)
                         : 0.0;
      emit(log::EventType::Retry, {{"attempt", attempt},
                                   {"errorClass", last_class},
                                   {"delaySeconds", delay}});
      outcome.delays_applied.push_back(delay);
      clock.advance(delay);
      continue;
    }
    break;
  }

  outcome.error_class = last_class;

  // Catch rules match in declaration order; "*" matches every class.
  for (const auto& rule : policy.catches) {
    if (matches_class(rule.errors, last_class)) {
      emit(log::EventType::Catch,
           {{"errorClass", last_class}, {"handler", rule.handler}});
      outcome.status = AttemptStatus::failedHandled;
      return outcome;
    }
  }

  if (policy.compensation && policy.compensation->trigger == "onFailure" &&
      context.compensator) {
    auto invoke = [&]() {
      context.compensator(clock);
      return Json::object();
    };
    if (policy.compensation->safe_reinvoke && context.idempotency_store) {
      std::string key = "compensate:" + context.node_id;
      if (policy.idempotency_key && policy.idempotency_key->key_template) {
        key = *policy.idempotency_key->key_template;
        std::string marker = "{nodeId}";
        size_t pos;
        while ((pos = key.find(marker)) != std::string::npos)
          key.replace(pos, marker.size(), context.node_id);
      }
      context.idempotency_store->execute(key, invoke);
    } else {
      invoke();
    }
    emit(log::EventType::Compensate, {{"handler", policy.compensation->handler},
                                      {"errorClass", last_class},
                                      {"safeReinvoke", policy.compensation->safe_reinvoke}});
    outcome.status = AttemptStatus::compensated;
    return outcome;
  }

  outcome.status = last_class == "Timeout" ? AttemptStatus::timedOut
                                           : AttemptStatus::failedUnhandled;
  return outcome;
}

void LoopGuard::tick() {
  ++iterations_;
  if (guards_.max_iters && iterations_ > *guards_.max_iters)
    throw LoopGuardExceeded("loop exceeded maxIters " +
                            std::to_string(*guards_.max_iters));
  double elapsed = clock_.now - started_;
  double budget = -1.0;
  if (guards_.time_budget) budget = *guards_.time_budget;
  if (guards_.deadline_seconds)
    budget = budget < 0 ? *guards_.deadline_seconds
                        : std::min(budget, *guards_.deadline_seconds);
  if (budget >= 0 && elapsed > budget)
    throw LoopGuardExceeded("loop exceeded its time budget of " +
                            std::to_string(budget) + " s");
}

Json IdempotencyStore::execute(const std::string& key,
                               const std::function<Json()>& task) {
  std::unique_lock<std::mutex> lock(mutex_);
  while (true) {
    auto it = records_.find(key);
    if (it == records_.end()) break;
    if (it->second.state == IdempotencyRecord::State::SUCCESS)
      return *it->second.result;
    // PENDING: another execution owns the key; wait for it to settle.
    cv_.wait(lock);
  }

  records_[key] = {IdempotencyRecord::State::PENDING, std::nullopt};
  lock.unlock();
  Json result;
  try {
    result = task();
  } catch (...) {
    lock.lock();
    records_.erase(key);  // failure clears PENDING so waiters can retry
    cv_.notify_all();
    throw;
  }
  lock.lock();
  ++invocations_;
  records_[key] = {IdempotencyRecord::State::SUCCESS, result};
  cv_.notify_all();
  return result;
}

std::optional<IdempotencyRecord> IdempotencyStore::lookup(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

int IdempotencyStore::invocations() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return invocations_;
}

}  // namespace alas::policy_runtime

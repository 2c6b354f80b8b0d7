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
// Append-only versioned execution log: grounded validation slices, restore
// points, and deterministic replay. Single writer; readers observe a prefix.

#ifndef ALAS_LOG_HPP_
#define ALAS_LOG_HPP_

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "alas/error.hpp"
#include "alas/json.hpp"

namespace alas::log {

enum class EventType {
  StartNode,
  EndNode,
  ValidatePass,
  ValidateFail,
  RepairStart,
  RepairApply,
  RepairCommit,
  Retry,
  Catch,
  Compensate,
  Timeout,
};

std::string to_string(EventType type);
EventType event_type_from_string(const std::string& s);

struct LogEntry {
  std::string ts;  // ISO-8601 UTC; excluded from replay parity
  std::string node_id;
  EventType event_type = EventType::StartNode;
  Json payload = Json::object();
  std::int64_t version = 0;
  std::string correlation_id;
};

// Equality over everything except the timestamp.
bool same_event(const LogEntry& a, const LogEntry& b);

// Serialization redacts payload keys prefixed "secret_".
Json entry_to_json(const LogEntry& entry);
LogEntry entry_from_json(const Json& doc);

struct SliceSelector {
  std::optional<std::string> node_id;
  std::optional<std::string> correlation_id;
  std::optional<std::pair<std::int64_t, std::int64_t>> version_range;  // inclusive
  std::size_t max_entries = 1;
};

class VersionedLog {
 public:
  VersionedLog() = default;
  VersionedLog(VersionedLog&& other) noexcept { *this = std::move(other); }
  VersionedLog& operator=(VersionedLog&& other) noexcept {
    if (this != &other) {
      entries_ = std::move(other.entries_);
      committed_.store(other.committed_.load());
      head_.store(other.head_.load());
      snapshots_ = std::move(other.snapshots_);
    }
    return *this;
  }

  // Stamps the draft's version and appends. Commit points (RepairCommit,
  // EndNode) advance the head; every other event reuses the current head.
  std::int64_t append(LogEntry entry);

  // At most max_entries most-recent matching entries, in log order. Reads
  // only the log; never planner state.
  std::vector<LogEntry> slice(const SliceSelector& selector) const;

  std::int64_t snapshot(std::string blob);
  std::string restore(std::int64_t version) const;  // throws NoSuchSnapshot

  std::vector<LogEntry> entries() const;
  std::size_t size() const { return committed_.load(std::memory_order_acquire); }
  std::int64_t head() const { return head_.load(std::memory_order_acquire); }

  void save_ndjson(const std::string& path) const;
  static VersionedLog load_ndjson(const std::string& path);

 private:
  std::deque<LogEntry> entries_;
  std::atomic<std::size_t> committed_{0};
  std::atomic<std::int64_t> head_{0};
  mutable std::mutex snapshot_mutex_;
  std::map<std::int64_t, std::string> snapshots_;
};

// Replay task: reproduces a node's effects from its logged input payload.
// Intermediate events go through the sink; the return value becomes the
// EndNode payload.
class EventSink {
 public:
  EventSink(VersionedLog& log, std::string node_id, std::string correlation_id,
            std::function<std::string()> ts_provider)
      : log_(log),
        node_id_(std::move(node_id)),
        correlation_id_(std::move(correlation_id)),
        ts_provider_(std::move(ts_provider)) {}

  std::int64_t emit(EventType type, Json payload);

  const std::string& node_id() const { return node_id_; }
  const std::string& correlation_id() const { return correlation_id_; }
  VersionedLog& log() { return log_; }
  std::string now() const { return ts_provider_(); }

 private:
  VersionedLog& log_;
  std::string node_id_;
  std::string correlation_id_;
  std::function<std::string()> ts_provider_;
};

using ReplayTask = std::function<Json(const Json& payload, EventSink& sink,
                                      std::mt19937_64& rng)>;
using TaskRegistry = std::map<std::string, ReplayTask>;

struct ReplayOutcome {
  std::uint64_t final_state_hash = 0;
  bool parity_ok = false;
};

// Divergence carries the first mismatching index and both entries.
class ReplayDivergence : public Error {
 public:
  ReplayDivergence(std::size_t index, std::optional<LogEntry> recorded,
                   std::optional<LogEntry> replayed);

  std::size_t index() const { return index_; }
  const std::optional<LogEntry>& recorded() const { return recorded_; }
  const std::optional<LogEntry>& replayed() const { return replayed_; }

 private:
  std::size_t index_;
  std::optional<LogEntry> recorded_;
  std::optional<LogEntry> replayed_;
};

// Re-executes every recorded node from its logged inputs and checks the
// regenerated event stream against the record, timestamps excluded. Throws
// ReplayDivergence at the first mismatch.
ReplayOutcome replay(const VersionedLog& recorded, const TaskRegistry& registry,
                     std::uint64_t seed);

// FNV-1a over the ts-excluded canonical stream; the replay state hash.
std::uint64_t stream_hash(const std::vector<LogEntry>& entries);

}  // namespace alas::log

#endif  // ALAS_LOG_HPP_

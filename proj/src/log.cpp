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

#include "alas/log.hpp"

#include <fstream>
#include <sstream>

namespace alas::log {

namespace {

const char* kEventNames[] = {
    "StartNode",  "EndNode",     "ValidatePass", "ValidateFail",
    "RepairStart", "RepairApply", "RepairCommit", "Retry",
    "Catch",      "Compensate",  "Timeout",
};

Json redact(const Json& payload) {
  if (!payload.is_object()) return payload;
  Json out = Json::object();
  for (const auto& [key, value] : payload.items()) {
    if (key.rfind("secret_", 0) == 0)
      out[key] = "[REDACTED]";
    else
      out[key] = value;
  }
  return out;
}

}  // namespace

std::string to_string(EventType type) { return kEventNames[static_cast<int>(type)]; }

EventType event_type_from_string(const std::string& s) {
  for (int i = 0; i < static_cast<int>(std::size(kEventNames)); ++i)
    if (s == kEventNames[i]) return static_cast<EventType>(i);
  throw SchemaError("unknown eventType: " + s);
}

bool same_event(const LogEntry& a, const LogEntry& b) {
  return a.node_id == b.node_id && a.event_type == b.event_type &&
         a.payload == b.payload && a.version == b.version &&
         a.correlation_id == b.correlation_id;
}

Json entry_to_json(const LogEntry& entry) {
  Json doc;
  doc["ts"] = entry.ts;
  doc["nodeId"] = entry.node_id;
  doc["eventType"] = to_string(entry.event_type);
  doc["payload"] = redact(entry.payload);
  doc["version"] = entry.version;
  doc["correlationId"] = entry.correlation_id;
  return doc;
}

LogEntry entry_from_json(const Json& doc) {
  LogEntry entry;
  try {
    entry.ts = doc.at("ts").get<std::string>();
    entry.node_id = doc.at("nodeId").get<std::string>();
    entry.event_type = event_type_from_string(doc.at("eventType").get<std::string>());
    entry.payload = doc.value("payload", Json::object());
    entry.version = doc.at("version").get<std::int64_t>();
    entry.correlation_id = doc.at("correlationId").get<std::string>();
  } catch (const Json::exception& ex) {
    throw SchemaError(std::string("bad log entry: ") + ex.what());
  }
  return entry;
}

std::int64_t VersionedLog::append(LogEntry entry) {
  bool commit_point = entry.event_type == EventType::RepairCommit ||
                      entry.event_type == EventType::EndNode;
  std::int64_t version = head_.load(std::memory_order_relaxed);
  if (commit_point) version += 1;
  entry.version = version;
  entries_.push_back(std::move(entry));
  if (commit_point) head_.store(version, std::memory_order_release);
  committed_.fetch_add(1, std::memory_order_release);
  return version;
}

std::vector<LogEntry> VersionedLog::slice(const SliceSelector& selector) const {
  std::size_t limit = committed_.load(std::memory_order_acquire);
  std::vector<const LogEntry*> matches;
  for (std::size_t i = 0; i < limit; ++i) {
    const LogEntry& e = entries_[i];
    if (selector.node_id && e.node_id != *selector.node_id) continue;
    if (selector.correlation_id && e.correlation_id != *selector.correlation_id)
      continue;
    if (selector.version_range &&
        (e.version < selector.version_range->first ||
         e.version > selector.version_range->second))
      continue;
    matches.push_back(&e);
  }
  std::size_t keep = std::min(matches.size(), selector.max_entries);
  std::vector<LogEntry> out;
  out.reserve(keep);
  for (std::size_t i = matches.size() - keep; i < matches.size(); ++i)
    out.push_back(*matches[i]);
  return out;
}

std::int64_t VersionedLog::snapshot(std::string blob) {
  std::lock_guard<std::mutex> lock(snapshot_mutex_);
  std::int64_t version = head();
  snapshots_[version] = std::move(blob);
  return version;
}

std::string VersionedLog::restore(std::int64_t version) const {
  std::lock_guard<std::mutex> lock(snapshot_mutex_);
  auto it = snapshots_.find(version);
  if (it == snapshots_.end())
    throw NoSuchSnapshot("no snapshot at version " + std::to_string(version));
  return it->second;
}

std::vector<LogEntry> VersionedLog::entries() const {
  std::size_t limit = committed_.load(std::memory_order_acquire);
  return {entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(limit)};
}

void VersionedLog::save_ndjson(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("IoError", "cannot open " + path + " for writing");
  for (const auto& entry : entries()) out << entry_to_json(entry).dump() << '\n';
}

VersionedLog VersionedLog::load_ndjson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open " + path);
  VersionedLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LogEntry entry = entry_from_json(Json::parse(line));
    // Loaded entries keep their recorded versions verbatim.
    log.entries_.push_back(entry);
    log.committed_.fetch_add(1, std::memory_order_release);
    if (entry.version > log.head()) log.head_.store(entry.version);
  }
  return log;
}

std::int64_t EventSink::emit(EventType type, Json payload) {
  LogEntry entry;
  entry.ts = ts_provider_();
  entry.node_id = node_id_;
  entry.event_type = type;
  entry.payload = std::move(payload);
  entry.correlation_id = correlation_id_;
  return log_.append(std::move(entry));
}

ReplayDivergence::ReplayDivergence(std::size_t index, std::optional<LogEntry> recorded,
                                   std::optional<LogEntry> replayed)
    : Error("ReplayDivergence",
            "replay diverges at entry " + std::to_string(index) + ": recorded " +
                (recorded ? to_string(recorded->event_type) : std::string("<none>")) +
                " vs replayed " +
                (replayed ? to_string(replayed->event_type) : std::string("<none>"))),
      index_(index),
      recorded_(std::move(recorded)),
      replayed_(std::move(replayed)) {}

std::uint64_t stream_hash(const std::vector<LogEntry>& entries) {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](const std::string& text) {
    for (unsigned char c : text) {
      hash ^= c;
      hash *= 1099511628211ULL;
    }
  };
  for (const auto& entry : entries) {
    mix(entry.node_id);
    mix(to_string(entry.event_type));
    mix(entry.payload.dump());
    mix(std::to_string(entry.version));
    mix(entry.correlation_id);
  }
  return hash;
}

ReplayOutcome replay(const VersionedLog& recorded, const TaskRegistry& registry,
                     std::uint64_t seed) {
  auto record = recorded.entries();
  VersionedLog fresh;
  std::mt19937_64 rng(seed);
  auto ts = []() { return std::string("1970-01-01T00:00:00Z"); };

  std::size_t cursor = 0;
  while (cursor < record.size()) {
    const LogEntry& start = record[cursor];
    if (start.event_type != EventType::StartNode)
      throw ReplayDivergence(cursor, start, std::nullopt);
    auto it = registry.find(start.node_id);
    if (it == registry.end())
      throw Error("ReplayError", "no task registered for node " + start.node_id);

    EventSink sink(fresh, start.node_id, start.correlation_id, ts);
    sink.emit(EventType::StartNode, start.payload);
    Json result = it->second(start.payload, sink, rng);
    sink.emit(EventType::EndNode, std::move(result));

    // Advance past this node's recorded segment.
    ++cursor;
    while (cursor < record.size() &&
           !(record[cursor].event_type == EventType::EndNode &&
             record[cursor].node_id == start.node_id))
      ++cursor;
    if (cursor < record.size()) ++cursor;  // consume the EndNode
  }

  auto replayed = fresh.entries();
  std::size_t n = std::max(record.size(), replayed.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= record.size())
      throw ReplayDivergence(i, std::nullopt, replayed[i]);
    if (i >= replayed.size())
      throw ReplayDivergence(i, record[i], std::nullopt);
    if (!same_event(record[i], replayed[i]))
      throw ReplayDivergence(i, record[i], replayed[i]);
  }

  ReplayOutcome outcome;
  outcome.parity_ok = true;
  outcome.final_state_hash = stream_hash(replayed);
  return outcome;
}

}  // namespace alas::log

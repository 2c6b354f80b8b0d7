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

#include "alas/jssp.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace alas::jssp {

namespace {



constexpr int kBruteForceOpLimit = 12;

}  // namespace

int JsspInstance::total_operations() const {
  int n = 0;
  for (const auto& job : jobs) n += static_cast<int>(job.size());
  return n;
}

std::int64_t JsspInstance::total_duration() const {
  std::int64_t total = 0;
  for (const auto& job : jobs)
    for (const auto& op : job) total += op.duration;
  return total;
}

std::string job_name(int job_index) { return "Job" + std::to_string(job_index + 1); }

std::string machine_name(int machine_index) {
  return "Machine" + std::to_string(machine_index);
}

int job_index(const std::string& name) {
  if (name.rfind("Job", 0) != 0 || name.size() <= 3) return -1;
  for (size_t i = 3; i < name.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return -1;
  int n = std::atoi(name.c_str() + 3);
  return n >= 1 ? n - 1 : -1;
}

int machine_index(const std::string& name) {
  if (name.rfind("Machine", 0) != 0 || name.size() <= 7) return -1;
  for (size_t i = 7; i < name.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return -1;
  return std::atoi(name.c_str() + 7);
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::planner: return "planner";
    case Provenance::repaired: return "repaired";
    case Provenance::optimized: return "optimized";
  }
  return "planner";
}

PlannerRule planner_rule_from_string(const std::string& s) {
  if (s == "spt") return PlannerRule::spt;
  if (s == "lpt") return PlannerRule::lpt;
  if (s == "fifo") return PlannerRule::fifo;
  if (s == "random") return PlannerRule::random;
  throw FormatError("unknown planner rule: " + s);
}

std::string to_string(PlannerRule rule) {
  switch (rule) {
    case PlannerRule::spt: return "spt";
    case PlannerRule::lpt: return "lpt";
    case PlannerRule::fifo: return "fifo";
    case PlannerRule::random: return "random";
  }
  return "spt";
}

JsspInstance parse_instance(const std::string& text, const std::string& name) {
  JsspInstance instance;
  instance.name = name;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int jobs_declared = -1;

  auto fail = [&](const std::string& what) {
    throw FormatError("line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (jobs_declared < 0) {
      int m = 0;
      if (!(ls >> jobs_declared >> m) || jobs_declared <= 0 || m <= 0)
        fail("expected header 'J M' with positive counts");
      instance.machine_count = m;
      continue;
    }
    if (static_cast<int>(instance.jobs.size()) >= jobs_declared)
      fail("more job lines than declared");
    std::vector<Operation> ops;
    int machine = 0;
    std::int64_t duration = 0;
    while (ls >> machine) {
      if (!(ls >> duration)) fail("dangling machine index without duration");
      if (machine < 0 || machine >= instance.machine_count)
        fail("machine index " + std::to_string(machine) + " out of range");
      if (duration < 1) fail("duration must be >= 1");
      ops.push_back({machine, duration});
    }
    if (ops.empty()) fail("job line holds no (machine, duration) pairs");
    instance.jobs.push_back(std::move(ops));
  }
  if (jobs_declared < 0) {
    line_no = 1;
    fail("empty instance document");
  }
  if (static_cast<int>(instance.jobs.size()) != jobs_declared) {
    fail("declared " + std::to_string(jobs_declared) + " jobs, found " +
         std::to_string(instance.jobs.size()));
  }
  return instance;
}

std::int64_t makespan(const Schedule& schedule) {
  if (schedule.entries.empty()) throw EmptySchedule("schedule holds no entries");
  std::int64_t best = std::numeric_limits<std::int64_t>::min();
  for (const auto& e : schedule.entries) best = std::max(best, e.end);
  return best;
}

namespace {

struct EntryRef {
  const ScheduleEntry* entry;
  int job;   // -1 when the name is unknown
  int step;
  int machine;  // -1 when unknown
};

void add_error(ValidationReport& report, std::string code, std::string message,
               ErrorScope scope) {
  report.errors.push_back({std::move(code), std::move(message), std::move(scope)});
}

// Shared body for the typed and JSON validators. `entries` may reference
// jobs/machines outside the instance; those produce scoped errors and are
// skipped by the structural checks.
void validate_entries(const std::vector<ScheduleEntry>& entries,
                      const JsspInstance& instance,
                      const std::vector<BreakdownWindow>& downtime,
                      ValidationReport& report) {
  if (entries.empty()) {
    add_error(report, "empty_schedule", "schedule holds no entries", {});
    return;
  }

  std::vector<EntryRef> refs;
  refs.reserve(entries.size());
  for (const auto& e : entries) {
    EntryRef r{&e, job_index(e.job), e.step, machine_index(e.machine)};
    ErrorScope scope{e.job, e.step, e.machine};
    if (r.job < 0 || r.job >= instance.job_count()) {
      add_error(report, "unknown_job", "entry names a job outside the dataset", scope);
      r.job = -1;
    } else if (r.step < 1 || r.step > static_cast<int>(instance.jobs[r.job].size())) {
      add_error(report, "unknown_step", "entry step outside the job's operation list",
                scope);
      r.job = -1;
    }
    if (r.machine < 0 || r.machine >= instance.machine_count) {
      add_error(report, "unknown_machine", "entry names a machine outside the dataset",
                scope);
      r.machine = -1;
    }
    if (e.start < 0)
      add_error(report, "negative_start", "start time is negative", scope);
    if (e.start >= e.end)
      add_error(report, "time_order", "start must precede end", scope);
    else if (e.duration > 0 && e.end - e.start != e.duration)
      add_error(report, "time_inconsistency",
                "end - start does not equal the entry duration", scope);
    if (r.job >= 0 && r.machine >= 0 &&
        instance.jobs[r.job][r.step - 1].machine != r.machine)
      add_error(report, "wrong_machine",
                "operation assigned to a different machine than the dataset requires",
                scope);
    refs.push_back(r);
  }

  // Makespan window. The serial bound plus declared downtime is the loosest
  // schedule that still contains no dead air beyond the worst case.
  std::int64_t threshold = instance.total_duration();
  for (const auto& w : downtime) threshold += std::max<std::int64_t>(0, w.to - w.from);
  const ScheduleEntry* latest = nullptr;
  for (const auto& e : entries)
    if (!latest || e.end > latest->end) latest = &e;
  if (latest) {
    if (latest->end <= 0)
      add_error(report, "makespan_range", "makespan is not positive",
                {latest->job, latest->step, latest->machine});
    else if (latest->end > threshold)
      add_error(report, "makespan_range",
                "makespan " + std::to_string(latest->end) + " exceeds threshold " +
                    std::to_string(threshold),
                {latest->job, latest->step, latest->machine});
  }

  // Job precedence, duplicates, and dataset coverage.
  std::map<int, std::map<int, const ScheduleEntry*>> by_job;
  for (const auto& r : refs) {
    if (r.job < 0) continue;
    auto [it, inserted] = by_job[r.job].try_emplace(r.step, r.entry);
    if (!inserted)
      add_error(report, "duplicate_entry", "more than one entry for this operation",
                {r.entry->job, r.step, r.entry->machine});
  }
  for (int j = 0; j < instance.job_count(); ++j) {
    auto it = by_job.find(j);
    if (it == by_job.end()) {
      add_error(report, "missing_job", "job absent from the schedule",
                {job_name(j), std::nullopt, std::nullopt});
      continue;
    }
    for (int k = 1; k <= static_cast<int>(instance.jobs[j].size()); ++k) {
      if (!it->second.count(k))
        add_error(report, "missing_operation", "operation absent from the schedule",
                  {job_name(j), k, std::nullopt});
    }
    const ScheduleEntry* prev = nullptr;
    for (const auto& [step, entry] : it->second) {
      if (prev && entry->start < prev->end)
        add_error(report, "precedence",
                  "step " + std::to_string(step) + " starts before step " +
                      std::to_string(step - 1) + " ends",
                  {entry->job, step, entry->machine});
      prev = entry;
    }
  }

  // Machine capacity: no overlapping intervals per machine.
  std::map<int, std::vector<const ScheduleEntry*>> by_machine;
  for (const auto& r : refs)
    if (r.machine >= 0) by_machine[r.machine].push_back(r.entry);
  for (auto& [m, ops] : by_machine) {
    std::stable_sort(ops.begin(), ops.end(),
                     [](const ScheduleEntry* a, const ScheduleEntry* b) {
                       if (a->start != b->start) return a->start < b->start;
                       return a->job < b->job;
                     });
    for (size_t i = 1; i < ops.size(); ++i) {
      std::int64_t frontier = ops[i - 1]->end;
      if (ops[i]->start < frontier)
        add_error(report, "machine_overlap",
                  "overlaps the preceding operation on " + machine_name(m),
                  {ops[i]->job, ops[i]->step, machine_name(m)});
    }
  }

  // Machines required by the dataset must appear.
  std::set<int> used;
  for (const auto& r : refs)
    if (r.machine >= 0) used.insert(r.machine);
  std::set<int> required;
  for (const auto& job : instance.jobs)
    for (const auto& op : job) required.insert(op.machine);
  for (int m : required)
    if (!used.count(m))
      add_error(report, "missing_machine", "machine absent from the schedule",
                {std::nullopt, std::nullopt, machine_name(m)});

  // Declared downtime windows exclude processing.
  for (const auto& w : downtime) {
    for (const auto& r : refs) {
      if (r.machine != w.machine) continue;
      if (r.entry->start < w.to && r.entry->end > w.from)
        add_error(report, "downtime_overlap",
                  "operation overlaps downtime [" + std::to_string(w.from) + "," +
                      std::to_string(w.to) + ")",
                  {r.entry->job, r.entry->step, r.entry->machine});
    }
  }
}

}  // namespace

ValidationReport validate_schedule(const Schedule& schedule,
                                   const JsspInstance& instance,
                                   const std::vector<BreakdownWindow>& downtime) {
  ValidationReport report;
  validate_entries(schedule.entries, instance, downtime, report);
  report.valid = report.errors.empty();
  return report;
}

ValidationReport validate_schedule_json(const Json& doc,
                                        const JsspInstance& instance,
                                        const std::vector<BreakdownWindow>& downtime) {
  ValidationReport report;
  const Json* items = &doc;
  if (doc.is_object() && doc.contains("entries")) items = &doc.at("entries");
  if (!items->is_array()) {
    add_error(report, "bad_document", "schedule document is not an entry list", {});
    report.valid = false;
    return report;
  }
  std::vector<ScheduleEntry> entries;
  static const char* kRequired[] = {"job", "step", "machine", "start", "end"};
  for (const auto& item : *items) {
    if (!item.is_object()) {
      add_error(report, "missing_field", "entry is not an object", {});
      continue;
    }
    bool ok = true;
    for (const char* field : kRequired) {
      if (!item.contains(field)) {
        add_error(report, "missing_field", std::string("entry lacks field '") + field + "'",
                  {item.value("job", std::string{}), std::nullopt, std::nullopt});
        ok = false;
      }
    }
    if (!ok) continue;
    if (!item["start"].is_number() || !item["end"].is_number() ||
        !item["step"].is_number_integer()) {
      add_error(report, "bad_type", "start/end/step must be numeric",
                {item.value("job", std::string{}), std::nullopt, std::nullopt});
      continue;
    }
    ScheduleEntry e;
    e.job = item.value("job", std::string{});
    e.step = item["step"].get<int>();
    e.machine = item.value("machine", std::string{});
    e.start = item["start"].get<std::int64_t>();
    e.end = item["end"].get<std::int64_t>();
    e.duration = item.value("duration", e.end - e.start);
    entries.push_back(std::move(e));
  }
  validate_entries(entries, instance, downtime, report);
  report.valid = report.errors.empty();
  return report;
}

Schedule seed_plan(const JsspInstance& instance, PlannerRule rule, std::uint64_t seed) {
  const int J = instance.job_count();
  std::vector<int> next_step(J, 0);
  std::vector<std::int64_t> job_ready(J, 0);
  std::vector<std::int64_t> machine_avail(instance.machine_count, 0);
  std::mt19937_64 rng(seed);

  Schedule schedule;
  schedule.provenance = Provenance::planner;
  int remaining = instance.total_operations();
  while (remaining > 0) {
    // Non-delay: only operations that can start at the globally earliest
    // feasible time compete.
    std::int64_t earliest = std::numeric_limits<std::int64_t>::max();
    for (int j = 0; j < J; ++j) {
      if (next_step[j] >= static_cast<int>(instance.jobs[j].size())) continue;
      const auto& op = instance.jobs[j][next_step[j]];
      earliest = std::min(earliest, std::max(job_ready[j], machine_avail[op.machine]));
    }
    std::vector<int> candidates;
    for (int j = 0; j < J; ++j) {
      if (next_step[j] >= static_cast<int>(instance.jobs[j].size())) continue;
      const auto& op = instance.jobs[j][next_step[j]];
      if (std::max(job_ready[j], machine_avail[op.machine]) == earliest)
        candidates.push_back(j);
    }
    int pick = candidates.front();
    switch (rule) {
      case PlannerRule::spt:
        for (int j : candidates)
          if (instance.jobs[j][next_step[j]].duration <
              instance.jobs[pick][next_step[pick]].duration)
            pick = j;
        break;
      case PlannerRule::lpt:
        for (int j : candidates)
          if (instance.jobs[j][next_step[j]].duration >
              instance.jobs[pick][next_step[pick]].duration)
            pick = j;
        break;
      case PlannerRule::fifo:
        break;  // arrival order == lowest job index, already the front
      case PlannerRule::random:
        pick = candidates[rng() % candidates.size()];
        break;
    }
    const auto& op = instance.jobs[pick][next_step[pick]];
    ScheduleEntry e;
    e.job = job_name(pick);
    e.step = next_step[pick] + 1;
    e.machine = machine_name(op.machine);
    e.start = earliest;
    e.end = earliest + op.duration;
    e.duration = op.duration;
    schedule.entries.push_back(e);
    job_ready[pick] = e.end;
    machine_avail[op.machine] = e.end;
    next_step[pick]++;
    --remaining;
  }
  return schedule;
}

namespace {

struct EnumState {
  const JsspInstance* instance;
  std::vector<int> next_step;
  std::vector<std::int64_t> job_ready;
  std::vector<std::int64_t> machine_avail;
  std::vector<int> order;
  std::vector<int> best_order;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::int64_t current_max = 0;
  int remaining = 0;
};

void enumerate(EnumState& st) {
  if (st.current_max >= st.best) return;  // cannot improve
  if (st.remaining == 0) {
    st.best = st.current_max;
    st.best_order = st.order;
    return;
  }
  for (int j = 0; j < st.instance->job_count(); ++j) {
    int k = st.next_step[j];
    if (k >= static_cast<int>(st.instance->jobs[j].size())) continue;
    const auto& op = st.instance->jobs[j][k];
    std::int64_t start = std::max(st.job_ready[j], st.machine_avail[op.machine]);
    std::int64_t end = start + op.duration;

    std::int64_t saved_job = st.job_ready[j];
    std::int64_t saved_machine = st.machine_avail[op.machine];
    std::int64_t saved_max = st.current_max;
    st.job_ready[j] = end;
    st.machine_avail[op.machine] = end;
    st.current_max = std::max(st.current_max, end);
    st.next_step[j] = k + 1;
    st.order.push_back(j);
    st.remaining--;

    enumerate(st);

    st.remaining++;
    st.order.pop_back();
    st.next_step[j] = k;
    st.current_max = saved_max;
    st.machine_avail[op.machine] = saved_machine;
    st.job_ready[j] = saved_job;
  }
}

}  // namespace

OptimumResult brute_force_optimum(const JsspInstance& instance) {
  if (instance.total_operations() > kBruteForceOpLimit)
    throw TooLarge("instance has " + std::to_string(instance.total_operations()) +
                   " operations; enumeration is guarded to " +
                   std::to_string(kBruteForceOpLimit));
  EnumState st;
  st.instance = &instance;
  st.next_step.assign(instance.job_count(), 0);
  st.job_ready.assign(instance.job_count(), 0);
  st.machine_avail.assign(instance.machine_count, 0);
  st.remaining = instance.total_operations();
  enumerate(st);

  OptimumResult result;
  result.makespan = st.best;
  result.schedule.provenance = Provenance::optimized;
  std::vector<int> next(instance.job_count(), 0);
  std::vector<std::int64_t> job_ready(instance.job_count(), 0);
  std::vector<std::int64_t> machine_avail(instance.machine_count, 0);
  for (int j : st.best_order) {
    const auto& op = instance.jobs[j][next[j]];
    std::int64_t start = std::max(job_ready[j], machine_avail[op.machine]);
    ScheduleEntry e;
    e.job = job_name(j);
    e.step = next[j] + 1;
    e.machine = machine_name(op.machine);
    e.start = start;
    e.end = start + op.duration;
    e.duration = op.duration;
    result.schedule.entries.push_back(e);
    job_ready[j] = e.end;
    machine_avail[op.machine] = e.end;
    next[j]++;
  }
  return result;
}

DisruptionImpact apply_disruption(const Schedule& schedule,
                                  const JsspInstance& instance,
                                  const DisruptionEvent& event) {
  DisruptionImpact impact;

  struct Ref {
    OpKey key;
    const ScheduleEntry* entry;
    int machine;
  };
  std::vector<Ref> refs;
  for (const auto& e : schedule.entries) {
    int j = job_index(e.job);
    int m = machine_index(e.machine);
    if (j < 0 || m < 0) continue;
    refs.push_back({{j, e.step}, &e, m});
  }

  std::map<OpKey, const Ref*> by_key;
  for (const auto& r : refs) by_key[r.key] = &r;

  std::map<int, std::vector<const Ref*>> machine_queue;
  for (const auto& r : refs) machine_queue[r.machine].push_back(&r);
  for (auto& [m, q] : machine_queue)
    std::stable_sort(q.begin(), q.end(), [](const Ref* a, const Ref* b) {
      if (a->entry->start != b->entry->start) return a->entry->start < b->entry->start;
      return a->key.job < b->key.job;
    });

  std::set<OpKey> direct;
  if (event.kind == DisruptionKind::machineBreakdown && event.breakdown) {
    const auto& w = *event.breakdown;
    for (const auto& r : refs) {
      if (r.machine != w.machine) continue;
      if (r.entry->start < w.to && r.entry->end > w.from) {
        direct.insert(r.key);
        if (r.entry->start < w.from)  // in progress when the machine failed
          impact.restart_required.push_back(r.key);
      }
    }
  } else if (event.kind == DisruptionKind::durationShock && event.shock) {
    OpKey key{event.shock->job, event.shock->step};
    if (by_key.count(key)) direct.insert(key);
  }

  // Transitive dependents: job successor plus the next operation in the
  // machine queue.
  std::set<OpKey> seen = direct;
  std::vector<OpKey> frontier(direct.begin(), direct.end());
  while (!frontier.empty()) {
    OpKey key = frontier.back();
    frontier.pop_back();
    auto it = by_key.find(key);
    if (it == by_key.end()) continue;
    const Ref* ref = it->second;

    OpKey job_succ{key.job, key.step + 1};
    if (by_key.count(job_succ) && seen.insert(job_succ).second)
      frontier.push_back(job_succ);

    const auto& queue = machine_queue[ref->machine];
    for (size_t i = 0; i + 1 < queue.size(); ++i) {
      if (queue[i]->key == key) {
        OpKey mach_succ = queue[i + 1]->key;
        if (seen.insert(mach_succ).second) frontier.push_back(mach_succ);
        break;
      }
    }
  }

  impact.direct.assign(direct.begin(), direct.end());
  impact.affected.assign(seen.begin(), seen.end());
  auto by_start = [&](const OpKey& a, const OpKey& b) {
    const Ref* ra = by_key.at(a);
    const Ref* rb = by_key.at(b);
    if (ra->entry->start != rb->entry->start) return ra->entry->start < rb->entry->start;
    return a < b;
  };
  std::sort(impact.direct.begin(), impact.direct.end(), by_start);
  std::sort(impact.affected.begin(), impact.affected.end(), by_start);
  return impact;
}

Json schedule_to_json(const Schedule& schedule) {
  Json entries = Json::array();
  for (const auto& e : schedule.entries) {
    Json item;
    item["job"] = e.job;
    item["step"] = e.step;
    item["machine"] = e.machine;
    item["start"] = e.start;
    item["end"] = e.end;
    item["duration"] = e.duration;
    entries.push_back(std::move(item));
  }
  return entries;
}

Schedule schedule_from_json(const Json& doc) {
  const Json* items = &doc;
  Schedule schedule;
  if (doc.is_object()) {
    if (doc.contains("entries")) items = &doc.at("entries");
    if (doc.contains("provenance")) {
      std::string p = doc.at("provenance").get<std::string>();
      if (p == "repaired") schedule.provenance = Provenance::repaired;
      if (p == "optimized") schedule.provenance = Provenance::optimized;
    }
    if (doc.contains("version")) schedule.version = doc.at("version").get<std::int64_t>();
  }
  if (!items->is_array()) throw SchemaError("schedule document is not an entry list");
  for (const auto& item : *items) {
    ScheduleEntry e;
    try {
      e.job = item.at("job").get<std::string>();
      e.step = item.at("step").get<int>();
      e.machine = item.at("machine").get<std::string>();
      e.start = item.at("start").get<std::int64_t>();
      e.end = item.at("end").get<std::int64_t>();
      e.duration = item.value("duration", e.end - e.start);
    } catch (const nlohmann::json::exception& ex) {
      throw SchemaError(std::string("bad schedule entry: ") + ex.what());
    }
    schedule.entries.push_back(std::move(e));
  }
  return schedule;
}

Json report_to_json(const ValidationReport& report) {
  Json doc;
  doc["valid"] = report.valid;
  doc["errors"] = Json::array();
  for (const auto& err : report.errors) {
    Json item;
    item["code"] = err.code;
    item["message"] = err.message;
    Json scope = Json::object();
    if (err.scope.job) scope["job"] = *err.scope.job;
    if (err.scope.step) scope["step"] = *err.scope.step;
    if (err.scope.machine) scope["machine"] = *err.scope.machine;
    item["scope"] = std::move(scope);
    doc["errors"].push_back(std::move(item));
  }
  doc["warnings"] = report.warnings;
  return doc;
}

}  // namespace alas::jssp

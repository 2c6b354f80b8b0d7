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

#include "alas/lcrp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

namespace alas::lcrp {

namespace {

using jssp::machine_index;
using jssp::machine_name;
using jssp::Provenance;
using jssp::ScheduleEntry;

struct Indexed {
  std::vector<ScheduleEntry> entries;
  std::map<OpKey, int> index;                   // key -> entry position
  std::map<int, std::vector<OpKey>> sequences;  // machine -> keys by start

  static Indexed build(const std::vector<ScheduleEntry>& src) {
    Indexed ix;
    ix.entries = src;
    for (int i = 0; i < static_cast<int>(ix.entries.size()); ++i) {
      const auto& e = ix.entries[i];
      int j = jssp::job_index(e.job);
      int m = machine_index(e.machine);
      if (j < 0 || m < 0) continue;
      ix.index[{j, e.step}] = i;
      ix.sequences[m].push_back({j, e.step});
    }
    for (auto& [m, seq] : ix.sequences) {
      std::stable_sort(seq.begin(), seq.end(), [&](const OpKey& a, const OpKey& b) {
        const auto& ea = ix.entries[ix.index.at(a)];
        const auto& eb = ix.entries[ix.index.at(b)];
        if (ea.start != eb.start) return ea.start < eb.start;
        return a < b;
      });
    }
    return ix;
  }

  ScheduleEntry& at(const OpKey& key) { return entries[index.at(key)]; }
  const ScheduleEntry& at(const OpKey& key) const { return entries[index.at(key)]; }
  bool has(const OpKey& key) const { return index.count(key) != 0; }
};

// Retimes the movable operations to their earliest feasible start given the
// job order and the machine sequences, honoring per-op floors. Fixed
// operations keep their exact times. Kahn order; returns false on a cyclic
// sequence conflict.
bool retime(Indexed& ix, const std::set<OpKey>& movable,
            const std::map<OpKey, std::int64_t>& floors) {
  std::map<OpKey, std::vector<OpKey>> out;
  std::map<OpKey, int> indegree;
  for (const auto& key : movable) indegree[key] = 0;

  auto add_edge = [&](const OpKey& from, const OpKey& to) {
    if (!movable.count(to)) return;
    if (movable.count(from)) {
      out[from].push_back(to);
      indegree[to]++;
    }
  };
  for (const auto& key : movable) {
    OpKey succ{key.job, key.step + 1};
    if (ix.has(succ)) add_edge(key, succ);
  }
  for (const auto& [m, seq] : ix.sequences)
    for (size_t i = 1; i < seq.size(); ++i) add_edge(seq[i - 1], seq[i]);

  std::map<OpKey, OpKey> machine_pred;
  for (const auto& [m, seq] : ix.sequences)
    for (size_t i = 1; i < seq.size(); ++i) machine_pred[seq[i]] = seq[i - 1];

  std::vector<OpKey> queue;
  for (const auto& [key, deg] : indegree)
    if (deg == 0) queue.push_back(key);
  std::sort(queue.begin(), queue.end());

  size_t processed = 0;
  while (!queue.empty()) {
    OpKey key = queue.front();
    queue.erase(queue.begin());
    ++processed;

    auto& e = ix.at(key);
    std::int64_t start = 0;
    OpKey jp{key.job, key.step - 1};
    if (key.step > 1 && ix.has(jp)) start = std::max(start, ix.at(jp).end);
    auto mp = machine_pred.find(key);
    if (mp != machine_pred.end()) start = std::max(start, ix.at(mp->second).end);
    auto fl = floors.find(key);
    if (fl != floors.end()) start = std::max(start, fl->second);
    e.start = start;
    e.end = start + e.duration;

    for (const auto& succ : out[key]) {
      if (--indegree[succ] == 0) {
        auto pos = std::lower_bound(queue.begin(), queue.end(), succ);
        queue.insert(pos, succ);
      }
    }
  }
  return processed == movable.size();
}

// Error scopes resolved to operation keys. Unscoped or non-operation errors
// (missing jobs, coverage gaps) contribute nothing repairable.
std::set<OpKey> scoped_keys(const std::vector<ValidationError>& errors,
                            const Indexed& ix) {
  std::set<OpKey> keys;
  for (const auto& err : errors) {
    if (!err.scope.job || !err.scope.step) continue;
    int j = jssp::job_index(*err.scope.job);
    if (j < 0) continue;
    OpKey key{j, *err.scope.step};
    if (ix.has(key)) keys.insert(key);
  }
  return keys;
}

// Seeds plus transitive dependents (job successor and machine-queue
// successor). pred_hops widens the neighborhood upstream along machine
// queues; each escalation level adds one hop.
std::set<OpKey> dependent_closure(const Indexed& ix, const std::set<OpKey>& seeds,
                                  int pred_hops = 0) {
  std::map<OpKey, OpKey> machine_pred, machine_succ;
  for (const auto& [m, seq] : ix.sequences) {
    for (size_t i = 1; i < seq.size(); ++i) {
      machine_pred[seq[i]] = seq[i - 1];
      machine_succ[seq[i - 1]] = seq[i];
    }
  }
  std::set<OpKey> closure = seeds;
  std::vector<OpKey> frontier(seeds.begin(), seeds.end());

  if (pred_hops > 0) {
    std::set<OpKey> widened = closure;
    for (const auto& seed : seeds) {
      OpKey cur = seed;
      for (int h = 0; h < pred_hops; ++h) {
        auto it = machine_pred.find(cur);
        if (it == machine_pred.end()) break;
        cur = it->second;
        if (widened.insert(cur).second) frontier.push_back(cur);
      }
    }
    closure = widened;
  }

  while (!frontier.empty()) {
    OpKey key = frontier.back();
    frontier.pop_back();
    OpKey js{key.job, key.step + 1};
    if (ix.has(js) && closure.insert(js).second) frontier.push_back(js);
    auto ms = machine_succ.find(key);
    if (ms != machine_succ.end() && closure.insert(ms->second).second)
      frontier.push_back(ms->second);
  }
  return closure;
}

std::int64_t instance_duration(const JsspInstance& instance, const OpKey& key) {
  if (key.job < 0 || key.job >= instance.job_count()) return 1;
  const auto& job = instance.jobs[key.job];
  if (key.step < 1 || key.step > static_cast<int>(job.size())) return 1;
  return job[key.step - 1].duration;
}

std::int64_t schedule_makespan(const std::vector<ScheduleEntry>& entries) {
  std::int64_t best = 0;
  for (const auto& e : entries) best = std::max(best, e.end);
  return best;
}

// Adjacent-swap descent over the given movable set. Deterministic: evaluates
// every candidate and commits the best strict improvement, ties resolved by
// (machine index, queue position). Stops at a local optimum.
void swap_descent(Indexed& ix, const JsspInstance& instance,
                  const std::set<OpKey>& movable,
                  const std::vector<jssp::BreakdownWindow>& downtime,
                  int max_commits) {
  for (int commit = 0; commit < max_commits; ++commit) {
    std::int64_t current = schedule_makespan(ix.entries);
    std::int64_t best_gain = 0;
    int best_machine = -1;
    size_t best_pos = 0;
    Indexed best_candidate;

    for (const auto& [m, seq] : ix.sequences) {
      for (size_t i = 0; i + 1 < seq.size(); ++i) {
        if (!movable.count(seq[i]) || !movable.count(seq[i + 1])) continue;
        Indexed candidate = ix;
        auto& cseq = candidate.sequences[m];
        std::swap(cseq[i], cseq[i + 1]);
        if (!retime(candidate, movable, {})) continue;
        jssp::Schedule probe;
        probe.entries = candidate.entries;
        auto report = jssp::validate_schedule(probe, instance, downtime);
        if (!report.valid) continue;
        std::int64_t gain = current - schedule_makespan(candidate.entries);
        if (gain > best_gain) {
          best_gain = gain;
          best_machine = m;
          best_pos = i;
          best_candidate = std::move(candidate);
        }
      }
    }
    if (best_machine < 0) break;
    ix = std::move(best_candidate);
  }
}

EditRadius radius_between(const std::vector<ScheduleEntry>& before,
                          const std::vector<ScheduleEntry>& after) {
  std::map<std::pair<std::string, int>, const ScheduleEntry*> b;
  for (const auto& e : before) b[{e.job, e.step}] = &e;
  EditRadius radius;
  std::set<std::string> jobs;
  for (const auto& e : after) {
    auto it = b.find({e.job, e.step});
    if (it == b.end()) continue;
    const auto& prev = *it->second;
    if (prev.machine != e.machine || prev.start != e.start || prev.end != e.end) {
      radius.ops_touched++;
      jobs.insert(e.job);
    }
  }
  radius.jobs_touched = static_cast<int>(jobs.size());
  return radius;
}

}  // namespace

WipModel WipModel::from_schedule(const Schedule& committed, double penalty) {
  WipModel model;
  model.penalty_per_unit = penalty;
  for (const auto& e : committed.entries) {
    int j = jssp::job_index(e.job);
    if (j < 0) continue;
    model.committed_starts[{j, e.step}] = e.start;
  }
  return model;
}

RepairResult repair(const Schedule& schedule, const JsspInstance& instance,
                    const std::vector<ValidationError>& errors, int budget,
                    const IterationSink& sink) {
  RepairResult result;
  result.errors_before = static_cast<int>(errors.size());
  Indexed ix = Indexed::build(schedule.entries);

  std::set<OpKey> allowed = dependent_closure(ix, scoped_keys(errors, ix));
  std::vector<ValidationError> current = errors;

  for (int iter = 1; iter <= budget; ++iter) {
    result.iterations_used = iter;

    // Phase I: immediate fixes on the scoped operations.
    for (const auto& err : current) {
      if (!err.scope.job || !err.scope.step) continue;
      int j = jssp::job_index(*err.scope.job);
      OpKey key{j, *err.scope.step};
      if (j < 0 || !ix.has(key) || !allowed.count(key)) continue;
      auto& e = ix.at(key);
      if (err.code == "precedence") {
        OpKey pred{key.job, key.step - 1};
        if (ix.has(pred)) {
          e.start = ix.at(pred).end;  // delay until the previous step ends
          e.end = e.start + e.duration;
        }
      } else if (err.code == "time_order" || err.code == "time_inconsistency") {
        e.duration = instance_duration(instance, key);
        e.end = e.start + e.duration;
      } else if (err.code == "negative_start") {
        e.start = 0;
        e.end = e.duration;
      }
    }

    // Phases II and III: per-job step ordering and per-machine capacity,
    // alternated until the push-right cascade settles.
    int cap = 2 * (instance.job_count() + instance.machine_count) + 4;
    for (int pass = 0; pass < cap; ++pass) {
      bool changed = false;
      for (int j = 0; j < instance.job_count(); ++j) {
        const ScheduleEntry* prev = nullptr;
        for (int k = 1; k <= static_cast<int>(instance.jobs[j].size()); ++k) {
          OpKey key{j, k};
          if (!ix.has(key)) continue;
          auto& e = ix.at(key);
          if (prev && e.start < prev->end && allowed.count(key)) {
            e.start = prev->end;
            e.end = e.start + e.duration;
            changed = true;
          }
          prev = &e;
        }
      }
      for (auto& [m, seq] : ix.sequences) {
        std::stable_sort(seq.begin(), seq.end(), [&](const OpKey& a, const OpKey& b) {
          const auto& ea = ix.at(a);
          const auto& eb = ix.at(b);
          if (ea.start != eb.start) return ea.start < eb.start;
          return a < b;
        });
        for (size_t i = 1; i < seq.size(); ++i) {
          auto& e = ix.at(seq[i]);
          const auto& prev = ix.at(seq[i - 1]);
          if (e.start < prev.end && allowed.count(seq[i])) {
            e.start = prev.end;
            e.end = e.start + e.duration;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }

    // Phase IV: adjacent-swap improvement within the neighborhood. Three
    // sweeps over the makespan-critical machines, at most eight swap
    // evaluations per queue and sweep, scanned from the tail where the
    // makespan is decided. The evaluation bound keeps the per-iteration
    // cost linear in the operation count.
    for (int sweep = 0; sweep < 3; ++sweep) {
      std::int64_t current = schedule_makespan(ix.entries);
      bool improved = false;
      for (const auto& [m, seq] : ix.sequences) {
        if (seq.empty() || ix.at(seq.back()).end != current) continue;
        int evaluations = 0;
        for (size_t r = seq.size() - 1; r-- > 0 && evaluations < 8 && !improved;) {
          if (!allowed.count(seq[r]) || !allowed.count(seq[r + 1])) continue;
          ++evaluations;
          Indexed candidate = ix;
          std::swap(candidate.sequences[m][r], candidate.sequences[m][r + 1]);
          if (!retime(candidate, allowed, {})) continue;
          if (schedule_makespan(candidate.entries) >= current) continue;
          jssp::Schedule probe;
          probe.entries = candidate.entries;
          if (!jssp::validate_schedule(probe, instance).valid) continue;
          ix = std::move(candidate);
          improved = true;
        }
        if (improved) break;
      }
      if (!improved) break;
    }

    // Phase V: final cleanup.
    for (const auto& key : allowed) {
      if (!ix.has(key)) continue;
      auto& e = ix.at(key);
      if (e.start < 0) e.start = 0;
      if (e.start >= e.end) {
        e.duration = instance_duration(instance, key);
        e.end = e.start + e.duration;
      }
    }

    jssp::Schedule probe;
    probe.entries = ix.entries;
    current = jssp::validate_schedule(probe, instance).errors;
    if (sink) sink(iter, probe, static_cast<int>(current.size()));
    if (current.empty()) break;
  }

  result.errors_after = static_cast<int>(current.size());
  result.schedule.entries = ix.entries;
  result.schedule.provenance = Provenance::repaired;
  result.schedule.version = schedule.version;
  result.edit_radius = radius_between(schedule.entries, ix.entries);
  return result;
}

RepairResult repair_with_escalation(const Schedule& schedule,
                                    const JsspInstance& instance, int budget,
                                    jssp::PlannerRule rule, std::uint64_t seed,
                                    int* enlargements_out) {
  auto errors = jssp::validate_schedule(schedule, instance).errors;
  RepairResult result = repair(schedule, instance, errors, budget);
  int enlargements = 0;
  while (result.errors_after > 0 && enlargements < 3) {
    ++enlargements;
    Indexed ix = Indexed::build(result.schedule.entries);
    auto residual = jssp::validate_schedule(result.schedule, instance).errors;
    std::set<OpKey> widened =
        dependent_closure(ix, scoped_keys(residual, ix), enlargements);
    // Re-run the phase loop against the widened neighborhood by seeding the
    // error list with every widened op marked as a capacity suspect.
    std::vector<ValidationError> seeded = residual;
    for (const auto& key : widened) {
      if (!ix.has(key)) continue;
      const auto& e = ix.at(key);
      seeded.push_back({"machine_overlap", "neighborhood enlargement",
                        {e.job, e.step, e.machine}});
    }
    RepairResult next = repair(result.schedule, instance, seeded, budget);
    next.errors_before = result.errors_before;
    next.iterations_used += result.iterations_used;
    result = next;
  }
  if (result.errors_after > 0) {
    Schedule fresh = optimize(jssp::seed_plan(instance, rule, seed), instance);
    RepairResult fallback;
    fallback.errors_before = result.errors_before;
    fallback.errors_after = 0;
    fallback.iterations_used = result.iterations_used;
    fallback.schedule = std::move(fresh);
    fallback.schedule.provenance = Provenance::repaired;
    fallback.edit_radius = radius_between(schedule.entries, fallback.schedule.entries);
    fallback.fell_back_to_global = true;
    result = fallback;
  }
  if (enlargements_out) *enlargements_out = enlargements;
  return result;
}

RepairResult local_compensate(const Schedule& schedule, const JsspInstance& instance,
                              const DisruptionEvent& event, const WipModel& wip,
                              std::optional<std::int64_t> hard_deadline) {
  std::vector<jssp::BreakdownWindow> downtime;
  if (event.kind == jssp::DisruptionKind::machineBreakdown && event.breakdown)
    downtime.push_back(*event.breakdown);

  RepairResult result;
  result.errors_before =
      static_cast<int>(jssp::validate_schedule(schedule, instance, downtime).errors.size());

  auto impact = jssp::apply_disruption(schedule, instance, event);
  Indexed ix = Indexed::build(schedule.entries);

  // A duration shock changes the op's effective duration before retiming.
  if (event.kind == jssp::DisruptionKind::durationShock && event.shock) {
    OpKey key{event.shock->job, event.shock->step};
    if (ix.has(key)) {
      auto& e = ix.at(key);
      e.duration = std::max<std::int64_t>(1, e.duration + event.shock->delta);
      e.end = e.start + e.duration;
    }
  }

  std::set<OpKey> movable(impact.affected.begin(), impact.affected.end());
  std::map<OpKey, std::int64_t> floors;
  for (const auto& key : movable) {
    // No early moves: the committed start is a hard floor in phase 1.
    auto it = wip.committed_starts.find(key);
    floors[key] = it != wip.committed_starts.end() ? it->second : ix.at(key).start;
  }
  if (!downtime.empty()) {
    const auto& w = downtime.front();
    for (const auto& key : movable) {
      const auto& e = ix.at(key);
      if (machine_index(e.machine) == w.machine && e.start < w.to && e.end > w.from)
        floors[key] = std::max(floors[key], w.to);
    }
  }
  retime(ix, movable, floors);

  result.schedule.entries = ix.entries;
  result.schedule.provenance = Provenance::repaired;
  result.schedule.version = schedule.version;
  result.errors_after = static_cast<int>(
      jssp::validate_schedule(result.schedule, instance, downtime).errors.size());
  result.iterations_used = 1;
  result.edit_radius = radius_between(schedule.entries, ix.entries);

  if (hard_deadline && schedule_makespan(ix.entries) > *hard_deadline)
    throw InfeasibleLocally("right-shift compensation exceeds the hard deadline " +
                            std::to_string(*hard_deadline));
  return result;
}

RepairResult queue_reorder(const Schedule& schedule, const JsspInstance& instance,
                           const DisruptionEvent& event, const WipModel& wip) {
  RepairResult result;
  result.schedule = schedule;
  result.iterations_used = 1;

  std::vector<jssp::BreakdownWindow> downtime;
  int machine = -1;
  std::int64_t boundary = event.at_time;
  if (event.kind == jssp::DisruptionKind::machineBreakdown && event.breakdown) {
    downtime.push_back(*event.breakdown);
    machine = event.breakdown->machine;
    boundary = event.breakdown->from;
  } else if (event.shock) {
    OpKey key{event.shock->job, event.shock->step};
    for (const auto& e : schedule.entries)
      if (jssp::job_index(e.job) == key.job && e.step == key.step)
        machine = machine_index(e.machine);
  }
  if (machine < 0) return result;

  Indexed ix = Indexed::build(schedule.entries);
  auto seq_it = ix.sequences.find(machine);
  if (seq_it == ix.sequences.end()) return result;

  // Pending segment: operations on the disrupted machine that had not
  // completed when the disruption hit.
  std::vector<OpKey> segment;
  std::int64_t base = downtime.empty() ? boundary : downtime.front().to;
  for (const auto& key : seq_it->second) {
    const auto& e = ix.at(key);
    if (e.start >= boundary)
      segment.push_back(key);
    else
      base = std::max(base, e.end);
  }
  if (segment.size() < 2) return result;

  // Remaining work of the op's job from this step onward; ops feeding long
  // chains go first, terminal ops sink to the tail.
  auto remaining_work = [&](const OpKey& key) {
    std::int64_t total = 0;
    for (int k = key.step; k <= static_cast<int>(instance.jobs[key.job].size()); ++k) {
      OpKey cur{key.job, k};
      total += ix.has(cur) ? ix.at(cur).duration : instance_duration(instance, cur);
    }
    return total;
  };
  std::vector<OpKey> reordered = segment;
  std::stable_sort(reordered.begin(), reordered.end(),
                   [&](const OpKey& a, const OpKey& b) {
                     std::int64_t ra = remaining_work(a), rb = remaining_work(b);
                     if (ra != rb) return ra > rb;
                     return a < b;
                   });
  if (reordered == segment) return result;

  // WIP accounting: an operation already running when the disruption hit and
  // now overtaken in its queue consumes one unit (or the crossing distance
  // when distance weighting is on).
  std::map<OpKey, size_t> old_pos, new_pos;
  for (size_t i = 0; i < segment.size(); ++i) old_pos[segment[i]] = i;
  for (size_t i = 0; i < reordered.size(); ++i) new_pos[reordered[i]] = i;
  int units = 0;
  for (const auto& key : segment) {
    auto it = wip.committed_starts.find(key);
    bool is_wip = it != wip.committed_starts.end() && it->second < boundary;
    if (!is_wip) continue;
    bool overtaken = false;
    std::int64_t crossing = 0;
    for (const auto& other : segment) {
      if (old_pos[other] > old_pos[key] && new_pos[other] < new_pos[key]) {
        overtaken = true;
        auto oc = wip.committed_starts.find(other);
        std::int64_t other_committed =
            oc != wip.committed_starts.end() ? oc->second : ix.at(other).start;
        crossing = std::max(crossing, it->second > other_committed
                                          ? it->second - other_committed
                                          : std::int64_t{1});
      }
    }
    if (overtaken) units += wip.distance_weighted ? static_cast<int>(crossing) : 1;
  }

  std::int64_t gap =
      units > 0 ? static_cast<std::int64_t>(std::ceil(wip.penalty_per_unit * units)) : 0;

  Indexed candidate = ix;
  candidate.sequences[machine].clear();
  for (const auto& key : seq_it->second) {
    const auto& e = ix.at(key);
    if (e.start < boundary) candidate.sequences[machine].push_back(key);
  }
  for (const auto& key : reordered) candidate.sequences[machine].push_back(key);

  std::set<OpKey> movable(segment.begin(), segment.end());
  std::set<OpKey> closure = dependent_closure(ix, movable);
  movable.insert(closure.begin(), closure.end());

  std::map<OpKey, std::int64_t> floors;
  floors[reordered.front()] = base + gap;  // changeover gap before the segment
  for (const auto& key : segment)
    floors[key] = std::max(floors.count(key) ? floors[key] : 0, base + gap);
  if (!retime(candidate, movable, floors)) return result;

  jssp::Schedule probe;
  probe.entries = candidate.entries;
  auto report = jssp::validate_schedule(probe, instance, downtime);
  std::int64_t before_span = schedule_makespan(ix.entries);
  std::int64_t after_span = schedule_makespan(candidate.entries);
  if (!report.valid || after_span >= before_span) return result;  // no net gain

  result.schedule.entries = candidate.entries;
  result.schedule.provenance = Provenance::repaired;
  result.wip_units = units;
  result.edit_radius = radius_between(schedule.entries, candidate.entries);
  return result;
}

Schedule optimize(const Schedule& schedule, const JsspInstance& instance) {
  auto report = jssp::validate_schedule(schedule, instance);
  if (!report.valid)
    throw PreconditionViolated("optimize requires a feasible schedule; found " +
                               std::to_string(report.errors.size()) + " errors");

  Indexed ix = Indexed::build(schedule.entries);
  std::set<OpKey> movable;
  for (const auto& [key, pos] : ix.index) movable.insert(key);

  retime(ix, movable, {});  // left-shift compaction
  swap_descent(ix, instance, movable, {},
               8 * std::max(1, instance.machine_count * instance.job_count()));
  retime(ix, movable, {});

  Schedule out;
  out.entries = ix.entries;
  out.provenance = Provenance::optimized;
  out.version = schedule.version;
  return out;
}

EditRadius edit_radius(const Schedule& before, const Schedule& after) {
  std::set<std::pair<std::string, int>> a, b;
  for (const auto& e : before.entries) a.insert({e.job, e.step});
  for (const auto& e : after.entries) b.insert({e.job, e.step});
  if (a != b)
    throw KeyMismatch("schedules cover different (job, step) sets");
  return radius_between(before.entries, after.entries);
}

Schedule global_recompute(const Schedule& schedule, const JsspInstance& instance,
                          const DisruptionEvent& event, jssp::PlannerRule rule,
                          std::uint64_t seed) {
  std::int64_t t = event.at_time;
  int broken = -1;
  std::vector<jssp::BreakdownWindow> downtime;
  if (event.kind == jssp::DisruptionKind::machineBreakdown && event.breakdown) {
    broken = event.breakdown->machine;
    t = event.breakdown->from;
    downtime.push_back(*event.breakdown);
  }

  Indexed ix = Indexed::build(schedule.entries);
  std::set<OpKey> fixed;
  for (const auto& [key, pos] : ix.index) {
    const auto& e = ix.entries[pos];
    int m = machine_index(e.machine);
    bool in_progress = e.start < t && e.end > t;
    if (e.end <= t) fixed.insert(key);
    // An op running on an unbroken machine is left to finish.
    else if (in_progress && m != broken)
      fixed.insert(key);
  }
  if (fixed.size() == ix.index.size()) return schedule;  // nothing to redo

  // Residual list scheduling over the unfixed operations.
  const int J = instance.job_count();
  std::vector<int> next_step(J, 0);
  std::vector<std::int64_t> job_ready(J, 0);
  std::vector<std::int64_t> machine_avail(instance.machine_count, 0);
  for (int j = 0; j < J; ++j) {
    for (int k = 1; k <= static_cast<int>(instance.jobs[j].size()); ++k) {
      if (fixed.count({j, k})) {
        next_step[j] = k;
        job_ready[j] = std::max(job_ready[j], ix.at({j, k}).end);
      } else {
        break;  // job order: first unfixed step stops the prefix
      }
    }
  }
  for (const auto& key : fixed) {
    const auto& e = ix.at(key);
    int m = machine_index(e.machine);
    if (m >= 0) machine_avail[m] = std::max(machine_avail[m], e.end);
  }
  for (auto& avail : machine_avail) avail = std::max(avail, t);
  if (broken >= 0)
    machine_avail[broken] = std::max(machine_avail[broken], event.breakdown->to);

  std::mt19937_64 rng(seed);
  std::vector<ScheduleEntry> rebuilt;
  for (const auto& key : fixed) rebuilt.push_back(ix.at(key));

  int remaining = 0;
  for (int j = 0; j < J; ++j)
    remaining += static_cast<int>(instance.jobs[j].size()) - next_step[j];
  while (remaining > 0) {
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
      case jssp::PlannerRule::spt:
        for (int j : candidates)
          if (instance.jobs[j][next_step[j]].duration <
              instance.jobs[pick][next_step[pick]].duration)
            pick = j;
        break;
      case jssp::PlannerRule::lpt:
        for (int j : candidates)
          if (instance.jobs[j][next_step[j]].duration >
              instance.jobs[pick][next_step[pick]].duration)
            pick = j;
        break;
      case jssp::PlannerRule::fifo:
        break;
      case jssp::PlannerRule::random:
        pick = candidates[rng() % candidates.size()];
        break;
    }
    const auto& op = instance.jobs[pick][next_step[pick]];
    ScheduleEntry e;
    e.job = jssp::job_name(pick);
    e.step = next_step[pick] + 1;
    e.machine = machine_name(op.machine);
    e.start = earliest;
    e.end = earliest + op.duration;
    e.duration = op.duration;
    rebuilt.push_back(e);
    job_ready[pick] = e.end;
    machine_avail[op.machine] = e.end;
    next_step[pick]++;
    --remaining;
  }

  Indexed out = Indexed::build(rebuilt);
  std::set<OpKey> movable;
  for (const auto& [key, pos] : out.index)
    if (!fixed.count(key)) movable.insert(key);
  swap_descent(out, instance, movable, downtime,
               4 * std::max(1, instance.machine_count));

  Schedule final_schedule;
  final_schedule.entries = out.entries;
  final_schedule.provenance = Provenance::optimized;
  final_schedule.version = schedule.version;
  return final_schedule;
}

Json repair_result_to_json(const RepairResult& result) {
  Json doc;
  doc["schedule"] = jssp::schedule_to_json(result.schedule);
  doc["errorsBefore"] = result.errors_before;
  doc["errorsAfter"] = result.errors_after;
  doc["iterationsUsed"] = result.iterations_used;
  doc["editRadius"] = {{"opsTouched", result.edit_radius.ops_touched},
                       {"jobsTouched", result.edit_radius.jobs_touched}};
  doc["fellBackToGlobal"] = result.fell_back_to_global;
  doc["wipUnits"] = result.wip_units;
  return doc;
}

}  // namespace alas::lcrp

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
// Shared fixtures: the 5x3 white-box instance with its hand-checked static
// schedule, a tiny 2x2 instance whose optimum (6) was frozen from a hand
// enumeration of all six job-order-consistent sequences, plus random
// instance/corruption generators used by the property suites.

#ifndef ALAS_TESTS_SUPPORT_FIXTURES_HPP_
#define ALAS_TESTS_SUPPORT_FIXTURES_HPP_

#include <random>
#include <string>
#include <vector>

#include "alas/jssp.hpp"

namespace alas::testsupport {

inline const char* kTiny2x2 = "2 2\n0 2 1 3\n1 1 0 4\n";
inline constexpr std::int64_t kTiny2x2Optimum = 6;  // hand enumeration, 6 sequences

// 5 jobs x 3 machines; durations transcribed from the white-box Gantt chart.
inline const char* kWhitebox5x3 =
    "5 3\n"
    "0 3 1 2 2 2\n"   // Job1: (M0,3) (M1,2) (M2,2)
    "0 2 2 1 1 4\n"   // Job2: (M0,2) (M2,1) (M1,4)
    "1 4 2 3 0 2\n"   // Job3: (M1,4) (M2,3) (M0,2)
    "2 2 0 1 1 3\n"   // Job4: (M2,2) (M0,1) (M1,3)
    "1 2 0 4 2 1\n";  // Job5: (M1,2) (M0,4) (M2,1)

inline jssp::ScheduleEntry make_entry(const char* job, int step, const char* machine,
                                      std::int64_t start, std::int64_t end) {
  return {job, step, machine, start, end, end - start};
}

// Static baseline, makespan 19.
inline jssp::Schedule whitebox_static_schedule() {
  jssp::Schedule s;
  s.entries = {
      make_entry("Job2", 1, "Machine0", 0, 2),
      make_entry("Job4", 2, "Machine0", 2, 3),
      make_entry("Job1", 1, "Machine0", 3, 6),
      make_entry("Job5", 2, "Machine0", 6, 10),
      make_entry("Job3", 3, "Machine0", 17, 19),
      make_entry("Job5", 1, "Machine1", 0, 2),
      make_entry("Job2", 3, "Machine1", 3, 7),
      make_entry("Job4", 3, "Machine1", 7, 10),
      make_entry("Job3", 1, "Machine1", 10, 14),
      make_entry("Job1", 2, "Machine1", 14, 16),
      make_entry("Job4", 1, "Machine2", 0, 2),
      make_entry("Job2", 2, "Machine2", 2, 3),
      make_entry("Job5", 3, "Machine2", 10, 11),
      make_entry("Job3", 2, "Machine2", 14, 17),
      make_entry("Job1", 3, "Machine2", 17, 19),
  };
  return s;
}

// Right-shift compensation of the M1 [5,8) breakdown, makespan 24; derived
// by propagating the queue shift by hand.
inline jssp::Schedule whitebox_compensated_schedule() {
  jssp::Schedule s = whitebox_static_schedule();
  auto set = [&](const char* job, int step, std::int64_t start, std::int64_t end) {
    for (auto& e : s.entries)
      if (e.job == job && e.step == step) {
        e.start = start;
        e.end = end;
      }
  };
  set("Job2", 3, 8, 12);
  set("Job4", 3, 12, 15);
  set("Job3", 1, 15, 19);
  set("Job1", 2, 19, 21);
  set("Job3", 2, 19, 22);
  set("Job3", 3, 22, 24);
  set("Job1", 3, 22, 24);
  s.provenance = jssp::Provenance::repaired;
  return s;
}

// Final schedule after queue reordering with WIP penalty 1: the pending M1
// queue re-sequenced by most work remaining behind a one-unit changeover
// gap. Makespan 22, derived by hand.
inline jssp::Schedule whitebox_reordered_schedule() {
  jssp::Schedule s = whitebox_static_schedule();
  auto set = [&](const char* job, int step, std::int64_t start, std::int64_t end) {
    for (auto& e : s.entries)
      if (e.job == job && e.step == step) {
        e.start = start;
        e.end = end;
      }
  };
  set("Job3", 1, 9, 13);
  set("Job1", 2, 13, 15);
  set("Job2", 3, 15, 19);
  set("Job4", 3, 19, 22);
  set("Job3", 2, 13, 16);
  set("Job1", 3, 16, 18);
  set("Job3", 3, 16, 18);
  s.provenance = jssp::Provenance::repaired;
  return s;
}

inline jssp::JsspInstance random_instance(std::mt19937_64& rng, int jobs, int machines,
                                          int ops_per_job, std::int64_t max_duration = 9) {
  jssp::JsspInstance instance;
  instance.name = "random";
  instance.machine_count = machines;
  for (int j = 0; j < jobs; ++j) {
    std::vector<jssp::Operation> ops;
    for (int k = 0; k < ops_per_job; ++k) {
      jssp::Operation op;
      op.machine = static_cast<int>(rng() % machines);
      op.duration = 1 + static_cast<std::int64_t>(rng() % max_duration);
      ops.push_back(op);
    }
    instance.jobs.push_back(std::move(ops));
  }
  return instance;
}

enum class Corruption { precedence_swap, double_book, capacity_overflow, deadline_miss };

// Applies one structural fault of the given category in place. Returns false
// when the schedule offers no suitable target.
inline bool corrupt(jssp::Schedule& schedule, const jssp::JsspInstance& instance,
                    Corruption kind, std::mt19937_64& rng) {
  auto& entries = schedule.entries;
  switch (kind) {
    case Corruption::precedence_swap: {
      std::vector<size_t> later_steps;
      for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].step > 1) later_steps.push_back(i);
      if (later_steps.empty()) return false;
      auto& e = entries[later_steps[rng() % later_steps.size()]];
      for (const auto& prev : entries) {
        if (prev.job == e.job && prev.step == e.step - 1) {
          e.start = std::max<std::int64_t>(0, prev.end - 1 - static_cast<std::int64_t>(
                                                               rng() % 3));
          e.end = e.start + e.duration;
          return true;
        }
      }
      return false;
    }
    case Corruption::double_book: {
      for (int attempt = 0; attempt < 64; ++attempt) {
        const auto& a = entries[rng() % entries.size()];
        for (auto& b : entries) {
          if (&b == &a || b.machine != a.machine) continue;
          b.start = a.start;
          b.end = b.start + b.duration;
          return true;
        }
      }
      return false;
    }
    case Corruption::capacity_overflow: {
      // Stretch an operation over its machine successor, keeping end - start
      // consistent with the stretched duration.
      struct Slot {
        size_t idx;
        std::int64_t next_start;
      };
      std::vector<Slot> slots;
      for (size_t i = 0; i < entries.size(); ++i) {
        std::int64_t next = -1;
        for (const auto& other : entries)
          if (other.machine == entries[i].machine && other.start >= entries[i].end)
            next = next < 0 ? other.start : std::min(next, other.start);
        if (next >= 0) slots.push_back({i, next});
      }
      if (slots.empty()) return false;
      auto& slot = slots[rng() % slots.size()];
      auto& e = entries[slot.idx];
      e.end = slot.next_start + 1 + static_cast<std::int64_t>(rng() % 2);
      e.duration = e.end - e.start;
      return true;
    }
    case Corruption::deadline_miss: {
      size_t latest = 0;
      for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].end > entries[latest].end) latest = i;
      auto& e = entries[latest];
      e.start += instance.total_duration() + 1;
      e.end = e.start + e.duration;
      return true;
    }
  }
  return false;
}

}  // namespace alas::testsupport

#endif  // ALAS_TESTS_SUPPORT_FIXTURES_HPP_

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
// Command-line surface: solve, validate, repair, disrupt, convert, replay,
// report. Exit codes: 0 success, 1 usage error, 2 validation failure,
// 3 pipeline halted.

#ifndef ALAS_CLI_HPP_
#define ALAS_CLI_HPP_

#include <iostream>
#include <string>
#include <vector>

#include "alas/json.hpp"

namespace alas::cli {

int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);
int dispatch(int argc, const char* const* argv);

// Reads every *.result.json under results_dir and writes report.csv (one row
// per run) plus gantt.json (per-machine interval tracks with downtime) into
// out_dir. Throws NoResults when the directory holds none.
struct ReportPaths {
  std::string csv;
  std::string gantt;
};
ReportPaths emit_report(const std::string& results_dir, const std::string& out_dir);

}  // namespace alas::cli

#endif  // ALAS_CLI_HPP_

// Copyright 2026 The SCST Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is 0 only if every selected criterion passes.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "criteria.h"

using scst::acceptance::Experiments;
using scst::acceptance::Verdict;

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only;
  std::string workdir = "acceptance_work";
  app.add_option("--only", only, "criteria to run (default: all)")
      ->delimiter(',')
      ->check(CLI::Range(1, 9));
  app.add_option("--workdir", workdir, "directory for datasets, checkpoints and CSVs");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };

  Experiments experiments(workdir);
  const std::vector<std::pair<int, std::function<Verdict()>>> checks = {
      {1, scst::acceptance::gradient_correctness},
      {2, scst::acceptance::estimator_unbiasedness},
      {3, scst::acceptance::metric_oracles},
      {4, scst::acceptance::eos_conventions},
      {5, scst::acceptance::beam_correctness},
      {6, [&] { return experiments.training_effectiveness(); }},
      {7, [&] { return experiments.estimator_comparison(); }},
      {8, [&] { return experiments.metric_diagonal(); }},
      {9, [&] { return experiments.determinism(); }},
  };

  std::vector<Verdict> verdicts;
  for (const auto& [id, run] : checks) {
    if (!wanted(id)) continue;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.id = id;
      v.name = "criterion " + std::to_string(id);
      v.pass = false;
      v.detail = std::string("aborted: ") + e.what();
    }
    std::printf("%s  %d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", v.id, v.name.c_str(),
                v.detail.c_str(), v.seconds);
    std::fflush(stdout);
    verdicts.push_back(v);
  }

  std::ofstream summary(std::filesystem::path(workdir) / "acceptance_summary.csv");
  summary << "criterion,name,result,seconds\n";
  int failed = 0;
  for (const Verdict& v : verdicts) {
    summary << v.id << "," << v.name << "," << (v.pass ? "PASS" : "FAIL") << "," << v.seconds
            << "\n";
    failed += !v.pass;
  }
  std::printf("%zu criteria, %d failed\n", verdicts.size(), failed);
  return failed == 0 ? 0 : 1;
}

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cpks/config.hpp"

namespace cpks::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  /// Where the determinism check writes its two runs. Empty: a directory
  /// under the system temp path.
  std::filesystem::path scratch_dir;
  /// Criteria to run; empty runs all of 1..10.
  std::vector<int> only;
};

/// Configurations of the two reference experiments.
RunConfig suppression_config();
RunConfig blowup_config();

/// Runs the selected criteria in order, reporting each result as it finishes.
/// A criterion that throws is reported as failed with the exception text.
std::vector<CriterionResult> run(const Options& options,
                                 const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  4  suppression run: ..." on one line.
std::string format(const CriterionResult& result);

}  // namespace cpks::acceptance

#pragma once

// Executes the tasks of a scenario and writes CSV results, optional SVG
// figures and a manifest.json into an output directory.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "superlattice/scenario.hpp"

namespace superlattice {

enum ExitCode : int { kExitSuccess = 0, kExitValidation = 1, kExitComputation = 2, kExitRegression = 3 };

struct RunOptions {
  std::filesystem::path output_dir;  // empty: the scenario's output_dir, else the working directory
  ExecutionOptions exec;
  std::optional<bool> emit_plots;  // overrides the scenario
};

struct TaskRecord {
  std::string name;
  TaskType type = TaskType::pattern;
  bool ok = false;
  std::vector<std::string> files;  // relative to the output directory
  double seconds = 0.0;
  std::string error;
};

struct RunResult {
  int exit_code = kExitSuccess;
  std::filesystem::path output_dir;
  std::vector<TaskRecord> tasks;  // completed tasks, then the failing one if any
  std::string error;
  double wall_time = 0.0;  // s
};

// Validates, then runs tasks in order. The first failing task stops the run;
// the manifest then lists the tasks finished so far and the error.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

std::string format_hash(std::uint64_t hash);

}  // namespace superlattice

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vrdqn/env.hpp"
#include "vrdqn/optim.hpp"
#include "vrdqn/trainer.hpp"

namespace vrdqn {

// One multi-seed sweep: every (algo, seed) cell of one task.
struct ExperimentSpec {
  TaskId task = TaskId::MountainCar;
  std::vector<Algo> algos;
  std::vector<std::uint64_t> seeds;
  TaskConfig base;  // per-task defaults with overrides applied; seed is set
                    // per cell at run time
  std::filesystem::path out_dir = "runs";
  int jobs = 1;
  bool quiet = false;
};

// Ordered key = value pairs; '#' starts a comment, blank lines are skipped.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Syntax only; value validation happens in make_spec.
ConfigEntries parse_config_file(const std::filesystem::path& path);
ConfigEntries parse_config_text(const std::string& text);

// Builds a spec from file entries plus higher-precedence overrides (CLI
// flags). The task must appear in one of the two; unspecified keys fall back
// to the task's defaults. Throws std::invalid_argument naming the key for an
// unknown key or a value of the wrong type.
ExperimentSpec make_spec(const ConfigEntries& file_entries,
                         const ConfigEntries& overrides);

// make_spec over the file alone.
ExperimentSpec load_config(const std::filesystem::path& path);

}  // namespace vrdqn

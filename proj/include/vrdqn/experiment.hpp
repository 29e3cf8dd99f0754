#pragma once

#include <string>
#include <vector>

#include "vrdqn/config.hpp"
#include "vrdqn/trainer.hpp"

namespace vrdqn {

// Across-seed aggregate for one checkpoint (epoch index) of one (task, algo)
// cell. Mean and population std over the seeds that reached the checkpoint.
struct AggregateRow {
  long epoch = 0;
  double env_step_mean = 0.0;
  int n_seeds = 0;
  double avg_reward_mean = 0.0;
  double avg_reward_std = 0.0;
  double window_avg_reward_100_mean = 0.0;
  double window_avg_reward_100_std = 0.0;
  double episode_length_mean = 0.0;
  double episode_length_std = 0.0;
};

std::vector<AggregateRow> aggregate_rows(
    const std::vector<const std::vector<LogRow>*>& runs);

// CSV bodies (header + rows, '\n' line ends, '.' decimal separator).
std::string run_log_csv(const std::vector<LogRow>& rows);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::string diagnostics_csv_header();
std::string diagnostics_csv_rows(const std::vector<DiagRow>& rows,
                                 const std::string& algo,
                                 std::uint64_t seed);

// Runs every (algo, seed) cell of the sweep and writes, under spec.out_dir:
//   <task>_<algo>_seed<seed>.csv         per-run log
//   <task>_<algo>_seed<seed>_params.bin  final parameters
//   <task>_<algo>_aggregate.csv          across-seed mean/std per checkpoint
//   <task>_diagnostics.csv               gradient-std / anchor-distance rows
// A failing cell is reported and skipped; the return value is 0 only when
// every cell succeeded. Cells run jobs-wide in parallel; all aggregation is
// a post-pass.
int run_experiment(const ExperimentSpec& spec);

// The anchor-quality oracle experiment: for each seed, one recorded svrg run
// plus its exact-anchor re-execution. Writes per-seed logs for both arms,
// per-arm aggregates, and <task>_exact_anchor_summary.csv with the final
// average reward of each arm per seed.
int run_exact_anchor_experiment(const ExperimentSpec& spec);

}  // namespace vrdqn

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vrdqn/env.hpp"
#include "vrdqn/optim.hpp"
#include "vrdqn/qnet.hpp"
#include "vrdqn/replay.hpp"
#include "vrdqn/rng.hpp"
#include "vrdqn/transition.hpp"

namespace vrdqn {

// One row of the experimental-setup table plus the exploration, replay and
// diagnostic settings. defaults(task) fills the per-task values.
struct TaskConfig {
  int hidden_nodes = 20;
  int hidden_layers = 1;   // "three-layer" read as one hidden layer
  double alpha = 1e-3;     // Adam step size
  double eta = 1e-2;       // inner step size
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 64;     // N, transitions per epoch
  int inner_iters = 16;    // M
  double gamma = 0.9;

  enum class BudgetUnit { Steps, Episodes };
  long budget = 100000;
  BudgetUnit budget_unit = BudgetUnit::Steps;

  int learn_freq = 16;     // env steps between epochs
  double eps_start = 0.1;
  double eps_end = 0.001;
  int replay_capacity = 10000;
  std::uint64_t seed = 0;

  double adam_eps = 1e-8;
  AdamState::Denominator adam_denominator =
      AdamState::Denominator::ScalarNorm;
  // Gradient fed to the Adam moments: the last single-transition gradient
  // g_M (default) or the last recursive estimate delta_M (ablation).
  enum class AdamGradient { LastGrad, LastDelta };
  AdamGradient adam_gradient = AdamGradient::LastGrad;

  bool shaped_rewards = true;  // false: train on the raw env rewards
  bool diagnostics = true;     // gradient-std / anchor-distance collection

  static TaskConfig defaults(TaskId task);
};

// Throws std::invalid_argument when a field is out of range.
void validate(const TaskConfig& cfg);

// Linear ramp from eps_start at step 0 to eps_end at total_steps, clamped
// beyond. Throws if total_steps <= 0.
double epsilon_schedule(long step, long total_steps, double eps_start = 0.1,
                        double eps_end = 0.001);

// With probability epsilon a uniform action, otherwise the greedy argmax;
// ties break to the lowest index.
int select_action(std::span<const double> qvalues, double epsilon, Rng& rng);

// Per-epoch metrics row.
struct LogRow {
  long env_step = 0;
  long epoch = 0;
  long episode = 0;
  double avg_reward = 0.0;             // see run_training
  double window_avg_reward_100 = 0.0;  // mean over the last 100 units
  long episode_length = 0;             // most recently completed episode
  double epsilon = 0.0;
  double delta_norm_mean = 0.0;
  long ifo_cumulative = 0;
};

// Gradient-diagnostic checkpoint (every 1,000 env steps).
struct DiagRow {
  long checkpoint_step = 0;
  double grad_std_sum = 0.0;
  // mean per-epoch anchor distance since the previous checkpoint; NaN where
  // no anchor exists (sgd) or no epoch ran in the window
  double anchor_distance_mean = 0.0;
};

// Everything needed to re-execute the run's optimization on identical data:
// the env transitions in order plus, per epoch, the sampled batch (as push
// ids) and the inner-loop picks.
struct EpochDraws {
  std::vector<long> batch_ids;   // indices into RunRecord::transitions
  std::vector<int> inner_draws;  // indices into the batch
};
struct RunRecord {
  std::vector<Transition> transitions;
  std::vector<EpochDraws> epochs;
};

struct RunResult {
  std::vector<LogRow> rows;
  ParamVector final_params;
  RunRecord record;
  std::vector<DiagRow> diag_rows;
  // one entry per epoch: mean distance between the anchor in use and the
  // exact batch gradient at the current inner parameters (NaN for sgd)
  std::vector<double> epoch_anchor_distance;
};

// Parameters the run starts from (exposed so the budget-0 contract is
// checkable).
ParamVector initial_params_for(const TaskConfig& cfg, TaskId task);

// The online loop: epsilon-greedy interaction on the live Q-network, FIFO
// replay, one optimizer epoch on a fresh batch of batch_size transitions
// every learn_freq env steps (once the buffer holds batch_size), metrics per
// epoch, gradient diagnostics every 1,000 steps. Fully determined by
// (cfg, algo, task).
RunResult run_training(const TaskConfig& cfg, Algo algo, TaskId task);

// Same loop, but every epoch takes its batch and inner-loop picks from
// `schedule` instead of sampling. With AnchorMode::Recorded this reproduces
// the recorded run bit for bit; with AnchorMode::WholeRecord the anchor is
// computed over every transition in the schedule (the oracle view). Svrg
// only. Throws when the schedule is missing epochs the run needs.
enum class AnchorMode { Recorded, WholeRecord };
RunResult run_training_replayed(const TaskConfig& cfg, Algo algo, TaskId task,
                                const RunRecord& schedule, AnchorMode mode);

}  // namespace vrdqn

#include "vrdqn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "vrdqn/diagnostics.hpp"

namespace vrdqn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// rng stream tags; distinct streams keep interaction and optimization draws
// independent so a recorded run can be replayed exactly
enum : std::uint64_t {
  kStreamInit = 1,
  kStreamEnvSeeds = 2,
  kStreamAction = 3,
  kStreamBatch = 4,
  kStreamInner = 5,
};

constexpr long kDiagCadence = 1000;  // env steps between gradient checkpoints

// Average-reward bookkeeping. Step-budget tasks track the running mean of the
// per-step reward; CartPole tracks the mean return per completed episode.
class MetricTracker {
 public:
  explicit MetricTracker(bool per_episode) : per_episode_(per_episode) {}

  void on_step(double reward) {
    ++steps_;
    step_reward_sum_ += reward;
    episode_return_ += reward;
    ++episode_len_;
    if (!per_episode_) push_window(reward);
  }

  void on_episode_end() {
    ++episodes_done_;
    episode_return_sum_ += episode_return_;
    last_episode_len_ = episode_len_;
    if (per_episode_) push_window(episode_return_);
    episode_return_ = 0.0;
    episode_len_ = 0;
  }

  double avg_reward() const {
    if (per_episode_)
      return episodes_done_ > 0
                 ? episode_return_sum_ / static_cast<double>(episodes_done_)
                 : 0.0;
    return steps_ > 0 ? step_reward_sum_ / static_cast<double>(steps_) : 0.0;
  }

  double window_avg() const {
    if (window_.empty()) return 0.0;
    const double s = std::accumulate(window_.begin(), window_.end(), 0.0);
    return s / static_cast<double>(window_.size());
  }

  long episodes_done() const { return episodes_done_; }
  long last_episode_len() const { return last_episode_len_; }

 private:
  void push_window(double v) {
    window_.push_back(v);
    if (window_.size() > 100) window_.pop_front();
  }

  bool per_episode_;
  long steps_ = 0;
  double step_reward_sum_ = 0.0;
  long episodes_done_ = 0;
  double episode_return_sum_ = 0.0;
  double episode_return_ = 0.0;
  long episode_len_ = 0;
  long last_episode_len_ = 0;
  std::deque<double> window_;
};

RunResult run_impl(const TaskConfig& cfg, Algo algo, TaskId task,
                   const RunRecord* schedule, AnchorMode mode) {
  validate(cfg);
  const Environment env(task);
  const NetworkShape shape =
      make_mlp_shape(env.observation_dim(), cfg.hidden_nodes,
                     env.action_space().n_actions, cfg.hidden_layers);

  RunResult res;
  res.final_params = initial_params_for(cfg, task);
  if (cfg.budget == 0) return res;  // no interaction

  Rng rng_env = Rng::derive(cfg.seed, kStreamEnvSeeds);
  Rng rng_act = Rng::derive(cfg.seed, kStreamAction);
  Rng rng_batch = Rng::derive(cfg.seed, kStreamBatch);
  Rng rng_inner = Rng::derive(cfg.seed, kStreamInner);

  ParamVector params = res.final_params;
  AdamState adam =
      AdamState::initial(shape, cfg.alpha, cfg.beta1, cfg.beta2, cfg.adam_eps,
                         cfg.adam_denominator);
  ReplayBuffer replay(cfg.replay_capacity);
  MetricTracker metrics(task == TaskId::CartPole);

  const long total_sched_steps =
      cfg.budget_unit == TaskConfig::BudgetUnit::Steps
          ? cfg.budget
          : cfg.budget * static_cast<long>(env.step_cap());

  EnvState state = env.reset(rng_env.next_u64());
  long t = 0;
  long epoch = 0;
  long ifo_cumulative = 0;
  std::vector<Transition> last_batch;
  double anchor_dist_sum = 0.0;  // since the previous diagnostics checkpoint
  long anchor_dist_count = 0;

  const auto budget_reached = [&] {
    return cfg.budget_unit == TaskConfig::BudgetUnit::Steps
               ? t >= cfg.budget
               : metrics.episodes_done() >= cfg.budget;
  };

  while (!budget_reached()) {
    const double eps =
        epsilon_schedule(t, total_sched_steps, cfg.eps_start, cfg.eps_end);
    const std::vector<double> q = forward(params, state.observation);
    const int action = select_action(q, eps, rng_act);
    StepResult sr = env.step(state, action);
    const double reward = cfg.shaped_rewards
                              ? shaped_reward(task, state, sr.state, action)
                              : sr.raw_reward;
    Transition tr{state.observation, action, reward, sr.state.observation,
                  sr.terminal};
    res.record.transitions.push_back(tr);
    replay.push(std::move(tr));
    ++t;
    metrics.on_step(reward);
    if (sr.terminal) {
      metrics.on_episode_end();
      state = env.reset(rng_env.next_u64());
    } else {
      state = std::move(sr.state);
    }

    if (t % cfg.learn_freq == 0 &&
        replay.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      ++epoch;
      std::vector<Transition> batch;
      EpochDraws draws;
      const std::vector<int>* forced = nullptr;
      if (schedule != nullptr) {
        if (static_cast<std::size_t>(epoch) > schedule->epochs.size())
          throw std::runtime_error(
              "replay schedule exhausted: record is missing epoch " +
              std::to_string(epoch));
        draws = schedule->epochs[static_cast<std::size_t>(epoch) - 1];
        batch.reserve(draws.batch_ids.size());
        for (long id : draws.batch_ids) {
          if (id < 0 ||
              id >= static_cast<long>(schedule->transitions.size()))
            throw std::runtime_error("replay schedule has a bad batch id");
          batch.push_back(
              schedule->transitions[static_cast<std::size_t>(id)]);
        }
        forced = &draws.inner_draws;
      } else {
        const std::vector<std::size_t> positions =
            replay.sample_positions(cfg.batch_size, rng_batch);
        batch.reserve(positions.size());
        draws.batch_ids.reserve(positions.size());
        for (std::size_t p : positions) {
          batch.push_back(replay[p]);
          draws.batch_ids.push_back(replay.push_id(p));
        }
      }

      EpochInputs in;
      in.batch = batch;
      in.theta0 = &params;
      in.gamma = cfg.gamma;
      in.eta = cfg.eta;
      in.inner_iters = cfg.inner_iters;
      in.rng = &rng_inner;
      in.record_snapshots = cfg.diagnostics && algo != Algo::Sgd;
      in.forced_draws = forced;
      if (schedule != nullptr && mode == AnchorMode::WholeRecord)
        in.anchor_batch = schedule->transitions;

      EpochReport rep = run_epoch(algo, in);
      if (schedule == nullptr) draws.inner_draws = rep.drawn_indices;
      res.record.epochs.push_back(std::move(draws));
      ifo_cumulative += rep.ifo_queries;

      double anchor_dist = kNaN;
      if (cfg.diagnostics && algo != Algo::Sgd)
        anchor_dist = epoch_anchor_distance_mean(rep, batch, cfg.gamma, algo);
      res.epoch_anchor_distance.push_back(anchor_dist);
      if (!std::isnan(anchor_dist)) {
        anchor_dist_sum += anchor_dist;
        ++anchor_dist_count;
      }

      const double delta_norm_mean =
          rep.delta_norms.empty()
              ? 0.0
              : std::accumulate(rep.delta_norms.begin(), rep.delta_norms.end(),
                                0.0) /
                    static_cast<double>(rep.delta_norms.size());

      if (algo == Algo::SarahAdam) {
        const GradVector& g =
            cfg.adam_gradient == TaskConfig::AdamGradient::LastGrad
                ? rep.last_grad
                : rep.last_delta;
        auto [theta_next, adam_next] = adam_process(rep.theta_prev, g, adam);
        params = std::move(theta_next);
        adam = std::move(adam_next);
      } else {
        params = std::move(rep.theta_out);
      }

      res.rows.push_back({t, epoch, metrics.episodes_done(),
                          metrics.avg_reward(), metrics.window_avg(),
                          metrics.last_episode_len(), eps, delta_norm_mean,
                          ifo_cumulative});
      last_batch = std::move(batch);
    }

    if (cfg.diagnostics && t % kDiagCadence == 0) {
      std::span<const Transition> diag_batch = last_batch;
      std::vector<Transition> fallback;
      if (diag_batch.size() < 2) {
        const std::size_t take =
            std::min<std::size_t>(replay.size(),
                                  static_cast<std::size_t>(cfg.batch_size));
        for (std::size_t i = replay.size() - take; i < replay.size(); ++i)
          fallback.push_back(replay[i]);
        diag_batch = fallback;
      }
      if (diag_batch.size() >= 2) {
        const double gss = grad_std_sum(diag_batch, params, cfg.gamma);
        const double dist_mean =
            anchor_dist_count > 0
                ? anchor_dist_sum / static_cast<double>(anchor_dist_count)
                : kNaN;
        res.diag_rows.push_back({t, gss, dist_mean});
      }
      anchor_dist_sum = 0.0;
      anchor_dist_count = 0;
    }
  }

  res.final_params = std::move(params);
  return res;
}

}  // namespace

TaskConfig TaskConfig::defaults(TaskId task) {
  TaskConfig cfg;
  switch (task) {
    case TaskId::CartPole:
      cfg.hidden_nodes = 8;
      cfg.eta = 1e-2;
      cfg.batch_size = 64;
      cfg.gamma = 0.99;
      cfg.budget = 800;
      cfg.budget_unit = BudgetUnit::Episodes;
      break;
    case TaskId::MountainCar:
      cfg.hidden_nodes = 20;
      cfg.eta = 1e-2;
      cfg.batch_size = 64;
      cfg.gamma = 0.9;
      cfg.budget = 100000;
      cfg.budget_unit = BudgetUnit::Steps;
      break;
    case TaskId::Pendulum:
      cfg.hidden_nodes = 20;
      cfg.eta = 1e-3;
      cfg.batch_size = 32;
      cfg.gamma = 0.9;
      cfg.budget = 20000;
      cfg.budget_unit = BudgetUnit::Steps;
      break;
  }
  return cfg;
}

void validate(const TaskConfig& cfg) {
  if (cfg.hidden_nodes < 1) throw std::invalid_argument("hidden_nodes < 1");
  if (cfg.hidden_layers < 1) throw std::invalid_argument("hidden_layers < 1");
  if (cfg.alpha <= 0.0) throw std::invalid_argument("alpha must be > 0");
  if (cfg.eta < 0.0) throw std::invalid_argument("eta must be >= 0");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 ||
      cfg.beta2 >= 1.0)
    throw std::invalid_argument("betas must lie in [0, 1)");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size < 1");
  if (cfg.inner_iters < 0) throw std::invalid_argument("inner_iters < 0");
  if (cfg.gamma < 0.0 || cfg.gamma > 1.0)
    throw std::invalid_argument("gamma outside [0, 1]");
  if (cfg.budget < 0) throw std::invalid_argument("budget < 0");
  if (cfg.learn_freq < 1) throw std::invalid_argument("learn_freq < 1");
  if (cfg.eps_start < 0.0 || cfg.eps_start > 1.0 || cfg.eps_end < 0.0 ||
      cfg.eps_end > 1.0)
    throw std::invalid_argument("epsilon bounds outside [0, 1]");
  if (cfg.replay_capacity < cfg.batch_size)
    throw std::invalid_argument("replay_capacity < batch_size: training could never start");
  if (cfg.adam_eps <= 0.0) throw std::invalid_argument("adam_eps must be > 0");
}

double epsilon_schedule(long step, long total_steps, double eps_start,
                        double eps_end) {
  if (total_steps <= 0)
    throw std::invalid_argument("epsilon_schedule: total_steps must be > 0");
  if (step < 0) throw std::invalid_argument("epsilon_schedule: step < 0");
  const double frac = std::min(
      1.0, static_cast<double>(step) / static_cast<double>(total_steps));
  // two-sided lerp so the endpoints are hit exactly
  return eps_start * (1.0 - frac) + eps_end * frac;
}

int select_action(std::span<const double> qvalues, double epsilon, Rng& rng) {
  if (qvalues.empty())
    throw std::invalid_argument("select_action: empty Q-value vector");
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("select_action: epsilon outside [0, 1]");
  if (rng.next_double() < epsilon)
    return rng.next_below(static_cast<int>(qvalues.size()));
  int best = 0;
  for (int i = 1; i < static_cast<int>(qvalues.size()); ++i)
    if (qvalues[i] > qvalues[best]) best = i;  // ties keep the lowest index
  return best;
}

ParamVector initial_params_for(const TaskConfig& cfg, TaskId task) {
  const Environment env(task);
  const NetworkShape shape =
      make_mlp_shape(env.observation_dim(), cfg.hidden_nodes,
                     env.action_space().n_actions, cfg.hidden_layers);
  return init_params(Rng::derive(cfg.seed, kStreamInit).next_u64(), shape);
}

RunResult run_training(const TaskConfig& cfg, Algo algo, TaskId task) {
  return run_impl(cfg, algo, task, nullptr, AnchorMode::Recorded);
}

RunResult run_training_replayed(const TaskConfig& cfg, Algo algo, TaskId task,
                                const RunRecord& schedule, AnchorMode mode) {
  if (schedule.transitions.empty())
    throw std::runtime_error("replay schedule has no transitions");
  return run_impl(cfg, algo, task, &schedule, mode);
}

}  // namespace vrdqn

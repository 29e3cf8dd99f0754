#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vrdqn {

enum class TaskId { CartPole, MountainCar, Pendulum };

// Ids: "cartpole", "mountaincar", "pendulum". Throws on anything else.
TaskId task_from_string(std::string_view name);
std::string to_string(TaskId task);

struct EnvState {
  std::vector<double> observation;
  int step_count = 0;
  bool terminal = false;
};

struct ActionSpace {
  int n_actions = 0;
  // Pendulum only: action i applies torque_values[i] N·m. Empty otherwise.
  std::vector<double> torque_values;
};

struct StepResult {
  EnvState state;
  double raw_reward = 0.0;
  bool terminal = false;
};

// Classic-control dynamics with the canonical gym constants and Euler
// integration. reset/step are pure functions of their arguments; an instance
// holds no mutable state, so one instance can serve any number of threads.
//
// Episode step caps: CartPole 500, MountainCar 200, Pendulum 200. Hitting the
// cap marks the returned state terminal.
class Environment {
 public:
  explicit Environment(TaskId task);

  TaskId task() const { return task_; }
  const ActionSpace& action_space() const { return actions_; }
  int observation_dim() const { return obs_dim_; }
  int step_cap() const { return step_cap_; }

  // Initial state from the task's standard initial distribution.
  // Same seed => bit-identical state.
  EnvState reset(std::uint64_t seed) const;

  // One integration step. Throws std::invalid_argument for a terminal state,
  // an out-of-range action, or an observation of the wrong dimension.
  StepResult step(const EnvState& state, int action) const;

  // Pendulum core taking a continuous torque; `step` maps action indices onto
  // this. Throws for the other two tasks.
  StepResult step_torque(const EnvState& state, double torque) const;

 private:
  TaskId task_;
  ActionSpace actions_;
  int obs_dim_ = 0;
  int step_cap_ = 0;
};

// Training rewards:
//   MountainCar: sin(3 x') of the next position (monotone in altitude).
//   CartPole:    1 - |theta'|/theta_max with theta_max = 12 deg in radians.
//   Pendulum:    -(theta^2 + 0.1 thetadot^2 + 0.001 u^2) on the pre-step
//                state, theta wrapped to (-pi, pi].
double shaped_reward(TaskId task, const EnvState& state, const EnvState& next,
                     int action);

// Pendulum cost for an explicit torque; shaped_reward maps the action index
// onto this.
double pendulum_cost(const EnvState& state, double torque);

// Wrap an angle to (-pi, pi].
double wrap_angle(double theta);

}  // namespace vrdqn

#include "vrdqn/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vrdqn/rng.hpp"

namespace vrdqn {

namespace {

constexpr double kPi = std::numbers::pi;

// CartPole (Barto/Sutton/Anderson constants, gym CartPole-v1).
constexpr double kCpGravity = 9.8;
constexpr double kCpMassCart = 1.0;
constexpr double kCpMassPole = 0.1;
constexpr double kCpTotalMass = kCpMassCart + kCpMassPole;
constexpr double kCpHalfLength = 0.5;  // pole half-length
constexpr double kCpPoleMassLength = kCpMassPole * kCpHalfLength;
constexpr double kCpForceMag = 10.0;
constexpr double kCpTau = 0.02;  // integration step, s
constexpr double kCpThetaThreshold = 12.0 * 2.0 * kPi / 360.0;
constexpr double kCpXThreshold = 2.4;
constexpr int kCpStepCap = 500;

// MountainCar (gym MountainCar-v0).
constexpr double kMcForce = 0.001;
constexpr double kMcGravity = 0.0025;
constexpr double kMcMinPosition = -1.2;
constexpr double kMcMaxPosition = 0.6;
constexpr double kMcMaxSpeed = 0.07;
constexpr double kMcGoalPosition = 0.5;
constexpr double kMcGoalVelocity = 0.0;
constexpr int kMcStepCap = 200;

// Pendulum (gym Pendulum-v0 with g = 10).
constexpr double kPdGravity = 10.0;
constexpr double kPdMass = 1.0;
constexpr double kPdLength = 1.0;
constexpr double kPdDt = 0.05;
constexpr double kPdMaxSpeed = 8.0;
constexpr double kPdMaxTorque = 2.0;
constexpr int kPdTorqueBins = 12;
constexpr int kPdStepCap = 200;

std::vector<double> pendulum_torques() {
  // 12 equidistant torques spanning [-2, 2]: u_i = (4 i - 22) / 11.
  // The integer numerator keeps the set exactly symmetric about 0.
  std::vector<double> torques(kPdTorqueBins);
  for (int i = 0; i < kPdTorqueBins; ++i) {
    torques[i] = (4.0 * i - 22.0) / 11.0;
  }
  return torques;
}

}  // namespace

TaskId task_from_string(std::string_view name) {
  if (name == "cartpole") return TaskId::CartPole;
  if (name == "mountaincar") return TaskId::MountainCar;
  if (name == "pendulum") return TaskId::Pendulum;
  throw std::invalid_argument("unknown task id: " + std::string(name));
}

std::string to_string(TaskId task) {
  switch (task) {
    case TaskId::CartPole: return "cartpole";
    case TaskId::MountainCar: return "mountaincar";
    case TaskId::Pendulum: return "pendulum";
  }
  throw std::logic_error("invalid TaskId");
}

double wrap_angle(double theta) {
  const double two_pi = 2.0 * kPi;
  double y = std::fmod(theta + kPi, two_pi);  // (-2pi, 2pi)
  if (y <= 0.0) y += two_pi;                  // (0, 2pi]
  return y - kPi;                             // (-pi, pi]
}

Environment::Environment(TaskId task) : task_(task) {
  switch (task) {
    case TaskId::CartPole:
      actions_ = {2, {}};
      obs_dim_ = 4;
      step_cap_ = kCpStepCap;
      break;
    case TaskId::MountainCar:
      actions_ = {3, {}};
      obs_dim_ = 2;
      step_cap_ = kMcStepCap;
      break;
    case TaskId::Pendulum:
      actions_ = {kPdTorqueBins, pendulum_torques()};
      obs_dim_ = 3;
      step_cap_ = kPdStepCap;
      break;
  }
}

EnvState Environment::reset(std::uint64_t seed) const {
  Rng rng(seed);
  EnvState s;
  s.observation.resize(obs_dim_);
  switch (task_) {
    case TaskId::CartPole:
      for (double& v : s.observation) v = rng.uniform(-0.05, 0.05);
      break;
    case TaskId::MountainCar:
      s.observation[0] = rng.uniform(-0.6, -0.4);
      s.observation[1] = 0.0;
      break;
    case TaskId::Pendulum: {
      const double theta = rng.uniform(-kPi, kPi);
      const double theta_dot = rng.uniform(-1.0, 1.0);
      s.observation = {std::cos(theta), std::sin(theta), theta_dot};
      break;
    }
  }
  return s;
}

StepResult Environment::step(const EnvState& state, int action) const {
  if (state.terminal)
    throw std::invalid_argument("step: state is terminal");
  if (action < 0 || action >= actions_.n_actions)
    throw std::invalid_argument("step: action out of range");
  if (static_cast<int>(state.observation.size()) != obs_dim_)
    throw std::invalid_argument("step: observation dimension mismatch");

  StepResult result;
  switch (task_) {
    case TaskId::CartPole: {
      double x = state.observation[0];
      double x_dot = state.observation[1];
      double theta = state.observation[2];
      double theta_dot = state.observation[3];
      const double force = (action == 1) ? kCpForceMag : -kCpForceMag;
      const double cos_theta = std::cos(theta);
      const double sin_theta = std::sin(theta);
      const double temp =
          (force + kCpPoleMassLength * theta_dot * theta_dot * sin_theta) /
          kCpTotalMass;
      const double theta_acc =
          (kCpGravity * sin_theta - cos_theta * temp) /
          (kCpHalfLength *
           (4.0 / 3.0 - kCpMassPole * cos_theta * cos_theta / kCpTotalMass));
      const double x_acc =
          temp - kCpPoleMassLength * theta_acc * cos_theta / kCpTotalMass;
      x += kCpTau * x_dot;
      x_dot += kCpTau * x_acc;
      theta += kCpTau * theta_dot;
      theta_dot += kCpTau * theta_acc;
      result.state.observation = {x, x_dot, theta, theta_dot};
      result.raw_reward = 1.0;
      result.state.terminal = x < -kCpXThreshold || x > kCpXThreshold ||
                              theta < -kCpThetaThreshold ||
                              theta > kCpThetaThreshold;
      break;
    }
    case TaskId::MountainCar: {
      const double x = state.observation[0];
      const double v = state.observation[1];
      double v_next = std::clamp(
          v + kMcForce * (action - 1) - kMcGravity * std::cos(3.0 * x),
          -kMcMaxSpeed, kMcMaxSpeed);
      double x_next = std::clamp(x + v_next, kMcMinPosition, kMcMaxPosition);
      if (x_next == kMcMinPosition && v_next < 0.0) v_next = 0.0;
      result.state.observation = {x_next, v_next};
      result.raw_reward = -1.0;
      result.state.terminal =
          x_next >= kMcGoalPosition && v_next >= kMcGoalVelocity;
      break;
    }
    case TaskId::Pendulum:
      return step_torque(state, actions_.torque_values[action]);
  }
  result.state.step_count = state.step_count + 1;
  if (result.state.step_count >= step_cap_) result.state.terminal = true;
  result.terminal = result.state.terminal;
  return result;
}

StepResult Environment::step_torque(const EnvState& state,
                                    double torque) const {
  if (task_ != TaskId::Pendulum)
    throw std::invalid_argument("step_torque: pendulum only");
  if (state.terminal)
    throw std::invalid_argument("step_torque: state is terminal");
  if (static_cast<int>(state.observation.size()) != obs_dim_)
    throw std::invalid_argument("step_torque: observation dimension mismatch");

  const double u = std::clamp(torque, -kPdMaxTorque, kPdMaxTorque);
  const double sin_theta = state.observation[1];
  const double theta = std::atan2(state.observation[1], state.observation[0]);
  const double theta_dot = state.observation[2];

  // theta_dd = 3 g / (2 l) sin(theta) + 3 u / (m l^2); speed clamped before
  // integrating the angle so the bound holds for the stored state.
  const double theta_acc =
      3.0 * kPdGravity / (2.0 * kPdLength) * sin_theta +
      3.0 * u / (kPdMass * kPdLength * kPdLength);
  const double theta_dot_next =
      std::clamp(theta_dot + theta_acc * kPdDt, -kPdMaxSpeed, kPdMaxSpeed);
  const double theta_next = theta + theta_dot_next * kPdDt;

  StepResult result;
  result.state.observation = {std::cos(theta_next), std::sin(theta_next),
                              theta_dot_next};
  result.raw_reward = pendulum_cost(state, u);
  result.state.step_count = state.step_count + 1;
  result.state.terminal = result.state.step_count >= step_cap_;
  result.terminal = result.state.terminal;
  return result;
}

double pendulum_cost(const EnvState& state, double torque) {
  const double theta =
      wrap_angle(std::atan2(state.observation[1], state.observation[0]));
  const double theta_dot = state.observation[2];
  return -(theta * theta + 0.1 * theta_dot * theta_dot +
           0.001 * torque * torque);
}

double shaped_reward(TaskId task, const EnvState& state, const EnvState& next,
                     int action) {
  switch (task) {
    case TaskId::MountainCar:
      return std::sin(3.0 * next.observation[0]);
    case TaskId::CartPole:
      return 1.0 - std::abs(next.observation[2]) / kCpThetaThreshold;
    case TaskId::Pendulum: {
      if (action < 0 || action >= kPdTorqueBins)
        throw std::invalid_argument("shaped_reward: action out of range");
      const double u = (4.0 * action - 22.0) / 11.0;
      return pendulum_cost(state, u);
    }
  }
  throw std::logic_error("invalid TaskId");
}

}  // namespace vrdqn

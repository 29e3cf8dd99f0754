#pragma once

#include <vector>

namespace vrdqn {

// One experience tuple (S, A, R, S', terminal); the unit of all gradient
// estimation.
struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

}  // namespace vrdqn

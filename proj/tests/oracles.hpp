#pragma once

// Test-only oracles and generators. Everything here is independent of the
// library's gradient paths: finite differences drive the gradient checks and
// a two-pass loop drives the std checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "vrdqn/qnet.hpp"
#include "vrdqn/rng.hpp"
#include "vrdqn/transition.hpp"

namespace vrdqn::testing {

// Central differences (f(x+h) - f(x-h)) / 2h per parameter.
inline std::vector<double> central_differences(
    const ParamVector& params,
    const std::function<double(const ParamVector&)>& f, double h = 1e-5) {
  std::vector<double> fd(params.values.size());
  ParamVector work = params;
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    work.values[i] = params.values[i] + h;
    const double fp = f(work);
    work.values[i] = params.values[i] - h;
    const double fm = f(work);
    work.values[i] = params.values[i];
    fd[i] = (fp - fm) / (2.0 * h);
  }
  return fd;
}

// |a - b| relative to the larger magnitude, floored at 1 so near-zero
// entries are judged absolutely.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_rel_err(std::span<const double> a,
                          std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, rel_err(a[i], b[i]));
  return m;
}

inline ParamVector random_params(Rng& rng, const NetworkShape& shape,
                                 double scale = 1.0) {
  ParamVector p = zeros_like(shape);
  for (double& v : p.values) v = rng.uniform(-scale, scale);
  return p;
}

inline std::vector<double> random_observation(Rng& rng, int dim) {
  std::vector<double> obs(static_cast<std::size_t>(dim));
  for (double& v : obs) v = rng.uniform(-1.0, 1.0);
  return obs;
}

inline Transition random_transition(Rng& rng, int obs_dim, int n_actions) {
  Transition t;
  t.state = random_observation(rng, obs_dim);
  t.action = rng.next_below(n_actions);
  t.reward = rng.uniform(-1.0, 1.0);
  t.next_state = random_observation(rng, obs_dim);
  t.terminal = rng.next_double() < 0.3;
  return t;
}

inline std::vector<Transition> random_batch(Rng& rng, int n, int obs_dim,
                                            int n_actions) {
  std::vector<Transition> batch;
  batch.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    batch.push_back(random_transition(rng, obs_dim, n_actions));
  return batch;
}

}  // namespace vrdqn::testing

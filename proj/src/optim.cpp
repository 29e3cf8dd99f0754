#include "vrdqn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vrdqn/vecmath.hpp"

namespace vrdqn {

namespace {

void validate_inputs(const EpochInputs& in) {
  if (in.batch.empty()) throw std::invalid_argument("epoch: empty batch");
  if (in.theta0 == nullptr) throw std::invalid_argument("epoch: null theta0");
  if (in.inner_iters < 0) throw std::invalid_argument("epoch: inner_iters < 0");
  if (in.gamma < 0.0 || in.gamma > 1.0)
    throw std::invalid_argument("epoch: gamma outside [0, 1]");
  if (!(in.eta >= 0.0)) throw std::invalid_argument("epoch: eta < 0");
  if (in.forced_draws != nullptr) {
    if (static_cast<int>(in.forced_draws->size()) != in.inner_iters)
      throw std::invalid_argument("epoch: forced draw count != inner_iters");
    for (int i : *in.forced_draws)
      if (i < 0 || i >= static_cast<int>(in.batch.size()))
        throw std::invalid_argument("epoch: forced draw out of range");
  } else if (in.rng == nullptr && in.inner_iters > 0) {
    throw std::invalid_argument("epoch: no rng and no forced draws");
  }
}

int draw(const EpochInputs& in, int m) {
  if (in.forced_draws != nullptr) return (*in.forced_draws)[m];
  return in.rng->next_below(static_cast<int>(in.batch.size()));
}

}  // namespace

Algo algo_from_string(std::string_view name) {
  if (name == "sgd") return Algo::Sgd;
  if (name == "svrg") return Algo::Svrg;
  if (name == "sarah") return Algo::Sarah;
  if (name == "sarah_adam") return Algo::SarahAdam;
  throw std::invalid_argument("unknown optimizer id: " + std::string(name));
}

std::string to_string(Algo algo) {
  switch (algo) {
    case Algo::Sgd: return "sgd";
    case Algo::Svrg: return "svrg";
    case Algo::Sarah: return "sarah";
    case Algo::SarahAdam: return "sarah_adam";
  }
  throw std::logic_error("invalid Algo");
}

double bellman_target(const Transition& t, const ParamVector& params,
                      double gamma) {
  if (t.terminal) return t.reward;
  const std::vector<double> q = forward(params, t.next_state);
  return t.reward + gamma * *std::max_element(q.begin(), q.end());
}

GradVector td_gradient(const Transition& t, const ParamVector& params,
                       double gamma) {
  const double y = bellman_target(t, params, gamma);
  const std::vector<double> q = forward(params, t.state);
  const double residual = y - q[t.action];
  GradVector g = q_grad(params, t.state, t.action);
  scale_inplace(-2.0 * residual, g.values);
  return g;
}

GradVector full_batch_gradient(std::span<const Transition> batch,
                               const ParamVector& params, double gamma) {
  if (batch.empty())
    throw std::invalid_argument("full_batch_gradient: empty batch");
  GradVector acc = zeros_like(params.shape);
  for (const Transition& t : batch) {
    const GradVector g = td_gradient(t, params, gamma);
    axpy(1.0, g.values, acc.values);
  }
  scale_inplace(1.0 / static_cast<double>(batch.size()), acc.values);
  return acc;
}

AdamState AdamState::initial(const NetworkShape& shape, double alpha,
                             double beta1, double beta2, double eps,
                             Denominator denominator) {
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw std::invalid_argument("adam: betas must lie in [0, 1)");
  if (alpha <= 0.0 || eps <= 0.0)
    throw std::invalid_argument("adam: alpha and eps must be positive");
  AdamState st;
  st.m = zeros_like(shape);
  st.v = zeros_like(shape);
  st.s = 0;
  st.alpha = alpha;
  st.beta1 = beta1;
  st.beta2 = beta2;
  st.eps = eps;
  st.denominator = denominator;
  return st;
}

std::pair<ParamVector, AdamState> adam_process(const ParamVector& theta_m,
                                               const GradVector& g_last,
                                               const AdamState& state) {
  check_same_layout(theta_m, g_last);
  check_same_layout(theta_m, state.m);
  check_same_layout(theta_m, state.v);
  if (state.s < 0) throw std::invalid_argument("adam: negative step counter");

  const std::size_t n = theta_m.values.size();
  AdamState next = state;
  next.s = state.s + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = g_last.values[i];
    next.m.values[i] = state.beta1 * state.m.values[i] + (1.0 - state.beta1) * g;
    next.v.values[i] =
        state.beta2 * state.v.values[i] + (1.0 - state.beta2) * g * g;
  }

  GradVector m_hat = zeros_like(theta_m.shape);
  GradVector v_hat = zeros_like(theta_m.shape);
  if (next.s == 1) {
    // bias correction cancels exactly on the first step: mhat = g, vhat = g.g
    for (std::size_t i = 0; i < n; ++i) {
      m_hat.values[i] = g_last.values[i];
      v_hat.values[i] = g_last.values[i] * g_last.values[i];
    }
  } else {
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(next.s));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(next.s));
    for (std::size_t i = 0; i < n; ++i) {
      m_hat.values[i] = next.m.values[i] / c1;
      v_hat.values[i] = next.v.values[i] / c2;
    }
  }

  ParamVector theta_next = theta_m;
  if (state.denominator == AdamState::Denominator::ScalarNorm) {
    const double denom = std::sqrt(l2_norm(v_hat.values)) + state.eps;
    axpy(-state.alpha / denom, m_hat.values, theta_next.values);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      theta_next.values[i] -=
          state.alpha * m_hat.values[i] / (std::sqrt(v_hat.values[i]) + state.eps);
  }
  return {std::move(theta_next), std::move(next)};
}

EpochReport sgd_epoch(const EpochInputs& in) {
  validate_inputs(in);
  EpochReport rep;
  rep.theta_out = *in.theta0;
  rep.theta_prev = *in.theta0;
  rep.last_grad = zeros_like(in.theta0->shape);
  rep.last_delta = zeros_like(in.theta0->shape);
  for (int m = 0; m < in.inner_iters; ++m) {
    const int i = draw(in, m);
    rep.drawn_indices.push_back(i);
    GradVector g = td_gradient(in.batch[i], rep.theta_out, in.gamma);
    rep.ifo_queries += 1;
    rep.delta_norms.push_back(l2_norm(g.values));
    rep.theta_prev = rep.theta_out;
    axpy(-in.eta, g.values, rep.theta_out.values);
    rep.last_delta = g;
    rep.last_grad = std::move(g);
  }
  return rep;
}

EpochReport svrg_epoch(const EpochInputs& in) {
  validate_inputs(in);
  const std::span<const Transition> anchor_data =
      in.anchor_batch.empty() ? in.batch : in.anchor_batch;

  EpochReport rep;
  GradVector anchor = full_batch_gradient(anchor_data, *in.theta0, in.gamma);
  rep.ifo_queries += static_cast<long>(anchor_data.size());
  if (in.record_snapshots) rep.snapshots.push_back({0, anchor, *in.theta0});

  rep.theta_out = *in.theta0;
  rep.theta_prev = *in.theta0;
  rep.last_grad = anchor;
  rep.last_delta = anchor;
  for (int m = 1; m <= in.inner_iters; ++m) {
    const int i = draw(in, m - 1);
    rep.drawn_indices.push_back(i);
    const Transition& t = in.batch[i];
    GradVector g_cur = td_gradient(t, rep.theta_out, in.gamma);
    const GradVector g_ref = td_gradient(t, *in.theta0, in.gamma);
    rep.ifo_queries += 2;
    // delta = g_cur - g_ref + anchor
    GradVector delta = g_cur;
    axpy(-1.0, g_ref.values, delta.values);
    axpy(1.0, anchor.values, delta.values);
    if (in.record_snapshots) rep.snapshots.push_back({m, delta, rep.theta_out});
    rep.delta_norms.push_back(l2_norm(delta.values));
    rep.theta_prev = rep.theta_out;
    axpy(-in.eta, delta.values, rep.theta_out.values);
    rep.last_grad = std::move(g_cur);
    rep.last_delta = std::move(delta);
  }
  return rep;
}

EpochReport sarah_epoch(const EpochInputs& in) {
  validate_inputs(in);
  EpochReport rep;
  GradVector delta = full_batch_gradient(in.batch, *in.theta0, in.gamma);
  rep.ifo_queries += static_cast<long>(in.batch.size());
  if (in.record_snapshots) rep.snapshots.push_back({0, delta, *in.theta0});
  rep.delta_norms.push_back(l2_norm(delta.values));

  // update with the full gradient, then recurse from it
  rep.theta_prev = *in.theta0;
  rep.theta_out = *in.theta0;
  axpy(-in.eta, delta.values, rep.theta_out.values);
  rep.last_grad = delta;
  rep.last_delta = delta;

  for (int m = 1; m <= in.inner_iters; ++m) {
    const int i = draw(in, m - 1);
    rep.drawn_indices.push_back(i);
    const Transition& t = in.batch[i];
    GradVector g_cur = td_gradient(t, rep.theta_out, in.gamma);
    const GradVector g_prev = td_gradient(t, rep.theta_prev, in.gamma);
    rep.ifo_queries += 2;
    // delta_m = (g_m - g_{m-1}) + delta_{m-1}; the difference is formed first
    // so equal gradients cancel exactly and delta_m == delta_{m-1}
    GradVector diff = g_cur;
    axpy(-1.0, g_prev.values, diff.values);
    axpy(1.0, diff.values, delta.values);
    if (in.record_snapshots) rep.snapshots.push_back({m, delta, rep.theta_out});
    rep.delta_norms.push_back(l2_norm(delta.values));
    rep.theta_prev = rep.theta_out;
    axpy(-in.eta, delta.values, rep.theta_out.values);
    rep.last_grad = std::move(g_cur);
    rep.last_delta = delta;
  }
  return rep;
}

EpochReport run_epoch(Algo algo, const EpochInputs& in) {
  switch (algo) {
    case Algo::Sgd: return sgd_epoch(in);
    case Algo::Svrg: return svrg_epoch(in);
    case Algo::Sarah:
    case Algo::SarahAdam: return sarah_epoch(in);
  }
  throw std::logic_error("invalid Algo");
}

double eta_max_bound(int inner_iters, double mu) {
  if (inner_iters < 1)
    throw std::invalid_argument("eta_max_bound: inner_iters must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("eta_max_bound: mu must be > 0");
  return 2.0 / (std::sqrt(mu) *
                (std::sqrt(4.0 * static_cast<double>(inner_iters) + 1.0) + 1.0));
}

}  // namespace vrdqn

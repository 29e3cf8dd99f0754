#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vrdqn/qnet.hpp"
#include "vrdqn/rng.hpp"
#include "vrdqn/transition.hpp"

namespace vrdqn {

enum class Algo { Sgd, Svrg, Sarah, SarahAdam };

// Ids: "sgd", "svrg", "sarah", "sarah_adam". Throws on anything else.
Algo algo_from_string(std::string_view name);
std::string to_string(Algo algo);

// Bootstrap target y = R + gamma * max_a' Q(S', a'; params), or y = R for a
// terminal transition. y is a constant: no gradient flows through it.
double bellman_target(const Transition& t, const ParamVector& params,
                      double gamma);

// Gradient of the loss (y - Q(S, A; theta))^2 with y frozen, i.e.
// -2 (y - Q) grad Q(S, A; theta). All updates below descend with
// theta <- theta - eta * delta.
GradVector td_gradient(const Transition& t, const ParamVector& params,
                       double gamma);

// Mean of td_gradient over the batch; the full-gradient anchor. Throws on an
// empty batch. Counts batch-size oracle queries.
GradVector full_batch_gradient(std::span<const Transition> batch,
                               const ParamVector& params, double gamma);

// Adam moments persist across outer iterations; s counts completed Adam
// steps, so m = v = 0 while s = 0 and the update uses exponent s + 1.
struct AdamState {
  GradVector m;  // first moment
  GradVector v;  // second raw moment
  long s = 0;
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  // ScalarNorm divides the whole step by sqrt(||vhat||_2) + eps (a single
  // scalar); Elementwise is the conventional per-coordinate sqrt(vhat) + eps.
  enum class Denominator { ScalarNorm, Elementwise };
  Denominator denominator = Denominator::ScalarNorm;

  static AdamState initial(const NetworkShape& shape, double alpha,
                           double beta1, double beta2, double eps,
                           Denominator denominator);
};

// One Adam step restarted from theta_m (the parameters before the inner
// loop's final update, whose update it overwrites):
//   m_s = b1 m_{s-1} + (1-b1) g        v_s = b2 v_{s-1} + (1-b2) g.g
//   mhat = m_s / (1-b1^{s+1})          vhat = v_s / (1-b2^{s+1})
//   theta' = theta_m - alpha * mhat / denom(vhat)
// At the first step the bias corrections cancel algebraically (mhat = g,
// vhat = g.g); they are computed through that identity so it holds exactly in
// floating point.
std::pair<ParamVector, AdamState> adam_process(const ParamVector& theta_m,
                                               const GradVector& g_last,
                                               const AdamState& state);

// Inputs of one optimization epoch over a fixed batch D.
struct EpochInputs {
  std::span<const Transition> batch;  // D, size N >= 1
  const ParamVector* theta0 = nullptr;
  double gamma = 0.99;  // in [0, 1]
  double eta = 1e-2;    // >= 0; 0 is allowed (anchor-identity diagnostics)
  int inner_iters = 16;  // M >= 0
  Rng* rng = nullptr;
  // Record (m, delta_m, theta_m) for every inner step (anchor diagnostics).
  bool record_snapshots = false;
  // Anchor computed over this set instead of `batch` when nonempty
  // (exact-anchor oracle runs). SVRG only.
  std::span<const Transition> anchor_batch = {};
  // Replay: inner-loop picks to use instead of drawing from rng. Must hold
  // exactly inner_iters indices into `batch`.
  const std::vector<int>* forced_draws = nullptr;
};

struct AnchorSnapshot {
  int m = 0;
  GradVector delta;  // update direction computed at inner step m
  ParamVector theta;  // parameters it was computed at
};

struct EpochReport {
  ParamVector theta_out;   // final parameters (theta_{M+1})
  ParamVector theta_prev;  // parameters before the last update (theta_M)
  GradVector last_grad;    // last single-transition gradient g_M
  GradVector last_delta;   // last update direction delta_M
  std::vector<double> delta_norms;  // ||delta|| per applied update
  long ifo_queries = 0;  // per-transition gradient evaluations
  std::vector<int> drawn_indices;   // inner-loop picks into the batch
  std::vector<AnchorSnapshot> snapshots;  // when record_snapshots
};

// M single-transition descent steps on uniformly drawn batch elements.
// ifo_queries = M.
EpochReport sgd_epoch(const EpochInputs& in);

// Anchor g~ = full gradient at theta_0; each inner step corrects one
// stochastic gradient with the frozen anchor:
//   delta = g(theta) - g(theta_0) + g~,   theta <- theta - eta delta.
// ifo_queries = N + 2M.
EpochReport svrg_epoch(const EpochInputs& in);

// Recursive-gradient epoch. delta_0 = full gradient at theta_0 and is applied
// as a step itself; each inner step then updates the estimate recursively,
// using the previous one as the anchor:
//   delta_m = g(theta_m) - g(theta_{m-1}) + delta_{m-1}.
// ifo_queries = N + 2M.
EpochReport sarah_epoch(const EpochInputs& in);

// Dispatch by id. SarahAdam runs sarah_epoch; the Adam step is applied by the
// caller (it needs the persistent AdamState).
EpochReport run_epoch(Algo algo, const EpochInputs& in);

// Largest admissible step size 2 / (sqrt(mu) (sqrt(4M+1) + 1)) for the
// convergence guarantee; mu is the mean squared smoothness constant, supplied
// by the caller. Throws unless M >= 1 and mu > 0.
double eta_max_bound(int inner_iters, double mu);

}  // namespace vrdqn

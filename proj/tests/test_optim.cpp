#include <stdexcept>
#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "vrdqn/optim.hpp"
#include "vrdqn/vecmath.hpp"

using namespace vrdqn;
namespace vt = vrdqn::testing;

namespace {

// w1=1, b1=0, w2=2, b2=0.5; Q([x]) = 2 ReLU(x) + 0.5
ParamVector tiny_net() {
  ParamVector p = zeros_like(make_mlp_shape(1, 1, 1));
  p.values = {1.0, 0.0, 2.0, 0.5};
  return p;
}

Transition terminal_transition(double x, double reward) {
  return Transition{{x}, 0, reward, {x}, true};
}

// Hand chain rule for tiny_net at input x > 0 against a frozen target y:
// grad = -2 (y - Q) * [x w2, w2, x, 1] over [w1, b1, w2, b2].
std::vector<double> tiny_loss_grad(const ParamVector& p, double x, double y) {
  const double w1 = p.values[0], b1 = p.values[1];
  const double w2 = p.values[2], b2 = p.values[3];
  const double h = std::max(0.0, w1 * x + b1);
  const double q = w2 * h + b2;
  const double scale = -2.0 * (y - q);
  const double mask = (w1 * x + b1) > 0.0 ? 1.0 : 0.0;
  return {scale * x * mask * w2, scale * mask * w2, scale * h, scale * 1.0};
}

EpochInputs make_inputs(std::span<const Transition> batch,
                        const ParamVector& theta0, double eta, int m,
                        Rng* rng) {
  EpochInputs in;
  in.batch = batch;
  in.theta0 = &theta0;
  in.gamma = 0.9;
  in.eta = eta;
  in.inner_iters = m;
  in.rng = rng;
  return in;
}

}  // namespace

TEST_CASE("algo ids round-trip") {
  CHECK(algo_from_string("sgd") == Algo::Sgd);
  CHECK(algo_from_string("svrg") == Algo::Svrg);
  CHECK(algo_from_string("sarah") == Algo::Sarah);
  CHECK(algo_from_string("sarah_adam") == Algo::SarahAdam);
  CHECK(to_string(Algo::SarahAdam) == "sarah_adam");
  CHECK_THROWS_AS(algo_from_string("adam"), std::invalid_argument);
}

TEST_CASE("bellman_target") {
  const ParamVector p = tiny_net();
  SUBCASE("gamma = 0 kills the bootstrap") {
    const Transition t{{1.0}, 0, 0.7, {2.0}, false};
    CHECK(bellman_target(t, p, 0.0) == 0.7);
  }
  SUBCASE("terminal transitions return the reward") {
    CHECK(bellman_target(terminal_transition(1.0, 1.0), p, 0.9) == 1.0);
  }
  SUBCASE("zero Q-network leaves only the reward") {
    const ParamVector z = zeros_like(make_mlp_shape(1, 1, 1));
    const Transition t{{1.0}, 0, 0.5, {2.0}, false};
    CHECK(bellman_target(t, z, 0.9) == 0.5);
  }
  SUBCASE("bootstrap takes the max over next-state Q-values") {
    ParamVector wide = zeros_like(make_mlp_shape(1, 2, 2));
    // h = [x, x] (w = 1, 1); q = [h0 - h1, h0 + h1] = [0, 2x]
    wide.values = {1.0, 1.0, 0.0, 0.0, 1.0, 1.0, -1.0, 1.0, 0.0, 0.0};
    const Transition t{{1.0}, 0, 1.0, {3.0}, false};
    CHECK(bellman_target(t, wide, 0.5) == 1.0 + 0.5 * 6.0);
  }
}

TEST_CASE("td_gradient") {
  const ParamVector p = tiny_net();
  SUBCASE("zero residual gives the zero vector") {
    // Q([3], 0) = 6.5; a terminal transition with R = 6.5 has y = Q
    const Transition t{{3.0}, 0, 6.5, {3.0}, true};
    const GradVector g = td_gradient(t, p, 0.9);
    for (double v : g.values) CHECK(v == 0.0);
  }
  SUBCASE("matches the hand chain rule") {
    const Transition t = terminal_transition(3.0, 1.0);
    const GradVector g = td_gradient(t, p, 0.9);
    const std::vector<double> want = tiny_loss_grad(p, 3.0, 1.0);
    for (std::size_t i = 0; i < want.size(); ++i)
      CHECK(g.values[i] == doctest::Approx(want[i]).epsilon(1e-14));
  }
  SUBCASE("doubling the residual doubles the gradient exactly") {
    // Q = 6.5, so rewards 5.5 and 4.5 give residuals -1 and -2
    const GradVector g1 = td_gradient(terminal_transition(3.0, 5.5), p, 0.9);
    const GradVector g2 = td_gradient(terminal_transition(3.0, 4.5), p, 0.9);
    for (std::size_t i = 0; i < g1.values.size(); ++i)
      CHECK(g2.values[i] == 2.0 * g1.values[i]);
  }
  SUBCASE("matches central differences of the frozen-target loss") {
    Rng rng(99);
    const NetworkShape shape = make_mlp_shape(3, 5, 4);
    const ParamVector params = vt::random_params(rng, shape);
    for (int trial = 0; trial < 20; ++trial) {
      const Transition t = vt::random_transition(rng, 3, 4);
      const double y = bellman_target(t, params, 0.9);
      const GradVector g = td_gradient(t, params, 0.9);
      const std::vector<double> fd =
          vt::central_differences(params, [&](const ParamVector& q) {
            const double qv = forward(q, t.state)[t.action];
            return (y - qv) * (y - qv);
          });
      CHECK(vt::max_rel_err(g.values, fd) < 1e-5);
    }
  }
}

TEST_CASE("full_batch_gradient") {
  const ParamVector p = tiny_net();
  SUBCASE("empty batch throws") {
    CHECK_THROWS_AS(full_batch_gradient({}, p, 0.9), std::invalid_argument);
  }
  SUBCASE("a batch of one equals the single gradient") {
    const std::vector<Transition> batch{terminal_transition(2.0, 1.0)};
    const GradVector g = full_batch_gradient(batch, p, 0.9);
    const GradVector single = td_gradient(batch[0], p, 0.9);
    CHECK(g.values == single.values);
  }
  SUBCASE("duplicating the batch leaves the mean unchanged") {
    std::vector<Transition> batch{terminal_transition(2.0, 1.0),
                                  terminal_transition(3.0, -0.5)};
    const GradVector g1 = full_batch_gradient(batch, p, 0.9);
    std::vector<Transition> doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    const GradVector g2 = full_batch_gradient(doubled, p, 0.9);
    for (std::size_t i = 0; i < g1.values.size(); ++i)
      CHECK(g2.values[i] == doctest::Approx(g1.values[i]).epsilon(1e-12));
  }
  SUBCASE("two hand-built transitions average to the hand-computed mean") {
    const std::vector<Transition> batch{terminal_transition(3.0, 1.0),
                                        terminal_transition(2.0, 0.5)};
    const GradVector g = full_batch_gradient(batch, p, 0.9);
    const std::vector<double> a = tiny_loss_grad(p, 3.0, 1.0);
    const std::vector<double> b = tiny_loss_grad(p, 2.0, 0.5);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(g.values[i] ==
            doctest::Approx((a[i] + b[i]) / 2.0).epsilon(1e-14));
  }
}

TEST_CASE("sgd_epoch") {
  const ParamVector p = tiny_net();
  const std::vector<Transition> batch{terminal_transition(3.0, 1.0)};
  SUBCASE("eta = 0 leaves parameters untouched") {
    Rng rng(1);
    const EpochReport rep = sgd_epoch(make_inputs(batch, p, 0.0, 5, &rng));
    CHECK(rep.theta_out.values == p.values);
    CHECK(rep.ifo_queries == 5);
  }
  SUBCASE("M = 0 does nothing and queries nothing") {
    Rng rng(1);
    const EpochReport rep = sgd_epoch(make_inputs(batch, p, 0.01, 0, &rng));
    CHECK(rep.theta_out.values == p.values);
    CHECK(rep.ifo_queries == 0);
    CHECK(rep.delta_norms.empty());
  }
  SUBCASE("one step reproduces the hand-computed update") {
    Rng rng(1);
    const double eta = 0.01;
    const EpochReport rep = sgd_epoch(make_inputs(batch, p, eta, 1, &rng));
    const std::vector<double> g = tiny_loss_grad(p, 3.0, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(rep.theta_out.values[i] ==
            doctest::Approx(p.values[i] - eta * g[i]).epsilon(1e-14));
  }
}

TEST_CASE("svrg_epoch") {
  Rng data_rng(7);
  const NetworkShape shape = make_mlp_shape(2, 4, 3);
  const ParamVector theta0 = vt::random_params(data_rng, shape, 0.7);
  const std::vector<Transition> batch = vt::random_batch(data_rng, 6, 2, 3);

  SUBCASE("the first inner step's delta is exactly the anchor") {
    Rng rng(3);
    EpochInputs in = make_inputs(batch, theta0, 0.05, 4, &rng);
    in.record_snapshots = true;
    const EpochReport rep = svrg_epoch(in);
    REQUIRE(rep.snapshots.size() == 5);
    CHECK(rep.snapshots[1].delta.values == rep.snapshots[0].delta.values);
  }
  SUBCASE("eta = 0 pins every delta to the anchor, bit for bit") {
    Rng rng(3);
    EpochInputs in = make_inputs(batch, theta0, 0.0, 8, &rng);
    in.record_snapshots = true;
    const EpochReport rep = svrg_epoch(in);
    const GradVector& anchor = rep.snapshots[0].delta;
    for (std::size_t m = 1; m < rep.snapshots.size(); ++m)
      CHECK(rep.snapshots[m].delta.values == anchor.values);
    CHECK(rep.theta_out.values == theta0.values);
  }
  SUBCASE("two inner steps match a brute-force oracle") {
    const std::vector<int> draws{2, 5};
    EpochInputs in = make_inputs(batch, theta0, 0.05, 2, nullptr);
    in.forced_draws = &draws;
    in.record_snapshots = true;
    const EpochReport rep = svrg_epoch(in);

    // oracle: recompute every quantity with direct td_gradient calls
    GradVector anchor = zeros_like(shape);
    for (const Transition& t : batch)
      axpy(1.0, td_gradient(t, theta0, 0.9).values, anchor.values);
    scale_inplace(1.0 / batch.size(), anchor.values);

    ParamVector theta = theta0;  // step 1 happens at theta0
    GradVector d1 = td_gradient(batch[2], theta, 0.9);
    axpy(-1.0, td_gradient(batch[2], theta0, 0.9).values, d1.values);
    axpy(1.0, anchor.values, d1.values);
    axpy(-0.05, d1.values, theta.values);
    GradVector d2 = td_gradient(batch[5], theta, 0.9);
    axpy(-1.0, td_gradient(batch[5], theta0, 0.9).values, d2.values);
    axpy(1.0, anchor.values, d2.values);
    axpy(-0.05, d2.values, theta.values);

    CHECK(vt::max_rel_err(rep.snapshots[2].delta.values, d2.values) < 1e-12);
    CHECK(vt::max_rel_err(rep.theta_out.values, theta.values) < 1e-12);
  }
  SUBCASE("ifo accounting: N + 2M") {
    Rng rng(3);
    const EpochReport rep = svrg_epoch(make_inputs(batch, theta0, 0.05, 4, &rng));
    CHECK(rep.ifo_queries == 6 + 2 * 4);
  }
}

TEST_CASE("sarah_epoch") {
  Rng data_rng(17);
  const NetworkShape shape = make_mlp_shape(2, 4, 3);
  const ParamVector theta0 = vt::random_params(data_rng, shape, 0.7);
  const std::vector<Transition> batch = vt::random_batch(data_rng, 6, 2, 3);

  SUBCASE("M = 0 is the pure full-gradient step") {
    const EpochReport rep = sarah_epoch(make_inputs(batch, theta0, 0.05, 0, nullptr));
    const GradVector anchor = full_batch_gradient(batch, theta0, 0.9);
    ParamVector want = theta0;
    axpy(-0.05, anchor.values, want.values);
    CHECK(rep.theta_out.values == want.values);
    CHECK(rep.theta_prev.values == theta0.values);
    CHECK(rep.ifo_queries == 6);
  }
  SUBCASE("eta = 0 with a single transition keeps delta constant") {
    const std::vector<Transition> one{batch[0]};
    Rng rng(5);
    EpochInputs in = make_inputs(one, theta0, 0.0, 6, &rng);
    in.record_snapshots = true;
    const EpochReport rep = sarah_epoch(in);
    for (std::size_t m = 1; m < rep.snapshots.size(); ++m)
      CHECK(rep.snapshots[m].delta.values == rep.snapshots[0].delta.values);
  }
  SUBCASE("telescoping identity against an independent accumulation") {
    Rng rng(5);
    EpochInputs in = make_inputs(batch, theta0, 0.05, 16, &rng);
    in.record_snapshots = true;
    const EpochReport rep = sarah_epoch(in);
    REQUIRE(rep.snapshots.size() == 17);
    REQUIRE(rep.drawn_indices.size() == 16);

    GradVector acc = full_batch_gradient(batch, theta0, 0.9);
    for (int m = 1; m <= 16; ++m) {
      const Transition& t = batch[rep.drawn_indices[m - 1]];
      axpy(1.0, td_gradient(t, rep.snapshots[m].theta, 0.9).values,
           acc.values);
      axpy(-1.0, td_gradient(t, rep.snapshots[m - 1].theta, 0.9).values,
           acc.values);
    }
    double max_abs = 0.0;
    for (std::size_t i = 0; i < acc.values.size(); ++i)
      max_abs = std::max(max_abs,
                         std::abs(acc.values[i] -
                                  rep.snapshots[16].delta.values[i]));
    CHECK(max_abs <= 1e-10);
  }
  SUBCASE("ifo accounting: N + 2M") {
    Rng rng(5);
    const EpochReport rep = sarah_epoch(make_inputs(batch, theta0, 0.05, 16, &rng));
    CHECK(rep.ifo_queries == 6 + 2 * 16);
  }
  SUBCASE("singleton batch: full-gradient step equals one sgd step") {
    const std::vector<Transition> one{batch[3]};
    Rng rng_a(9);
    Rng rng_b(9);
    const EpochReport sarah = sarah_epoch(make_inputs(one, theta0, 0.02, 0, &rng_a));
    const EpochReport sgd = sgd_epoch(make_inputs(one, theta0, 0.02, 1, &rng_b));
    CHECK(sarah.theta_out.values == sgd.theta_out.values);
  }
}

TEST_CASE("adam_process") {
  const NetworkShape shape = make_mlp_shape(1, 2, 1);
  const auto scalar_shape = make_mlp_shape(1, 1, 1);

  SUBCASE("first step: bias correction cancels exactly") {
    // with elementwise denom, theta' = theta - a*g_i/(|g_i|+eps) iff mhat == g
    ParamVector theta = zeros_like(shape);
    GradVector g = zeros_like(shape);
    Rng rng(1);
    for (double& v : theta.values) v = rng.uniform(-1, 1);
    for (double& v : g.values) v = rng.uniform(-1, 1);
    AdamState st = AdamState::initial(shape, 0.1, 0.9, 0.999, 1e-8,
                                      AdamState::Denominator::Elementwise);
    const auto [theta_next, st_next] = adam_process(theta, g, st);
    for (std::size_t i = 0; i < theta.values.size(); ++i) {
      const double want =
          theta.values[i] -
          0.1 * g.values[i] /
              (std::sqrt(g.values[i] * g.values[i]) + 1e-8);
      CHECK(theta_next.values[i] == want);
    }
    CHECK(st_next.s == 1);
  }
  SUBCASE("zero gradient with zero moments leaves theta unchanged") {
    ParamVector theta = zeros_like(shape);
    theta.values = {1, -2, 3, 4, 5, -6, 0.5};
    const GradVector g = zeros_like(shape);
    for (auto denom : {AdamState::Denominator::ScalarNorm,
                       AdamState::Denominator::Elementwise}) {
      const AdamState st =
          AdamState::initial(shape, 0.1, 0.9, 0.999, 1e-8, denom);
      const auto [theta_next, st_next] = adam_process(theta, g, st);
      CHECK(theta_next.values == theta.values);
    }
  }
  SUBCASE("hand-evaluated scalar step, both denominators") {
    // one nonzero parameter: g=2, a=0.1, b1=0.9, b2=0.999, eps=1e-8, s=0:
    // mhat=2, vhat=4, theta' = theta - 0.1*2/(2+1e-8). The scalar-norm
    // variant sees vhat = [4, 0], ||vhat|| = 4, sqrt = 2: the same step.
    const double want = 1.5 - 0.1 * 2.0 / (2.0 + 1e-8);
    for (auto denom : {AdamState::Denominator::ScalarNorm,
                       AdamState::Denominator::Elementwise}) {
      NetworkShape one;
      one.layers = {{1, 1}};  // weight + bias; only the weight is nonzero
      ParamVector theta = zeros_like(one);
      theta.values = {1.5, 0.0};
      GradVector g = zeros_like(one);
      g.values = {2.0, 0.0};
      const AdamState st = AdamState::initial(one, 0.1, 0.9, 0.999, 1e-8, denom);
      const auto [theta_next, st_next] = adam_process(theta, g, st);
      CHECK(std::abs(theta_next.values[0] - want) <= 1e-12);
    }
  }
  SUBCASE("beta1 = beta2 = 0 reduces to a norm-scaled gradient step") {
    ParamVector theta = zeros_like(shape);
    GradVector g = zeros_like(shape);
    Rng rng(21);
    for (double& v : theta.values) v = rng.uniform(-1, 1);
    for (double& v : g.values) v = rng.uniform(-1, 1);
    const AdamState st = AdamState::initial(shape, 0.05, 0.0, 0.0, 1e-12,
                                            AdamState::Denominator::ScalarNorm);
    const auto [theta_next, st_next] = adam_process(theta, g, st);
    // sqrt(||g.g||_2) is the 4-norm of g
    double p4 = 0.0;
    for (double v : g.values) p4 += v * v * v * v;
    const double g4 = std::pow(p4, 0.25);
    for (std::size_t i = 0; i < theta.values.size(); ++i) {
      const double want = theta.values[i] - 0.05 * g.values[i] / g4;
      CHECK(theta_next.values[i] == doctest::Approx(want).epsilon(1e-9));
    }
  }
  SUBCASE("moments persist and the counter increments") {
    ParamVector theta = zeros_like(shape);
    GradVector g1 = zeros_like(shape);
    GradVector g2 = zeros_like(shape);
    g1.values[0] = 1.0;
    g2.values[0] = -0.5;
    AdamState st = AdamState::initial(shape, 0.1, 0.9, 0.999, 1e-8,
                                      AdamState::Denominator::ScalarNorm);
    auto [t1, s1] = adam_process(theta, g1, st);
    CHECK(s1.s == 1);
    CHECK(s1.m.values[0] == doctest::Approx(0.1 * 1.0));
    auto [t2, s2] = adam_process(t1, g2, s1);
    CHECK(s2.s == 2);
    CHECK(s2.m.values[0] ==
          doctest::Approx(0.9 * s1.m.values[0] + 0.1 * -0.5));
    CHECK(s2.v.values[0] ==
          doctest::Approx(0.999 * s1.v.values[0] + 0.001 * 0.25));
  }
  SUBCASE("layout mismatch throws") {
    const ParamVector theta = zeros_like(shape);
    const GradVector g = zeros_like(make_mlp_shape(2, 2, 1));
    const AdamState st = AdamState::initial(shape, 0.1, 0.9, 0.999, 1e-8,
                                            AdamState::Denominator::ScalarNorm);
    CHECK_THROWS_AS(adam_process(theta, g, st), std::invalid_argument);
  }
}

TEST_CASE("eta_max_bound") {
  CHECK(eta_max_bound(2, 1.0) == 0.5);          // 2 / (sqrt(9) + 1)
  CHECK(eta_max_bound(6, 1.0) == 1.0 / 3.0);    // 2 / (sqrt(25) + 1)
  CHECK(eta_max_bound(16, 4.0) ==
        doctest::Approx(0.11034777731716484).epsilon(1e-15));
  SUBCASE("strictly decreasing in both arguments") {
    double prev = eta_max_bound(1, 2.0);
    for (int m = 2; m <= 64; ++m) {
      const double cur = eta_max_bound(m, 2.0);
      CHECK(cur < prev);
      prev = cur;
    }
    prev = eta_max_bound(8, 0.5);
    for (double mu = 1.0; mu <= 16.0; mu *= 2.0) {
      const double cur = eta_max_bound(8, mu);
      CHECK(cur < prev);
      prev = cur;
    }
  }
  SUBCASE("nonpositive inputs throw") {
    CHECK_THROWS_AS(eta_max_bound(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(eta_max_bound(4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(eta_max_bound(4, -1.0), std::invalid_argument);
  }
}

TEST_CASE("epoch input validation") {
  const ParamVector p = tiny_net();
  const std::vector<Transition> batch{terminal_transition(1.0, 0.0)};
  Rng rng(1);
  EpochInputs in = make_inputs(batch, p, 0.01, 2, &rng);
  SUBCASE("empty batch") {
    in.batch = {};
    CHECK_THROWS_AS(sarah_epoch(in), std::invalid_argument);
  }
  SUBCASE("negative eta") {
    in.eta = -0.1;
    CHECK_THROWS_AS(sgd_epoch(in), std::invalid_argument);
  }
  SUBCASE("gamma outside [0, 1]") {
    in.gamma = 1.5;
    CHECK_THROWS_AS(svrg_epoch(in), std::invalid_argument);
  }
  SUBCASE("forced draw count must equal the inner iterations") {
    const std::vector<int> draws{0};
    in.forced_draws = &draws;  // but inner_iters = 2
    CHECK_THROWS_AS(sarah_epoch(in), std::invalid_argument);
  }
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include <hsac/adam.hpp>
#include <hsac/errors.hpp>
#include <hsac/mlp.hpp>
#include <hsac/rng.hpp>

#include "support/finite_diff.hpp"

using namespace hsac;

TEST_CASE("zero-weight network maps everything to zero") {
  MlpConfig cfg{3, 2, {4}, Activation::kRelu};
  ParameterSet p = init_params(cfg, 1, "net");
  for (const auto& e : p.entries()) p.data(e.name).setZero();
  Eigen::RowVectorXd in(3);
  in << 1.0, -2.0, 0.5;
  auto fwd = mlp_forward(p, cfg, "net", in);
  CHECK(fwd.tape.value(fwd.output).isZero());
}

TEST_CASE("identity 1x1 network passes its input through") {
  MlpConfig cfg{1, 1, {}, Activation::kRelu};
  ParameterSet p = init_params(cfg, 1, "net");
  p.data("net.w0")(0) = 1.0;
  p.data("net.b0")(0) = 0.0;
  auto fwd = mlp_forward(p, cfg, "net", Eigen::RowVectorXd::Constant(1, 3.0));
  CHECK(fwd.tape.scalar_value(fwd.output) == 3.0);
}

TEST_CASE("random 2-4-1 relu net matches a hand-rolled forward pass") {
  MlpConfig cfg{2, 1, {4}, Activation::kRelu};
  ParameterSet p = init_params(cfg, 77, "net");
  Eigen::RowVectorXd in(2);
  in << 0.8, -1.3;
  // independent evaluation with plain loops
  const Eigen::MatrixXd w0 = p.matrix("net.w0");
  const Eigen::MatrixXd b0 = p.matrix("net.b0");
  const Eigen::MatrixXd w1 = p.matrix("net.w1");
  const Eigen::MatrixXd b1 = p.matrix("net.b1");
  double hidden[4];
  for (int j = 0; j < 4; ++j) {
    double s = b0(0, j);
    for (int i = 0; i < 2; ++i) s += in(i) * w0(i, j);
    hidden[j] = s > 0 ? s : 0;
  }
  double out = b1(0, 0);
  for (int j = 0; j < 4; ++j) out += hidden[j] * w1(j, 0);

  auto fwd = mlp_forward(p, cfg, "net", in);
  CHECK(fwd.tape.scalar_value(fwd.output) == doctest::Approx(out).epsilon(1e-14));
  CHECK(mlp_eval(p, cfg, "net", in)(0, 0) ==
        doctest::Approx(out).epsilon(1e-14));
}

TEST_CASE("initialization is deterministic with zero biases") {
  MlpConfig cfg{8, 3, {16, 16}, Activation::kTanh};
  ParameterSet a = init_params(cfg, 123, "net");
  ParameterSet b = init_params(cfg, 123, "net");
  for (const auto& e : a.entries())
    CHECK((a.data(e.name).array() == b.data(e.name).array()).all());
  CHECK(a.data("net.b0").isZero());
  CHECK(a.data("net.b1").isZero());
  CHECK(a.data("net.b2").isZero());
  ParameterSet c = init_params(cfg, 124, "net");
  CHECK((a.data("net.w0").array() != c.data("net.w0").array()).any());
}

TEST_CASE("init seed depends only on the parameter name") {
  // the same named layer inside two different architectures gets the same
  // initial values, which downstream equivalence checks rely on
  MlpConfig small{4, 2, {8}, Activation::kRelu};
  MlpConfig big{4, 2, {8, 8}, Activation::kRelu};
  ParameterSet a = init_params(small, 5, "actor.trunk");
  ParameterSet b = init_params(big, 5, "actor.trunk");
  CHECK((a.data("actor.trunk.w0").array() ==
         b.data("actor.trunk.w0").array()).all());
}

TEST_CASE("xavier weights have the stated spread") {
  MlpConfig cfg{64, 64, {}, Activation::kRelu};
  ParameterSet p = init_params(cfg, 9, "net");
  const auto& w = p.data("net.w0");
  const double limit = std::sqrt(6.0 / 128.0);
  CHECK(w.cwiseAbs().maxCoeff() <= limit);
  double mean = 0.0;
  for (int i = 0; i < 1000; ++i) mean += w(i);
  mean /= 1000.0;
  const double se = (limit / std::sqrt(3.0)) / std::sqrt(1000.0);
  CHECK(std::abs(mean) < 3.0 * se);
}

TEST_CASE("network gradients match finite differences") {
  MlpConfig cfg{3, 2, {5}, Activation::kTanh};
  ParameterSet p = init_params(cfg, 31, "net");
  Eigen::MatrixXd batch(4, 3);
  Rng rng(32);
  for (int i = 0; i < 4; ++i)
    batch.row(i) = rng.normal_vector(3).transpose();
  auto loss = [&](const ParameterSet& q) {
    Tape t(&q);
    NodeRef out = mlp_apply(t, cfg, "net", t.constant(batch));
    return t.scalar_value(t.sum_all(t.square(out)));
  };
  Tape t(&p);
  NodeRef out = mlp_apply(t, cfg, "net", t.constant(batch));
  NodeRef root = t.sum_all(t.square(out));
  ParameterSet analytic = t.backward(root);
  ParameterSet fd = hsac::testing::fd_grads(p, loss);
  CHECK(hsac::testing::grad_discrepancy(analytic, fd) < 1e-4);
}

TEST_CASE("first adam step matches the hand-evaluated recurrence") {
  ParameterSet p;
  p.add("w", {1}, Eigen::VectorXd::Zero(1));
  ParameterSet g = ParameterSet::zeros_like(p);
  g.data("w")(0) = 1.0;
  AdamState opt(p, {"w"}, AdamConfig{3e-4, 0.9, 0.999, 1e-8});
  opt.step(p, g);
  const double expected = -3e-4 / (1.0 + 1e-8);
  CHECK(p.data("w")(0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(opt.step_count() == 1);
}

TEST_CASE("zero gradient leaves parameters fixed") {
  ParameterSet p;
  p.add("w", {3}, Eigen::VectorXd::Constant(3, 0.7));
  ParameterSet g = ParameterSet::zeros_like(p);
  AdamState opt(p, {"w"}, AdamConfig{});
  // pre-load momenta with one real step, then zero grads must not move params
  for (int i = 0; i < 5; ++i) opt.step(p, g);
  CHECK((p.data("w").array() == 0.7).all());
}

TEST_CASE("adam walks a quadratic to its minimum") {
  ParameterSet p;
  p.add("w", {1}, Eigen::VectorXd::Constant(1, 1.0));
  AdamState opt(p, {"w"}, AdamConfig{0.01, 0.9, 0.999, 1e-8});
  ParameterSet g = ParameterSet::zeros_like(p);
  double prev = 1.0;
  bool monotone_approach = true;
  bool reached_floor = false;
  for (int i = 0; i < 2000; ++i) {
    g.data("w")(0) = 2.0 * p.data("w")(0);
    opt.step(p, g);
    const double now = std::abs(p.data("w")(0));
    reached_floor = reached_floor || now < 1e-6;
    // momentum may overshoot zero once the iterate is essentially converged;
    // the approach itself must be monotone after warmup
    if (i > 50 && !reached_floor && now > prev + 1e-12)
      monotone_approach = false;
    prev = now;
  }
  CHECK(std::abs(p.data("w")(0)) < 1e-6);
  CHECK(reached_floor);
  CHECK(monotone_approach);
}

TEST_CASE("non-finite gradients raise a training error") {
  ParameterSet p;
  p.add("w", {1}, Eigen::VectorXd::Zero(1));
  ParameterSet g = ParameterSet::zeros_like(p);
  g.data("w")(0) = std::nan("");
  AdamState opt(p, {"w"}, AdamConfig{});
  CHECK_THROWS_AS(opt.step(p, g), TrainingError);
}

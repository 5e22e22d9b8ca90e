#include <doctest.h>

#include <cmath>

#include <hsac/params.hpp>
#include <hsac/policy/flows.hpp>
#include <hsac/rng.hpp>
#include <hsac/tape.hpp>

#include "support/finite_diff.hpp"

using namespace hsac;
using hsac::testing::fd_grads;
using hsac::testing::grad_discrepancy;

namespace {

ParameterSet random_params(std::uint64_t seed) {
  Rng rng(seed);
  ParameterSet p;
  p.add("a", {2, 3}, rng.normal_vector(6));
  p.add("b", {2, 3}, Eigen::VectorXd(rng.normal_vector(6).array() + 3.0));
  p.add("row", {3}, rng.normal_vector(3));
  p.add("col", {2, 1}, rng.normal_vector(2));
  p.add("s", {1}, rng.normal_vector(1));
  return p;
}

}  // namespace

TEST_CASE("square gradient at w=3 is 6") {
  ParameterSet p;
  p.add("w", {1}, Eigen::VectorXd::Constant(1, 3.0));
  Tape t(&p);
  NodeRef root = t.sum_all(t.square(t.param("w")));
  CHECK(t.scalar_value(root) == 9.0);
  ParameterSet g = t.backward(root);
  CHECK(g.data("w")(0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("constants contribute no gradient") {
  ParameterSet p;
  p.add("w", {1}, Eigen::VectorXd::Constant(1, 3.0));
  Tape t(&p);
  NodeRef root = t.sum_all(t.scale(t.constant(Mat::Constant(2, 2, 1.0)), 4.0));
  ParameterSet g = t.backward(root);
  CHECK(g.data("w")(0) == 0.0);
}

TEST_CASE("stop_grad blocks the reverse sweep") {
  ParameterSet p;
  p.add("w", {1}, Eigen::VectorXd::Constant(1, 2.0));
  Tape t(&p);
  NodeRef w = t.param("w");
  NodeRef root = t.sum_all(t.mul(t.stop_grad(w), w));
  ParameterSet g = t.backward(root);
  CHECK(g.data("w")(0) == doctest::Approx(2.0));  // only the live factor
}

TEST_CASE("elementwise and reduction ops match finite differences") {
  auto build = [](Tape& t) {
    NodeRef a = t.param("a");
    NodeRef b = t.param("b");  // shifted positive, safe for div/log/sqrt
    NodeRef row = t.param("row");
    NodeRef col = t.param("col");
    NodeRef h = t.add(a, row);            // broadcast rows
    h = t.mul(h, col);                    // broadcast cols
    h = t.sub(h, t.div(a, b));
    h = t.add(h, t.minimum(a, b));
    h = t.add(h, t.tanh(t.scale(a, 0.5)));
    h = t.add(h, t.softplus(a));
    h = t.add(h, t.log(b));
    h = t.add(h, t.sqrt(b));
    h = t.add(h, t.exp(t.scale(a, 0.3)));
    h = t.add(h, t.square(a));
    h = t.add_const(h, 0.25);
    NodeRef red = t.add(t.sum_rows(h), t.row_logsumexp(h));
    red = t.add(red, t.row_norm(h));
    NodeRef mixed = t.add(t.sum_all(t.row_softmax(h)),
                          t.mean_all(t.row_log_softmax(h)));
    return t.add(t.sum_all(red), mixed);
  };
  ParameterSet p = random_params(1);
  auto loss = [&](const ParameterSet& q) {
    Tape t(&q);
    return t.scalar_value(build(t));
  };
  Tape t(&p);
  NodeRef root = build(t);
  CHECK(t.replay_matches());
  ParameterSet analytic = t.backward(root);
  ParameterSet fd = fd_grads(p, loss);
  CHECK(grad_discrepancy(analytic, fd) < 1e-4);
}

TEST_CASE("structural ops match finite differences") {
  auto build = [](Tape& t) {
    NodeRef a = t.param("a");
    NodeRef b = t.param("b");
    NodeRef cat = t.concat_cols(a, b);            // 2 x 6
    NodeRef sl = t.slice_cols(cat, 2, 3);         // 2 x 3
    NodeRef ga = t.gather_cols(sl, {1, 2});       // 2 x 1
    NodeRef dn = t.dense(sl, t.param("w"), t.param("bias"));
    NodeRef act = t.relu(dn);
    NodeRef cl = t.clamp(a, -0.5, 0.5);
    NodeRef sums = t.add(t.sum_all(t.sum_cols(act)), t.sum_all(t.sum_cols(cl)));
    return t.add(sums, t.sum_all(ga));
  };
  Rng rng(2);
  ParameterSet p;
  p.add("a", {2, 3}, rng.normal_vector(6));
  p.add("b", {2, 3}, rng.normal_vector(6));
  p.add("w", {3, 2}, rng.normal_vector(6));
  p.add("bias", {2}, rng.normal_vector(2));
  auto loss = [&](const ParameterSet& q) {
    Tape t(&q);
    return t.scalar_value(build(t));
  };
  Tape t(&p);
  NodeRef root = build(t);
  ParameterSet analytic = t.backward(root);
  ParameterSet fd = fd_grads(p, loss);
  CHECK(grad_discrepancy(analytic, fd) < 1e-4);
}

TEST_CASE("softmax rows are a simplex and log-softmax agrees") {
  Rng rng(3);
  ParameterSet p;
  p.add("x", {4, 5}, Eigen::VectorXd(rng.normal_vector(20) * 30.0));
  Tape t(&p);
  NodeRef x = t.param("x");
  Mat sm = t.value(t.row_softmax(x));
  Mat lsm = t.value(t.row_log_softmax(x));
  for (int i = 0; i < sm.rows(); ++i) {
    CHECK(sm.row(i).minCoeff() > 0.0);
    CHECK(std::abs(sm.row(i).sum() - 1.0) < 1e-12);
    for (int j = 0; j < sm.cols(); ++j)
      CHECK(std::abs(std::log(sm(i, j)) - lsm(i, j)) < 1e-12);
  }
}

TEST_CASE("replayed forward equals recorded values bitwise") {
  ParameterSet p = random_params(4);
  Tape t(&p);
  NodeRef a = t.param("a");
  NodeRef h = t.row_softmax(t.mul(a, t.param("col")));
  (void)t.sum_all(t.add(h, t.exp(t.param("row"))));
  CHECK(t.replay_matches());
}

TEST_CASE("probe returns the adjoint of a non-parameter input") {
  ParameterSet p;
  p.add("w", {2, 2}, Eigen::VectorXd::LinSpaced(4, 1, 4));
  Tape t(&p);
  NodeRef x = t.constant((Mat(1, 2) << 0.3, -0.7).finished());
  NodeRef y = t.dense(x, t.param("w"), t.constant(Mat::Zero(1, 2)));
  NodeRef root = t.sum_all(t.square(y));
  Mat adj;
  t.backward_with_probe(root, Mat::Constant(1, 1, 1.0), nullptr, x, &adj);
  // d/dx sum((xW)^2) = 2 (xW) W^T
  Mat xw = t.value(y);
  Mat expected = 2.0 * xw * p.matrix("w").transpose();
  CHECK((adj - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("flow inversion on tape matches the direct solve and its gradients") {
  Rng rng(5);
  ParameterSet p;
  p.add("z0", {2}, Eigen::VectorXd(rng.normal_vector(2) * 0.3));
  p.add("x", {1}, Eigen::VectorXd(rng.normal_vector(1) * 0.3));
  p.add("y", {1}, Eigen::VectorXd(rng.normal_vector(1) * 0.3));
  Mat targets(3, 2);
  targets << 0.7, -0.4, -1.2, 0.5, 0.05, 0.02;

  // forward consistency: applying the flow to the inverse returns the target
  {
    Tape t(&p);
    NodeRef z = t.flow_invert(t.constant(targets), t.param("z0"), t.param("x"),
                              t.param("y"));
    RadialFlowParams flow{p.matrix("z0").row(0), p.data("x")(0),
                          p.data("y")(0)};
    for (int i = 0; i < targets.rows(); ++i) {
      auto round_trip = radial_flow_forward(flow, t.value(z).row(i));
      CHECK((round_trip.value - targets.row(i)).norm() < 1e-9);
    }
  }

  auto loss = [&](const ParameterSet& q) {
    Tape t(&q);
    NodeRef z = t.flow_invert(t.constant(targets), t.param("z0"), t.param("x"),
                              t.param("y"));
    // weighted nonlinear readout so every component matters
    NodeRef w = t.mul(t.tanh(z), t.constant((Mat(1, 2) << 1.3, -0.6).finished()));
    return t.scalar_value(t.sum_all(w));
  };
  Tape t(&p);
  NodeRef z = t.flow_invert(t.constant(targets), t.param("z0"), t.param("x"),
                            t.param("y"));
  NodeRef w = t.mul(t.tanh(z), t.constant((Mat(1, 2) << 1.3, -0.6).finished()));
  NodeRef root = t.sum_all(w);
  ParameterSet analytic = t.backward(root);
  ParameterSet fd = fd_grads(p, loss, 1e-6);
  CHECK(grad_discrepancy(analytic, fd) < 1e-4);
}

TEST_CASE("flow inversion gradient w.r.t. the target point") {
  ParameterSet p;
  p.add("z0", {2}, Eigen::VectorXd::Constant(2, 0.1));
  p.add("x", {1}, Eigen::VectorXd::Constant(1, 0.2));
  p.add("y", {1}, Eigen::VectorXd::Constant(1, -0.4));
  Mat target(1, 2);
  target << 0.8, -0.3;
  Tape t(&p);
  NodeRef tgt = t.constant(target);
  NodeRef z = t.flow_invert(tgt, t.param("z0"), t.param("x"), t.param("y"));
  NodeRef root = t.sum_all(t.square(z));
  Mat adj;
  t.backward_with_probe(root, Mat::Constant(1, 1, 1.0), nullptr, tgt, &adj);

  RadialFlowParams flow{p.matrix("z0").row(0), p.data("x")(0), p.data("y")(0)};
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Eigen::RowVectorXd up = target.row(0), dn = target.row(0);
    up(j) += h;
    dn(j) -= h;
    const double fu = radial_flow_invert(flow, up).squaredNorm();
    const double fd_ = radial_flow_invert(flow, dn).squaredNorm();
    const double want = (fu - fd_) / (2 * h);
    CHECK(adj(0, j) == doctest::Approx(want).epsilon(1e-5));
  }
}

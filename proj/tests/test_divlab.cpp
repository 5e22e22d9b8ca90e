#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hsac/divlab/lab.hpp"
#include "hsac/errors.hpp"

using namespace hsac;

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

GaussianMixtureTarget single_gaussian(const Eigen::RowVectorXd& mean,
                                      double sigma) {
  GaussianMixtureTarget t;
  t.weights = Eigen::VectorXd::Constant(1, 1.0);
  t.means = mean;
  t.stds = Eigen::MatrixXd::Constant(1, mean.size(), sigma);
  return t;
}

// A policy whose heads are forced to an exact diagonal Gaussian: zero head
// weights so the trunk contributes nothing, biases set to the wanted moments.
// With x = y = 0 each flow layer is the exact identity, so flows > 0 keeps
// the same distribution.
LabPolicy rigged_policy(const GaussianMixtureTarget& target,
                        const Eigen::RowVectorXd& mu,
                        const Eigen::RowVectorXd& log_sigma, int flows = 0) {
  MatchConfig cfg;
  cfg.hidden = {6};
  cfg.flows = flows;
  cfg.seed = 5;
  LabPolicy p = make_lab_policy(cfg, target);
  p.params.data("actor.c0.mu.w0").setZero();
  p.params.data("actor.c0.ls.w0").setZero();
  p.params.data("actor.c0.mu.b0") = mu.transpose();
  p.params.data("actor.c0.ls.b0") = log_sigma.transpose();
  for (int i = 0; i < flows; ++i) {
    const std::string f = "actor.c0.f" + std::to_string(i);
    p.params.data(f + ".x").setZero();
    p.params.data(f + ".y").setZero();
  }
  return p;
}

double estimate_with_seed(const LabPolicy& p, const GaussianMixtureTarget& t,
                          ObjectiveKind kind, double alpha, int batch,
                          std::uint64_t seed) {
  Rng rng(seed);
  return estimate_objective(p, t, kind, alpha, batch, rng);
}

}  // namespace

TEST_CASE("mixture target validation") {
  GaussianMixtureTarget t = GaussianMixtureTarget::default_two_mode();
  CHECK_NOTHROW(t.validate());
  CHECK(t.dim() == 2);
  CHECK(t.components() == 2);

  GaussianMixtureTarget bad = t;
  bad.weights(0) = 0.7;  // no longer sums to one
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = t;
  bad.weights(0) = -0.5;
  bad.weights(1) = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = t;
  bad.stds(1, 0) = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = t;
  bad.means.resize(3, 2);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  GaussianMixtureTarget empty;
  CHECK_THROWS_AS(empty.validate(), ConfigError);
}

TEST_CASE("mixture log-density matches hand-computed values") {
  // standard normal in one dimension: peak log-density -log(2 pi)/2
  GaussianMixtureTarget n01 =
      single_gaussian(Eigen::RowVectorXd::Zero(1), 1.0);
  const Eigen::RowVectorXd origin1 = Eigen::RowVectorXd::Zero(1);
  CHECK(n01.log_density(origin1) ==
        doctest::Approx(-0.5 * kLogTwoPi).epsilon(1e-12));

  // two-mode default at a mode: the far component adds e^-64, negligible,
  // so the value is log(1/2) - 2 log(1/2) - log(2 pi) = -log(pi)
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  Eigen::RowVectorXd at_mode(2);
  at_mode << -2.0, 2.0;  // not a mode: check the midpoint instead below
  at_mode << -2.0, -2.0;
  CHECK(two.log_density(at_mode) ==
        doctest::Approx(-std::log(std::numbers::pi)).epsilon(1e-12));

  // midpoint (0,0): both components at squared z-distance 32, so the density
  // is 2 * 0.5 * exp(-16) / (2 pi 0.25) and its log is -16 - log(2pi) + 2log2
  const Eigen::RowVectorXd origin2 = Eigen::RowVectorXd::Zero(2);
  CHECK(two.log_density(origin2) ==
        doctest::Approx(-16.0 - kLogTwoPi + 2.0 * std::numbers::ln2)
            .epsilon(1e-12));

  // batch form agrees with the scalar form row by row
  Rng rng(11);
  const Eigen::MatrixXd pts = rng.normal_matrix(7, 2) * 3.0;
  const Eigen::VectorXd batch = two.log_density(pts);
  for (int i = 0; i < pts.rows(); ++i)
    CHECK(batch(i) ==
          doctest::Approx(two.log_density(Eigen::RowVectorXd(pts.row(i))))
              .epsilon(1e-14));
}

TEST_CASE("taped mixture log-density equals the value-level form") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  Rng rng(4);
  const Eigen::MatrixXd pts = rng.normal_matrix(9, 2) * 2.5;
  ParameterSet empty;
  Tape t(&empty);
  NodeRef node = mixture_log_density_tape(t, two, t.constant(pts));
  const Eigen::VectorXd want = two.log_density(pts);
  for (int i = 0; i < pts.rows(); ++i)
    CHECK(t.value(node)(i, 0) == doctest::Approx(want(i)).epsilon(1e-13));
}

TEST_CASE("mixture sampling is deterministic and mixes components") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  Rng a(21), b(21), c(22);
  const Eigen::MatrixXd s1 = two.sample(500, a);
  const Eigen::MatrixXd s2 = two.sample(500, b);
  CHECK((s1 - s2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s1 - two.sample(500, c)).cwiseAbs().maxCoeff() > 0.0);

  Rng big(7);
  const Eigen::MatrixXd s = two.sample(20000, big);
  // component split is binomial(0.5): three sigma is 3*sqrt(.25/n)
  int low = 0;
  for (int i = 0; i < s.rows(); ++i)
    if (s(i, 0) < 0.0) ++low;
  CHECK(std::abs(low / 20000.0 - 0.5) < 3.0 * std::sqrt(0.25 / 20000.0));
  // overall mean is (0,0) with per-dim spread sqrt(4 + 0.25)
  const double tol = 3.0 * std::sqrt(4.25 / 20000.0);
  CHECK(std::abs(s.col(0).mean()) < tol);
  CHECK(std::abs(s.col(1).mean()) < tol);
}

TEST_CASE("tempered partition constants match closed forms") {
  // at alpha = 1 the tempered density is the mixture itself
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  CHECK(std::abs(two.log_partition(1.0)) < 1e-6);

  // single Gaussian in one dimension: the tempered density is again Gaussian
  // with std sigma sqrt(alpha), so log Z = (1 - 1/a)/2 log(2 pi s^2) +
  // (log a)/2. Values below for s = 0.5.
  GaussianMixtureTarget g =
      single_gaussian(Eigen::RowVectorXd::Constant(1, 0.3), 0.5);
  CHECK(g.log_partition(0.5) ==
        doctest::Approx(-0.5723649429247001).epsilon(1e-9));
  CHECK(g.log_partition(2.0) ==
        doctest::Approx(0.4594692666023363).epsilon(1e-9));
  CHECK(g.log_partition(8.0) ==
        doctest::Approx(1.2372882044040540).epsilon(1e-9));

  // two-dim isotropic case factorizes: twice the one-dim constant
  Eigen::RowVectorXd m2(2);
  m2 << 0.3, 0.3;
  GaussianMixtureTarget g2 = single_gaussian(m2, 0.5);
  CHECK(g2.log_partition(2.0) ==
        doctest::Approx(0.9189385332046727).epsilon(1e-9));

  GaussianMixtureTarget g3 =
      single_gaussian(Eigen::RowVectorXd::Zero(3), 0.5);
  CHECK_THROWS_AS(g3.log_partition(2.0), ConfigError);
  CHECK_THROWS_AS(g.log_partition(0.0), ConfigError);
}

TEST_CASE("forward estimate vanishes for identical distributions") {
  Eigen::RowVectorXd mean(2);
  mean << 0.4, -0.3;
  GaussianMixtureTarget target = single_gaussian(mean, 0.5);
  LabPolicy p = rigged_policy(
      target, mean, Eigen::RowVectorXd::Constant(2, std::log(0.5)));
  // log pi and the target log-density cancel sample by sample, so the
  // estimate is zero to rounding, far inside the three-standard-error bound
  const double est = estimate_with_seed(
      p, target, ObjectiveKind::kForwardKl, 1.0, 10000, 91);
  CHECK(std::abs(est) < 1e-9);
}

TEST_CASE("forward estimator reproduces the closed-form Gaussian KL") {
  // KL(N(0,1) || N(1,1)) = 1/2; per-sample variance is 1, so three standard
  // errors over 10^4 samples is 0.03
  GaussianMixtureTarget target =
      single_gaussian(Eigen::RowVectorXd::Constant(1, 1.0), 1.0);
  LabPolicy p = rigged_policy(target, Eigen::RowVectorXd::Zero(1),
                              Eigen::RowVectorXd::Zero(1));
  const double est = estimate_with_seed(
      p, target, ObjectiveKind::kForwardKl, 1.0, 10000, 17);
  CHECK(std::abs(est - 0.5) < 0.03);
}

TEST_CASE("reverse estimate matches the Gaussian cross-entropy") {
  // E_{N(1,1)}[-log N(0,1)] = log(2 pi)/2 + 1 = 1.9189385332046727;
  // per-sample std is sqrt(1.5), three standard errors ~ 0.037
  GaussianMixtureTarget target =
      single_gaussian(Eigen::RowVectorXd::Constant(1, 1.0), 1.0);
  LabPolicy p = rigged_policy(target, Eigen::RowVectorXd::Zero(1),
                              Eigen::RowVectorXd::Zero(1));
  Rng rng(29);
  Tape t(&p.params);
  const ActorNodes actor = lab_forward(t, p);
  const ObjectiveNodes est = estimate_objective_tape(
      t, p, actor, target, ObjectiveKind::kReverseKl, 1.0, 10000, rng);
  CHECK(std::abs(t.scalar_value(est.loss) - 1.9189385332046727) < 0.037);
  CHECK(est.ess == 10000.0);  // exact sampling at alpha = 1
}

TEST_CASE("reverse estimate reweights correctly at other temperatures") {
  // target N(0, 0.5) tempered at alpha = 2 is N(0, 0.5 sqrt 2); against the
  // policy N(0.3, 1) the cross-entropy is log(2 pi)/2 + (0.5 + 0.09)/2
  GaussianMixtureTarget target =
      single_gaussian(Eigen::RowVectorXd::Zero(1), 0.5);
  LabPolicy p = rigged_policy(target,
                              Eigen::RowVectorXd::Constant(1, 0.3),
                              Eigen::RowVectorXd::Zero(1));
  Rng rng(31);
  Tape t(&p.params);
  const ActorNodes actor = lab_forward(t, p);
  const ObjectiveNodes est = estimate_objective_tape(
      t, p, actor, target, ObjectiveKind::kReverseKl, 2.0, 20000, rng);
  CHECK(std::abs(t.scalar_value(est.loss) - 1.2139385332046726) < 0.05);
  // self-normalized weights: diagnostics must show a real but partial loss
  // of effective samples
  CHECK(est.ess > 1000.0);
  CHECK(est.ess < 20000.0);
}

TEST_CASE("jensen-shannon vanishes for identical distributions") {
  Eigen::RowVectorXd mean(2);
  mean << -0.2, 0.7;
  GaussianMixtureTarget target = single_gaussian(mean, 0.5);
  LabPolicy p = rigged_policy(
      target, mean, Eigen::RowVectorXd::Constant(2, std::log(0.5)));
  const double est = estimate_with_seed(
      p, target, ObjectiveKind::kJensenShannon, 1.0, 4000, 37);
  CHECK(std::abs(est) < 1e-9);
}

TEST_CASE("jensen-shannon saturates at log 2 for disjoint distributions") {
  Eigen::RowVectorXd far(2);
  far << 8.0, 8.0;
  GaussianMixtureTarget target = single_gaussian(far, 0.05);
  LabPolicy p = rigged_policy(target,
                              Eigen::RowVectorXd::Constant(2, -8.0),
                              Eigen::RowVectorXd::Constant(2, -3.0));
  const double est = estimate_with_seed(
      p, target, ObjectiveKind::kJensenShannon, 1.0, 4000, 41);
  CHECK(est == doctest::Approx(std::numbers::ln2).epsilon(1e-6));
  CHECK(est <= std::numbers::ln2 + 1e-9);
}

TEST_CASE("linear switch endpoints reproduce the pure objectives") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  MatchConfig cfg;
  cfg.hidden = {7};
  cfg.flows = 1;
  cfg.seed = 13;
  LabPolicy p = make_lab_policy(cfg, two);
  const int batch = 32;

  const auto grads_of = [&](ObjectiveKind kind, double lambda,
                            bool skip_noise) {
    Rng rng(55);
    if (skip_noise) rng.normal_matrix(batch, two.dim());  // discard
    Tape t(&p.params);
    const ActorNodes actor = lab_forward(t, p);
    const ObjectiveNodes est = estimate_objective_tape(
        t, p, actor, two, kind, 1.0, batch, rng, lambda);
    ParameterSet g = ParameterSet::zeros_like(p.params);
    t.backward(est.loss, Mat::Ones(1, 1), &g);
    return g;
  };

  // weight 0: the reverse half is scaled away and the forward half consumed
  // the same noise, so gradients agree exactly
  ParameterSet g_switch0 = grads_of(ObjectiveKind::kLinearSwitch, 0.0, false);
  ParameterSet g_fwd = grads_of(ObjectiveKind::kForwardKl, 0.0, false);
  for (const auto& e : g_fwd.entries())
    CHECK((g_switch0.data(e.name) - e.data).cwiseAbs().maxCoeff() == 0.0);

  // weight 1: the reverse half sees the target points drawn after the
  // (unused) forward noise, so skipping that noise reproduces them
  ParameterSet g_switch1 = grads_of(ObjectiveKind::kLinearSwitch, 1.0, false);
  ParameterSet g_rev = grads_of(ObjectiveKind::kReverseKl, 0.0, true);
  for (const auto& e : g_rev.entries())
    CHECK((g_switch1.data(e.name) - e.data).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(grads_of(ObjectiveKind::kLinearSwitch, 1.5, false),
                  ConfigError);
}

TEST_CASE("objective gradients agree with central differences") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  MatchConfig cfg;
  cfg.hidden = {5};
  cfg.flows = 1;
  cfg.seed = 23;
  LabPolicy p = make_lab_policy(cfg, two);

  const std::vector<std::pair<std::string, int>> probes = {
      {"actor.w0", 0},          {"actor.b0", 1},
      {"actor.c0.mu.w0", 3},    {"actor.c0.ls.b0", 0},
      {"actor.c0.f0.z0", 1},    {"actor.c0.f0.x", 0},
      {"actor.c0.f0.y", 0}};

  const struct {
    ObjectiveKind kind;
    double alpha;
    double lambda;
  } cases[] = {{ObjectiveKind::kForwardKl, 1.7, 0.0},
               {ObjectiveKind::kReverseKl, 2.0, 0.0},
               {ObjectiveKind::kJensenShannon, 1.0, 0.0},
               {ObjectiveKind::kLinearSwitch, 1.0, 0.3}};
  for (const auto& c : cases) {
    CAPTURE(objective_name(c.kind));
    const auto loss_at = [&](ParameterSet* grads) {
      Rng rng(77);  // identical draws on every evaluation
      Tape t(&p.params);
      const ActorNodes actor = lab_forward(t, p);
      const ObjectiveNodes est = estimate_objective_tape(
          t, p, actor, two, c.kind, c.alpha, 6, rng, c.lambda);
      if (grads) t.backward(est.loss, Mat::Ones(1, 1), grads);
      return t.scalar_value(est.loss);
    };
    ParameterSet grads = ParameterSet::zeros_like(p.params);
    loss_at(&grads);
    const double h = 1e-6;
    for (const auto& [name, i] : probes) {
      CAPTURE(name);
      CAPTURE(i);
      const double saved = p.params.data(name)(i);
      p.params.data(name)(i) = saved + h;
      const double up = loss_at(nullptr);
      p.params.data(name)(i) = saved - h;
      const double down = loss_at(nullptr);
      p.params.data(name)(i) = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads.data(name)(i);
      CHECK(std::abs(fd - an) <=
            1e-6 + 1e-4 * std::max(std::abs(fd), std::abs(an)));
    }
  }
}

TEST_CASE("forward gradient is noise-level at the optimum") {
  Eigen::RowVectorXd mean(2);
  mean << 0.4, -0.3;
  GaussianMixtureTarget target = single_gaussian(mean, 0.5);
  LabPolicy p = rigged_policy(
      target, mean, Eigen::RowVectorXd::Constant(2, std::log(0.5)));
  Rng rng(59);
  Tape t(&p.params);
  const ActorNodes actor = lab_forward(t, p);
  const ObjectiveNodes est = estimate_objective_tape(
      t, p, actor, target, ObjectiveKind::kForwardKl, 1.0, 20000, rng);
  ParameterSet grads = ParameterSet::zeros_like(p.params);
  t.backward(est.loss, Mat::Ones(1, 1), &grads);
  // per-sample head gradients have O(1) spread, so the batch mean should be
  // a few times 1/sqrt(20000)
  for (const char* name : {"actor.c0.mu.b0", "actor.c0.ls.b0",
                           "actor.c0.mu.w0", "actor.c0.ls.w0"})
    CHECK(grads.data(name).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("value-level sampling matches the taped sampler") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  MatchConfig cfg;
  cfg.hidden = {6};
  cfg.flows = 2;
  cfg.seed = 3;
  for (bool squashed : {false, true}) {
    CAPTURE(squashed);
    cfg.squashed = squashed;
    LabPolicy p = make_lab_policy(cfg, two);
    // push the flows off identity so the chain actually does something
    p.params.data("actor.c0.f0.x")(0) = 0.3;
    p.params.data("actor.c0.f0.y")(0) = 0.8;
    p.params.data("actor.c0.f1.y")(0) = -0.4;

    Rng r1(101), r2(101);
    const Eigen::MatrixXd direct = lab_sample(p, 5, r1);
    Tape t(&p.params);
    const ActorNodes actor = lab_forward(t, p);
    const LabSampleNodes s = lab_sample_tape(t, p, actor, 5, r2);
    CHECK((direct - t.value(s.a)).cwiseAbs().maxCoeff() < 1e-12);
    if (squashed) CHECK(direct.cwiseAbs().maxCoeff() < 1.0);
  }
}

TEST_CASE("density of supplied points agrees with the sampling density") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  MatchConfig cfg;
  cfg.hidden = {6};
  cfg.flows = 2;
  cfg.seed = 9;
  for (bool squashed : {false, true}) {
    CAPTURE(squashed);
    cfg.squashed = squashed;
    LabPolicy p = make_lab_policy(cfg, two);
    p.params.data("actor.c0.f0.x")(0) = -0.2;
    p.params.data("actor.c0.f0.y")(0) = 0.5;
    p.params.data("actor.c0.f1.y")(0) = 0.9;

    Rng rng(61);
    Tape t(&p.params);
    const ActorNodes actor = lab_forward(t, p);
    const LabSampleNodes s = lab_sample_tape(t, p, actor, 8, rng);
    NodeRef lp = lab_log_prob_tape(t, p, actor, t.value(s.a));
    for (int i = 0; i < 8; ++i)
      CHECK(t.value(lp)(i, 0) ==
            doctest::Approx(t.value(s.logp)(i, 0)).epsilon(1e-9));
  }
}

TEST_CASE("one-dim flow policy density integrates to one") {
  GaussianMixtureTarget g =
      single_gaussian(Eigen::RowVectorXd::Zero(1), 1.0);
  MatchConfig cfg;
  cfg.hidden = {6};
  cfg.flows = 3;
  cfg.seed = 77;
  LabPolicy p = make_lab_policy(cfg, g);
  p.params.data("actor.c0.f0.x")(0) = 0.4;
  p.params.data("actor.c0.f0.y")(0) = 1.0;
  p.params.data("actor.c0.f1.z0")(0) = 0.6;
  p.params.data("actor.c0.f1.y")(0) = -0.7;
  p.params.data("actor.c0.f2.y")(0) = 0.5;

  const int m = 4001;
  Eigen::MatrixXd grid(m, 1);
  grid.col(0) = Eigen::VectorXd::LinSpaced(m, -20.0, 20.0);
  Tape t(&p.params);
  const ActorNodes actor = lab_forward(t, p);
  NodeRef lp = lab_log_prob_tape(t, p, actor, grid);
  const double dx = grid(1, 0) - grid(0, 0);
  double integral = 0.0;
  for (int i = 0; i < m; ++i) {
    const double w = (i == 0 || i == m - 1) ? 0.5 : 1.0;
    integral += w * dx * std::exp(t.value(lp)(i, 0));
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("fit traces are deterministic per seed") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  MatchConfig cfg;
  cfg.steps = 25;
  cfg.batch = 16;
  cfg.hidden = {8};
  cfg.flows = 1;
  cfg.seed = 3;
  const FitResult a = run_match(cfg, two);
  const FitResult b = run_match(cfg, two);
  REQUIRE(a.losses.size() == 25);
  REQUIRE(a.ess.size() == 25);
  for (std::size_t i = 0; i < a.losses.size(); ++i) {
    CHECK(a.losses[i] == b.losses[i]);
    CHECK(a.ess[i] == 16.0);  // exact sampling at alpha = 1
  }
  for (const auto& e : a.policy.params.entries())
    CHECK((b.policy.params.data(e.name) - e.data).cwiseAbs().maxCoeff() ==
          0.0);

  cfg.seed = 4;
  const FitResult c = run_match(cfg, two);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.losses.size(); ++i)
    any_diff = any_diff || a.losses[i] != c.losses[i];
  CHECK(any_diff);
}

TEST_CASE("fitting a single-gaussian target drives the forward KL to zero") {
  Eigen::RowVectorXd mean(2);
  mean << 1.0, -0.5;
  GaussianMixtureTarget target = single_gaussian(mean, 0.5);
  MatchConfig cfg;
  cfg.steps = 3000;
  cfg.batch = 64;
  cfg.hidden = {16, 16};
  cfg.lr = 1e-3;
  cfg.seed = 12;
  const FitResult res = run_match(cfg, target);
  const double final_kl = estimate_with_seed(
      res.policy, target, ObjectiveKind::kForwardKl, 1.0, 4000, 99);
  CHECK(final_kl < 0.05);
}

TEST_CASE("forward fit on the two-mode target collapses to one mode") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  MatchConfig cfg;
  cfg.steps = 3000;
  cfg.batch = 64;
  cfg.hidden = {16, 16};
  cfg.lr = 1e-3;
  cfg.seed = 1;
  const FitResult res = run_match(cfg, two);
  Rng rng(5);
  const Eigen::VectorXd mass = mode_mass(res.policy, two, 4000, rng);
  CHECK(mass.maxCoeff() >= 0.85);
  CHECK(mass.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("non-finite parameters abort the run with a diagnostic") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  MatchConfig cfg;
  cfg.steps = 10;
  cfg.batch = 8;
  cfg.hidden = {6};
  LabPolicy p = make_lab_policy(cfg, two);
  p.params.data("actor.c0.mu.b0")(0) =
      std::numeric_limits<double>::quiet_NaN();
  Rng rng(1);
  CHECK_THROWS_AS(
      estimate_objective(p, two, ObjectiveKind::kForwardKl, 1.0, 8, rng),
      DivergenceError);
  CHECK_THROWS_AS(fit(std::move(p), two, cfg), DivergenceError);
}

TEST_CASE("mode masses concentrate on the sampled component") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  // policy pinned to the second component: everything lands on mode 1
  Eigen::RowVectorXd mean(2);
  mean << 2.0, 2.0;
  LabPolicy p = rigged_policy(
      two, mean, Eigen::RowVectorXd::Constant(2, std::log(0.5)));
  Rng rng(19);
  const Eigen::VectorXd mass = mode_mass(p, two, 2000, rng);
  CHECK(mass(1) >= 0.999);

  // samples from the full mixture split evenly within binomial noise
  Rng rng2(23);
  const Eigen::MatrixXd s = two.sample(10000, rng2);
  const Eigen::VectorXd even = mode_mass_from_samples(s, two);
  CHECK(std::abs(even(0) - 0.5) <= 3.0 * std::sqrt(0.25 / 10000.0));
  CHECK(even.sum() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(
      mode_mass_from_samples(Eigen::MatrixXd(0, 2), two), ContractError);
  CHECK_THROWS_AS(
      mode_mass_from_samples(Eigen::MatrixXd::Zero(3, 3), two),
      ContractError);
}

TEST_CASE("kernel density estimates match their oracles") {
  // all-equal samples floor the bandwidth at 1e-3, so the peak is the kernel
  // value 1 / (h sqrt(2 pi))
  Eigen::MatrixXd repeated = Eigen::MatrixXd::Zero(5, 1);
  Eigen::MatrixXd origin = Eigen::MatrixXd::Zero(1, 1);
  CHECK(kde_density(repeated, origin)(0) ==
        doctest::Approx(398.94228040143275).epsilon(1e-9));

  // large-sample estimate of a standard normal within 0.02 everywhere
  Rng rng(43);
  Eigen::MatrixXd xs(20000, 1);
  for (int i = 0; i < xs.rows(); ++i) xs(i, 0) = rng.normal();
  const int m = 161;
  Eigen::MatrixXd grid(m, 1);
  grid.col(0) = Eigen::VectorXd::LinSpaced(m, -4.0, 4.0);
  const Eigen::VectorXd dens = kde_density(xs, grid);
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    const double ref =
        std::exp(-0.5 * grid(i, 0) * grid(i, 0)) / std::sqrt(2 * std::numbers::pi);
    worst = std::max(worst, std::abs(dens(i) - ref));
  }
  CHECK(worst < 0.02);
  CHECK(dens.minCoeff() >= 0.0);

  // trapezoid integral over a wide grid is ~1
  Eigen::MatrixXd wide(501, 1);
  wide.col(0) = Eigen::VectorXd::LinSpaced(501, -6.0, 6.0);
  const Eigen::VectorXd d2 = kde_density(xs, wide);
  const double dx = wide(1, 0) - wide(0, 0);
  double integral = 0.0;
  for (int i = 0; i < 501; ++i)
    integral += ((i == 0 || i == 500) ? 0.5 : 1.0) * dx * d2(i);
  CHECK(integral == doctest::Approx(1.0).epsilon(0.02));

  CHECK_THROWS_AS(kde_density(origin, grid), ContractError);
  CHECK_THROWS_AS(kde_density(xs, Eigen::MatrixXd::Zero(4, 2)),
                  ContractError);
}

TEST_CASE("two-dim grids enumerate rows first-axis-outer") {
  const Eigen::MatrixXd g = grid_2d(-1.0, 1.0, 3);
  REQUIRE(g.rows() == 9);
  CHECK(g(0, 0) == -1.0);
  CHECK(g(0, 1) == -1.0);
  CHECK(g(1, 0) == -1.0);
  CHECK(g(1, 1) == 0.0);
  CHECK(g(3, 0) == 0.0);
  CHECK(g(8, 0) == 1.0);
  CHECK(g(8, 1) == 1.0);
  CHECK_THROWS_AS(grid_2d(0.0, 1.0, 1), ConfigError);
}

TEST_CASE("temperature sweep runs every cell deterministically") {
  GaussianMixtureTarget two = GaussianMixtureTarget::default_two_mode();
  MatchConfig base;
  base.steps = 6;
  base.batch = 8;
  base.hidden = {6};
  base.lr = 1e-3;
  base.seed = 2;
  const std::vector<double> alphas = {0.7, 1.3};
  const std::vector<SweepCell> cells =
      temperature_sweep(base, alphas, two, 500);
  REQUIRE(cells.size() == 8);  // |alphas| x 2 objectives x 2 flow counts

  int idx = 0;
  for (double a : alphas)
    for (ObjectiveKind kind :
         {ObjectiveKind::kForwardKl, ObjectiveKind::kReverseKl})
      for (int f : {0, 3}) {
        CAPTURE(idx);
        CHECK(cells[idx].alpha == a);
        CHECK(cells[idx].objective == kind);
        CHECK(cells[idx].flows == f);
        CHECK(!cells[idx].failed);
        REQUIRE(cells[idx].masses.size() == 2);
        CHECK(cells[idx].masses.sum() ==
              doctest::Approx(1.0).epsilon(1e-12));
        ++idx;
      }

  const std::vector<SweepCell> again =
      temperature_sweep(base, alphas, two, 500);
  for (std::size_t i = 0; i < cells.size(); ++i)
    CHECK((cells[i].masses - again[i].masses).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(temperature_sweep(base, {0.0}, two, 500), ConfigError);
}

TEST_CASE("config validation and objective names") {
  MatchConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  MatchConfig bad = cfg;
  bad.steps = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.batch = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.lr = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.hidden = {};
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  for (ObjectiveKind k :
       {ObjectiveKind::kForwardKl, ObjectiveKind::kReverseKl,
        ObjectiveKind::kJensenShannon, ObjectiveKind::kLinearSwitch})
    CHECK(objective_from_name(objective_name(k)) == k);
  CHECK_THROWS_AS(objective_from_name("wasserstein"), ConfigError);

  const Eigen::RowVectorXd s0 = default_lab_state();
  CHECK(s0.size() == 8);
  CHECK((s0 - default_lab_state()).cwiseAbs().maxCoeff() == 0.0);
}

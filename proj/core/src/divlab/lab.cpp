#include "hsac/divlab/lab.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "hsac/adam.hpp"
#include "hsac/errors.hpp"
#include "hsac/policy/flows.hpp"

namespace hsac {

std::string objective_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kForwardKl: return "forward_kl";
    case ObjectiveKind::kReverseKl: return "reverse_kl";
    case ObjectiveKind::kJensenShannon: return "jensen_shannon";
    case ObjectiveKind::kLinearSwitch: return "linear_switch";
  }
  throw ConfigError("objective: unknown kind");
}

ObjectiveKind objective_from_name(const std::string& name) {
  if (name == "forward_kl") return ObjectiveKind::kForwardKl;
  if (name == "reverse_kl") return ObjectiveKind::kReverseKl;
  if (name == "jensen_shannon") return ObjectiveKind::kJensenShannon;
  if (name == "linear_switch") return ObjectiveKind::kLinearSwitch;
  throw ConfigError("objective: unknown name '" + name + "'");
}

void MatchConfig::validate() const {
  if (steps < 1) throw ConfigError("match: steps must be >= 1");
  if (alpha <= 0.0) throw ConfigError("match: alpha must be > 0");
  if (flows < 0) throw ConfigError("match: flows must be >= 0");
  if (batch < 1) throw ConfigError("match: batch must be >= 1");
  if (lr <= 0.0) throw ConfigError("match: lr must be > 0");
  if (hidden.empty()) throw ConfigError("match: hidden layers required");
  for (int h : hidden)
    if (h < 1) throw ConfigError("match: hidden sizes must be >= 1");
}

Eigen::RowVectorXd default_lab_state() {
  Rng rng(fnv1a64("divlab.s0"));
  return rng.normal_vector(8).transpose();
}

LabPolicy make_lab_policy(const MatchConfig& cfg,
                          const GaussianMixtureTarget& target) {
  cfg.validate();
  target.validate();
  LabPolicy policy;
  policy.squashed = cfg.squashed;
  policy.state = cfg.state.size() > 0 ? cfg.state : default_lab_state();
  policy.arch.action_spec.continuous = {target.dim()};
  policy.arch.action_spec.binding = ContinuousBinding::kIndependent;
  policy.arch.obs_dim = static_cast<int>(policy.state.size());
  policy.arch.actor_hidden = cfg.hidden;
  policy.arch.critic_hidden = cfg.hidden;  // unused, but keeps arch valid
  policy.arch.activation = cfg.activation;
  policy.arch.flows = cfg.flows;
  add_actor_params(policy.params, policy.arch, cfg.seed);
  return policy;
}

ActorNodes lab_forward(Tape& t, const LabPolicy& policy) {
  return actor_forward(t, policy.arch, t.constant(Mat(policy.state)));
}

LabSampleNodes lab_sample_tape(Tape& t, const LabPolicy& policy,
                               const ActorNodes& actor, int n, Rng& rng) {
  const int d = policy.arch.slot_dim(0);
  NodeRef eps = t.constant(rng.normal_matrix(n, d));
  NodeRef z = t.add(actor.mu[0], t.mul(t.exp(actor.log_std[0]), eps));
  FlowChainNodes chain =
      flow_chain_forward_tape(t, actor.flow_layers[0], z);
  LabSampleNodes out;
  out.logp = t.sub(
      gaussian_log_prob_tape(t, actor.mu[0], actor.log_std[0], z),
      chain.log_det_sum);
  if (policy.squashed) {
    out.a = t.tanh(chain.final);
    out.logp = t.sub(out.logp, tanh_log_jacobian_tape(t, chain.final));
  } else {
    out.a = chain.final;
  }
  return out;
}

NodeRef lab_log_prob_tape(Tape& t, const LabPolicy& policy,
                          const ActorNodes& actor,
                          const Eigen::MatrixXd& points) {
  if (points.cols() != policy.arch.slot_dim(0))
    throw ContractError("lab: point dimension does not match the policy");
  NodeRef pts = t.constant(points);
  if (policy.squashed) {
    NodeRef w = t.atanh(t.clamp(pts, -1.0 + 1e-12, 1.0 - 1e-12));
    NodeRef pre = flow_log_prob_presquash_tape(
        t, actor.flow_layers[0], actor.mu[0], actor.log_std[0], w);
    return t.sub(pre, tanh_log_jacobian_tape(t, w));
  }
  return flow_log_prob_presquash_tape(t, actor.flow_layers[0], actor.mu[0],
                                      actor.log_std[0], pts);
}

Eigen::MatrixXd lab_sample(const LabPolicy& policy, int n, Rng& rng) {
  const AgentConfig& arch = policy.arch;
  Eigen::MatrixXd h =
      mlp_eval(policy.params, arch.trunk_config(), "actor", Mat(policy.state));
  if (arch.activation == Activation::kRelu)
    h = h.cwiseMax(0.0);
  else
    h = h.array().tanh().matrix();
  Eigen::RowVectorXd mu =
      h.row(0) * policy.params.matrix("actor.c0.mu.w0") +
      policy.params.matrix("actor.c0.mu.b0").row(0);
  Eigen::RowVectorXd ls =
      h.row(0) * policy.params.matrix("actor.c0.ls.w0") +
      policy.params.matrix("actor.c0.ls.b0").row(0);
  ls = ls.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  const Eigen::RowVectorXd sigma = ls.array().exp().matrix();
  const std::vector<RadialFlowParams> flows =
      slot_flow_params(policy.params, arch, 0);

  const int d = arch.slot_dim(0);
  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::RowVectorXd eps = rng.normal_vector(d).transpose();
    const Eigen::RowVectorXd z = mu + sigma.cwiseProduct(eps);
    const FlowTrace trace = flow_chain_forward(flows, z);
    out.row(i) = policy.squashed
                     ? trace.final().array().tanh().matrix().eval()
                     : trace.final();
  }
  return out;
}

namespace {

struct TargetDraw {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;  // self-normalized, summing to one
  double ess = 0.0;
};

// Draws from the alpha=1 mixture; for other temperatures the tempered
// expectation is formed with self-normalized importance weights
// proportional to exp((1/alpha - 1) log pi).
TargetDraw draw_tempered(const GaussianMixtureTarget& target, double alpha,
                         int n, Rng& rng) {
  TargetDraw out;
  out.points = target.sample(n, rng);
  if (alpha == 1.0) {
    out.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
    out.ess = n;
    return out;
  }
  Eigen::VectorXd lw =
      (1.0 / alpha - 1.0) * target.log_density(out.points).array();
  lw.array() -= lw.maxCoeff();
  out.weights = lw.array().exp();
  out.weights /= out.weights.sum();
  out.ess = 1.0 / out.weights.squaredNorm();
  return out;
}

NodeRef forward_kl_tape(Tape& t, const LabPolicy& policy,
                        const ActorNodes& actor,
                        const GaussianMixtureTarget& target, double alpha,
                        int batch, Rng& rng) {
  const LabSampleNodes s = lab_sample_tape(t, policy, actor, batch, rng);
  NodeRef q = mixture_log_density_tape(t, target, s.a);
  return t.mean_all(t.sub(s.logp, t.scale(q, 1.0 / alpha)));
}

}  // namespace

ObjectiveNodes estimate_objective_tape(Tape& t, const LabPolicy& policy,
                                       const ActorNodes& actor,
                                       const GaussianMixtureTarget& target,
                                       ObjectiveKind kind, double alpha,
                                       int batch, Rng& rng,
                                       double switch_lambda) {
  if (batch < 1) throw ConfigError("objective: batch must be >= 1");
  if (alpha <= 0.0) throw ConfigError("objective: alpha must be > 0");
  target.validate();

  ObjectiveNodes out;
  switch (kind) {
    case ObjectiveKind::kForwardKl: {
      out.loss = forward_kl_tape(t, policy, actor, target, alpha, batch, rng);
      out.ess = batch;
      return out;
    }
    case ObjectiveKind::kReverseKl: {
      const TargetDraw draw = draw_tempered(target, alpha, batch, rng);
      NodeRef lp = lab_log_prob_tape(t, policy, actor, draw.points);
      out.loss = t.scale(t.sum_all(t.mul(t.constant(draw.weights), lp)), -1.0);
      out.ess = draw.ess;
      return out;
    }
    case ObjectiveKind::kJensenShannon: {
      const double log_half = std::log(0.5);
      const double log_z = alpha == 1.0 ? 0.0 : target.log_partition(alpha);
      // policy-side expectation
      const LabSampleNodes s = lab_sample_tape(t, policy, actor, batch, rng);
      NodeRef log_t_p = t.add_const(
          t.scale(mixture_log_density_tape(t, target, s.a), 1.0 / alpha),
          -log_z);
      NodeRef log_m_p = t.row_logsumexp(
          t.concat_cols(t.add_const(s.logp, log_half),
                        t.add_const(log_t_p, log_half)));
      NodeRef term_p = t.mean_all(t.sub(s.logp, log_m_p));
      // target-side expectation
      const TargetDraw draw = draw_tempered(target, alpha, batch, rng);
      const Eigen::VectorXd log_t_x =
          target.log_density(draw.points) / alpha -
          Eigen::VectorXd::Constant(batch, log_z);
      NodeRef lp_x = lab_log_prob_tape(t, policy, actor, draw.points);
      NodeRef log_m_x = t.row_logsumexp(
          t.concat_cols(t.add_const(lp_x, log_half),
                        t.add_const(t.constant(log_t_x), log_half)));
      NodeRef term_t = t.sum_all(t.mul(
          t.constant(draw.weights),
          t.sub(t.constant(log_t_x), log_m_x)));
      out.loss = t.scale(t.add(term_p, term_t), 0.5);
      out.ess = draw.ess;
      return out;
    }
    case ObjectiveKind::kLinearSwitch: {
      if (switch_lambda < 0.0 || switch_lambda > 1.0)
        throw ConfigError("objective: switch weight must be in [0, 1]");
      NodeRef fwd =
          forward_kl_tape(t, policy, actor, target, alpha, batch, rng);
      const TargetDraw draw = draw_tempered(target, alpha, batch, rng);
      NodeRef lp = lab_log_prob_tape(t, policy, actor, draw.points);
      NodeRef rev =
          t.scale(t.sum_all(t.mul(t.constant(draw.weights), lp)), -1.0);
      out.loss = t.add(t.scale(fwd, 1.0 - switch_lambda),
                       t.scale(rev, switch_lambda));
      out.ess = draw.ess;
      return out;
    }
  }
  throw ConfigError("objective: unknown kind");
}

double estimate_objective(const LabPolicy& policy,
                          const GaussianMixtureTarget& target,
                          ObjectiveKind kind, double alpha, int batch,
                          Rng& rng) {
  Tape t(&policy.params);
  const ActorNodes actor = lab_forward(t, policy);
  const ObjectiveNodes est =
      estimate_objective_tape(t, policy, actor, target, kind, alpha, batch,
                              rng);
  const double v = t.scalar_value(est.loss);
  if (!std::isfinite(v))
    throw DivergenceError("objective estimate is not finite (" +
                          objective_name(kind) + ")");
  return v;
}

FitResult fit(LabPolicy policy, const GaussianMixtureTarget& target,
              const MatchConfig& cfg) {
  cfg.validate();
  target.validate();
  if (policy.arch.slot_dim(0) != target.dim())
    throw ConfigError("fit: policy and target dimensions disagree");

  AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.lr;
  AdamState opt(policy.params, policy.params.names_with_prefix("actor."),
                adam_cfg);
  Rng rng(stream_seed(cfg.seed, fnv1a64("fit"), 0));

  FitResult out;
  out.losses.reserve(cfg.steps);
  out.ess.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    const double lam = cfg.objective == ObjectiveKind::kLinearSwitch
                           ? static_cast<double>(step) / cfg.steps
                           : 0.0;
    ParameterSet grads = ParameterSet::zeros_like(policy.params);
    double loss;
    double ess;
    {
      Tape t(&policy.params);
      const ActorNodes actor = lab_forward(t, policy);
      const ObjectiveNodes est =
          estimate_objective_tape(t, policy, actor, target, cfg.objective,
                                  cfg.alpha, cfg.batch, rng, lam);
      loss = t.scalar_value(est.loss);
      ess = est.ess;
      if (!std::isfinite(loss))
        throw DivergenceError(
            "distribution matching diverged at step " +
            std::to_string(step) + " (" + objective_name(cfg.objective) +
            ", loss not finite)");
      t.backward(est.loss, Mat::Ones(1, 1), &grads);
    }
    opt.step(policy.params, grads);
    out.losses.push_back(loss);
    out.ess.push_back(ess);
  }
  out.policy = std::move(policy);
  return out;
}

FitResult run_match(const MatchConfig& cfg,
                    const GaussianMixtureTarget& target) {
  return fit(make_lab_policy(cfg, target), target, cfg);
}

Eigen::VectorXd mode_mass_from_samples(const Eigen::MatrixXd& samples,
                                       const GaussianMixtureTarget& target) {
  target.validate();
  if (samples.rows() < 1)
    throw ContractError("mode_mass: needs at least one sample");
  if (samples.cols() != target.dim())
    throw ContractError("mode_mass: sample dimension mismatch");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(target.components());
  for (int i = 0; i < samples.rows(); ++i) {
    int best = 0;
    double best_d2 =
        (samples.row(i) - target.means.row(0)).squaredNorm();
    for (int k = 1; k < target.components(); ++k) {
      const double d2 = (samples.row(i) - target.means.row(k)).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = k;
      }
    }
    counts(best) += 1.0;
  }
  return counts / static_cast<double>(samples.rows());
}

Eigen::VectorXd mode_mass(const LabPolicy& policy,
                          const GaussianMixtureTarget& target, int n,
                          Rng& rng) {
  return mode_mass_from_samples(lab_sample(policy, n, rng), target);
}

Eigen::VectorXd kde_density(const Eigen::MatrixXd& samples,
                            const Eigen::MatrixXd& grid) {
  const int n = static_cast<int>(samples.rows());
  const int d = static_cast<int>(samples.cols());
  if (n < 2) throw ContractError("kde: needs at least two samples");
  if (grid.cols() != d) throw ContractError("kde: grid dimension mismatch");

  const double factor = std::pow(n, -1.0 / (d + 4));
  Eigen::RowVectorXd h(d);
  for (int j = 0; j < d; ++j) {
    const double mean = samples.col(j).mean();
    const double var =
        (samples.col(j).array() - mean).square().sum() / (n - 1);
    h(j) = std::max(factor * std::sqrt(var), 1e-3);
  }
  const double norm =
      std::pow(2.0 * std::numbers::pi, -0.5 * d) / (h.prod() * n);

  Eigen::VectorXd out(grid.rows());
  for (int g = 0; g < grid.rows(); ++g) {
    const Eigen::ArrayXXd z =
        (samples.rowwise() - grid.row(g)).array().rowwise() / h.array();
    out(g) = norm * (-0.5 * z.square().rowwise().sum()).exp().sum();
  }
  return out;
}

Eigen::MatrixXd grid_2d(double lo, double hi, int per_axis) {
  if (per_axis < 2) throw ConfigError("grid: needs at least two points");
  const Eigen::VectorXd axis =
      Eigen::VectorXd::LinSpaced(per_axis, lo, hi);
  Eigen::MatrixXd out(per_axis * per_axis, 2);
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j) {
      out(i * per_axis + j, 0) = axis(i);
      out(i * per_axis + j, 1) = axis(j);
    }
  return out;
}

std::vector<SweepCell> temperature_sweep(const MatchConfig& base,
                                         const std::vector<double>& alphas,
                                         const GaussianMixtureTarget& target,
                                         int mass_samples) {
  base.validate();
  if (mass_samples < 1)
    throw ConfigError("sweep: mass_samples must be >= 1");
  for (double a : alphas)
    if (a <= 0.0) throw ConfigError("sweep: temperatures must be > 0");

  const ObjectiveKind objectives[] = {ObjectiveKind::kForwardKl,
                                      ObjectiveKind::kReverseKl};
  const int flow_counts[] = {0, 3};
  std::vector<SweepCell> cells;
  std::uint64_t index = 0;
  for (double a : alphas)
    for (ObjectiveKind kind : objectives)
      for (int f : flow_counts) {
        SweepCell cell;
        cell.objective = kind;
        cell.flows = f;
        cell.alpha = a;
        MatchConfig cfg = base;
        cfg.alpha = a;
        cfg.objective = kind;
        cfg.flows = f;
        cfg.seed = stream_seed(base.seed, fnv1a64("sweep"), index);
        try {
          FitResult res = run_match(cfg, target);
          Rng mass_rng(stream_seed(cfg.seed, fnv1a64("mass"), 0));
          cell.masses =
              mode_mass(res.policy, target, mass_samples, mass_rng);
          cell.policy = std::move(res.policy);
        } catch (const DivergenceError& e) {
          cell.failed = true;
          cell.error = e.what();
        } catch (const TrainingError& e) {
          cell.failed = true;
          cell.error = e.what();
        }
        cells.push_back(std::move(cell));
        ++index;
      }
  return cells;
}

}  // namespace hsac

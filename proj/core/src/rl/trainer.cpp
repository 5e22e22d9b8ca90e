#include "hsac/rl/trainer.hpp"

#include <algorithm>
#include <utility>

#include "hsac/checkpoint.hpp"
#include "hsac/errors.hpp"
#include "hsac/mlp.hpp"
#include "hsac/policy/flows.hpp"
#include "hsac/rl/losses.hpp"

namespace hsac {

double TrainingConfig::target_entropy_d_value() const {
  if (!agent.has_discrete()) return 0.0;
  return target_entropy_d_scale *
         std::log(static_cast<double>(agent.num_options()));
}

double TrainingConfig::target_entropy_c_value() const {
  if (!std::isnan(target_entropy_c)) return target_entropy_c;
  return -static_cast<double>(agent.total_cont_dim());
}

void TrainingConfig::validate() const {
  agent.validate();
  if (gamma < 0.0 || gamma > 1.0)
    throw ConfigError("trainer: gamma must be in [0, 1]");
  if (tau <= 0.0 || tau > 1.0)
    throw ConfigError("trainer: tau must be in (0, 1]");
  if (lr_actor <= 0.0 || lr_critic <= 0.0 || lr_alpha <= 0.0)
    throw ConfigError("trainer: learning rates must be positive");
  if (batch_size < 1) throw ConfigError("trainer: batch_size must be >= 1");
  if (train_ratio <= 0.0)
    throw ConfigError("trainer: train_ratio must be positive");
  if (buffer_capacity < static_cast<std::size_t>(batch_size))
    throw ConfigError("trainer: buffer smaller than one batch");
  if (warmup_steps < 0) throw ConfigError("trainer: warmup_steps must be >= 0");
  if (eval_episodes < 1)
    throw ConfigError("trainer: eval_episodes must be >= 1");
  if (alpha_d_init <= 0.0 || alpha_c_init <= 0.0)
    throw ConfigError("trainer: temperature inits must be positive");
}

namespace {

int update_period(double ratio) {
  return ratio < 1.0 ? static_cast<int>(std::lround(1.0 / ratio)) : 1;
}

int updates_per_step(double ratio) {
  return ratio >= 1.0 ? static_cast<int>(std::lround(ratio)) : 1;
}

Eigen::MatrixXd apply_activation(Eigen::MatrixXd h, Activation act) {
  if (act == Activation::kRelu) return h.cwiseMax(0.0);
  return h.array().tanh().matrix();
}

}  // namespace

HybridAction rescale_to_env(const EnvSpec& spec, const HybridAction& action) {
  HybridAction out = action;
  const bool selected_only =
      spec.action_spec.binding == ContinuousBinding::kPerDiscreteAction;
  for (std::size_t j = 0; j < out.continuous.size(); ++j) {
    const std::size_t head =
        selected_only ? static_cast<std::size_t>(action.discrete[0]) : j;
    const Eigen::RowVectorXd& lo = spec.action_low[head];
    const Eigen::RowVectorXd& hi = spec.action_high[head];
    if ((lo.array() == -1.0).all() && (hi.array() == 1.0).all()) continue;
    out.continuous[j] = (lo.array() + (out.continuous[j].array() + 1.0) * 0.5 *
                                          (hi.array() - lo.array()))
                            .matrix();
  }
  return out;
}

Trainer::Trainer(TrainingConfig cfg, std::unique_ptr<Env> env)
    : cfg_(std::move(cfg)),
      env_(std::move(env)),
      buffer_(cfg_.buffer_capacity),
      rng_act_d_(stream_seed(cfg_.seed, fnv1a64("act_d"), 0)),
      rng_act_c_(stream_seed(cfg_.seed, fnv1a64("act_c"), 0)),
      rng_update_(stream_seed(cfg_.seed, fnv1a64("update"), 0)),
      rng_buffer_(stream_seed(cfg_.seed, fnv1a64("buffer"), 0)) {
  cfg_.validate();
  if (!env_) throw ConfigError("trainer: missing environment");
  const EnvSpec& es = env_->spec();
  if (cfg_.agent.obs_dim != es.observation_dim ||
      cfg_.agent.action_spec.discrete != es.action_spec.discrete ||
      cfg_.agent.action_spec.continuous != es.action_spec.continuous ||
      cfg_.agent.action_spec.binding != es.action_spec.binding)
    throw ConfigError("trainer: agent layout does not match the environment");

  add_agent_params(params_, cfg_.agent, cfg_.seed, cfg_.alpha_d_init,
                   cfg_.alpha_c_init);

  AdamConfig opt;
  opt.learning_rate = cfg_.lr_actor;
  opt_actor_ = AdamState(params_, params_.names_with_prefix("actor."), opt);
  opt.learning_rate = cfg_.lr_critic;
  auto critic_names = params_.names_with_prefix("q1.");
  for (auto& n : params_.names_with_prefix("q2."))
    critic_names.push_back(std::move(n));
  opt_critic_ = AdamState(params_, std::move(critic_names), opt);
  opt.learning_rate = cfg_.lr_alpha;
  opt_alpha_ = AdamState(params_, {"alpha.d", "alpha.c"}, opt);

  reset_episode();
}

void Trainer::reset_episode() {
  obs_ = env_->reset(stream_seed(cfg_.seed, fnv1a64("env"),
                                 static_cast<std::uint64_t>(episodes_)));
  ep_len_ = 0;
  ep_return_ = 0.0;
}

Trainer::BatchActor Trainer::value_actor(const Eigen::MatrixXd& states) const {
  const AgentConfig& ag = cfg_.agent;
  const int n = static_cast<int>(states.rows());
  Eigen::MatrixXd h = apply_activation(
      mlp_eval(params_, ag.trunk_config(), "actor", states), ag.activation);

  BatchActor out;
  if (ag.has_discrete()) {
    out.logits = h * params_.matrix("actor.d.w0");
    out.logits.rowwise() += params_.matrix("actor.d.b0").row(0);
    const Eigen::VectorXd mx = out.logits.rowwise().maxCoeff();
    const Eigen::MatrixXd shifted = out.logits.colwise() - mx;
    const Eigen::VectorXd lse =
        shifted.array().exp().rowwise().sum().log().matrix() + mx;
    out.log_pi = out.logits.colwise() - lse;
    out.pi = out.log_pi.array().exp();
  } else {
    out.pi = Eigen::MatrixXd::Ones(n, 1);
    out.log_pi = Eigen::MatrixXd::Zero(n, 1);
  }

  for (int j = 0; j < ag.slots(); ++j) {
    const std::string p = slot_prefix(j);
    Eigen::MatrixXd mu = h * params_.matrix(p + ".mu.w0");
    mu.rowwise() += params_.matrix(p + ".mu.b0").row(0);
    Eigen::MatrixXd ls = h * params_.matrix(p + ".ls.w0");
    ls.rowwise() += params_.matrix(p + ".ls.b0").row(0);
    out.mu.push_back(std::move(mu));
    out.log_std.push_back(ls.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax));
  }
  return out;
}

HybridPolicyHeads Trainer::policy_at(const Eigen::RowVectorXd& obs) const {
  const BatchActor a = value_actor(obs);
  HybridPolicyHeads heads;
  if (cfg_.agent.has_discrete())
    heads.discrete.push_back(CategoricalHead{a.logits.row(0)});
  for (int j = 0; j < cfg_.agent.slots(); ++j) {
    ContinuousPolicyHead head;
    head.base = GaussianHead(a.mu[j].row(0), a.log_std[j].row(0));
    head.flows = slot_flow_params(params_, cfg_.agent, j);
    heads.continuous.push_back(std::move(head));
  }
  return heads;
}

Trainer::FullAction Trainer::sample_full(const Eigen::RowVectorXd& obs) {
  const HybridPolicyHeads heads = policy_at(obs);
  FullAction out;
  if (cfg_.agent.has_discrete())
    out.full.discrete.push_back(heads.discrete[0].sample(rng_act_d_));
  for (const auto& head : heads.continuous)
    out.full.continuous.push_back(head.sample(rng_act_c_).action);

  out.env_action.discrete = out.full.discrete;
  if (cfg_.agent.per_discrete())
    out.env_action.continuous = {out.full.continuous[out.full.discrete[0]]};
  else
    out.env_action.continuous = out.full.continuous;
  return out;
}

Trainer::FullAction Trainer::random_full(const Eigen::RowVectorXd&) {
  const AgentConfig& ag = cfg_.agent;
  FullAction out;
  if (ag.has_discrete())
    out.full.discrete.push_back(rng_act_d_.uniform_int(ag.num_options()));
  for (int j = 0; j < ag.slots(); ++j) {
    Eigen::RowVectorXd u(ag.slot_dim(j));
    for (int d = 0; d < ag.slot_dim(j); ++d)
      u(d) = rng_act_c_.uniform(-1.0, 1.0);
    out.full.continuous.push_back(std::move(u));
  }
  out.env_action.discrete = out.full.discrete;
  if (ag.per_discrete())
    out.env_action.continuous = {out.full.continuous[out.full.discrete[0]]};
  else
    out.env_action.continuous = out.full.continuous;
  return out;
}

HybridAction Trainer::act(const Eigen::RowVectorXd& obs, bool stochastic) {
  if (stochastic) return sample_full(obs).env_action;
  const HybridPolicyHeads heads = policy_at(obs);
  HybridAction a;
  if (cfg_.agent.has_discrete())
    a.discrete.push_back(heads.discrete[0].argmax());
  if (cfg_.agent.per_discrete()) {
    a.continuous.push_back(
        heads.continuous[a.discrete[0]].base.mean.array().tanh().matrix());
  } else {
    for (const auto& head : heads.continuous)
      a.continuous.push_back(head.base.mean.array().tanh().matrix());
  }
  return a;
}

TrainMetrics Trainer::train_step() {
  TrainMetrics m;
  const FullAction a = env_steps_ < cfg_.warmup_steps ? random_full(obs_)
                                                      : sample_full(obs_);
  const StepResult r = env_->step(rescale_to_env(env_->spec(), a.env_action));
  ++env_steps_;
  ++ep_len_;
  ep_return_ += r.reward;

  // Hitting the step cap is a truncation, not a terminal state: the value
  // bootstrap stays on for those transitions.
  const int cap = env_->spec().max_episode_steps;
  const bool truncated = r.done && cap > 0 && ep_len_ >= cap;
  buffer_.push({obs_, a.full, r.reward, r.observation, r.done && !truncated});

  m.env_step = env_steps_;
  m.reward = r.reward;
  m.done = r.done;
  if (r.done) {
    m.episode_return = ep_return_;
    m.episode_length = ep_len_;
    ++episodes_;
    reset_episode();
  } else {
    obs_ = r.observation;
  }

  if (env_steps_ >= cfg_.warmup_steps &&
      buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size) &&
      env_steps_ % update_period(cfg_.train_ratio) == 0) {
    const int per = updates_per_step(cfg_.train_ratio);
    for (int i = 0; i < per; ++i) do_update(m);
  }
  m.updates = updates_;
  m.alpha_d = alpha_d();
  m.alpha_c = alpha_c();
  return m;
}

void Trainer::do_update(TrainMetrics& m) {
  const AgentConfig& ag = cfg_.agent;
  const int n = cfg_.batch_size;
  const int K = ag.num_options();
  const int C = ag.slots();
  const int obs_dim = ag.obs_dim;
  const int total_c = ag.total_cont_dim();
  const MlpConfig ccfg = ag.critic_config();
  const double ad = alpha_d();
  const double ac = alpha_c();

  const auto idx = buffer_.sample_indices(n, rng_buffer_);
  Eigen::MatrixXd S(n, obs_dim), S2(n, obs_dim), A(n, total_c);
  Eigen::VectorXd r(n), done(n);
  std::vector<int> taken(n, 0);
  for (int i = 0; i < n; ++i) {
    const Transition& tr = buffer_.at(idx[i]);
    S.row(i) = tr.s;
    S2.row(i) = tr.s_next;
    r(i) = tr.r;
    done(i) = tr.done ? 1.0 : 0.0;
    if (ag.has_discrete()) taken[i] = tr.a.discrete[0];
    int off = 0;
    for (int j = 0; j < C; ++j) {
      A.block(i, off, 1, ag.slot_dim(j)) = tr.a.continuous[j];
      off += ag.slot_dim(j);
    }
  }

  // Soft target: exact expectation over the next discrete action, one fresh
  // continuous sample per slot, min over the two target critics.
  Eigen::VectorXd y;
  {
    const BatchActor next = value_actor(S2);
    Eigen::MatrixXd a2(n, total_c);
    Eigen::MatrixXd logp_opt = Eigen::MatrixXd::Zero(n, K);
    Eigen::VectorXd logp_total = Eigen::VectorXd::Zero(n);
    int off = 0;
    for (int j = 0; j < C; ++j) {
      const int mj = ag.slot_dim(j);
      const Eigen::MatrixXd eps = rng_update_.normal_matrix(n, mj);
      const Eigen::MatrixXd z =
          next.mu[j] +
          next.log_std[j].array().exp().matrix().cwiseProduct(eps);
      const auto flows = slot_flow_params(params_, ag, j);
      for (int i = 0; i < n; ++i) {
        const FlowTrace trace = flow_chain_forward(flows, z.row(i));
        a2.block(i, off, 1, mj) = trace.final().array().tanh().matrix();
        const double lp =
            gaussian_log_prob(GaussianHead(next.mu[j].row(i),
                                           next.log_std[j].row(i)),
                              z.row(i)) -
            trace.log_det_sum();
        if (ag.per_discrete())
          logp_opt(i, j) = lp;
        else
          logp_total(i) += lp;
      }
      off += mj;
    }
    if (!ag.per_discrete() && C > 0) logp_opt = logp_total.replicate(1, K);

    Eigen::MatrixXd in2(n, obs_dim + total_c);
    in2.leftCols(obs_dim) = S2;
    in2.rightCols(total_c) = a2;
    const Eigen::MatrixXd qmin =
        mlp_eval(params_, ccfg, "tq1", in2)
            .cwiseMin(mlp_eval(params_, ccfg, "tq2", in2));
    y = bellman_target(
        r, done, cfg_.gamma,
        soft_state_value(qmin, logp_opt, next.pi, next.log_pi, ad, ac));
  }

  // Critic step: both critics against the same targets, one backward sweep.
  {
    Tape t(&params_);
    Eigen::MatrixXd in(n, obs_dim + total_c);
    in.leftCols(obs_dim) = S;
    in.rightCols(total_c) = A;
    const NodeRef input = t.constant(in);
    const NodeRef target = t.constant(y);
    const NodeRef l1 = critic_loss(t, mlp_apply(t, ccfg, "q1", input), taken,
                                   target);
    const NodeRef l2 = critic_loss(t, mlp_apply(t, ccfg, "q2", input), taken,
                                   target);
    m.critic1_loss = t.scalar_value(l1);
    m.critic2_loss = t.scalar_value(l2);
    if (!std::isfinite(m.critic1_loss) || !std::isfinite(m.critic2_loss))
      throw TrainingError("critic loss is not finite");
    ParameterSet grads = ParameterSet::zeros_like(params_);
    t.backward(t.add(l1, l2), Mat::Ones(1, 1), &grads);
    opt_critic_.step(params_, grads);
  }

  // Actor step: exact KL for the discrete head against the Boltzmann Q
  // distribution, reparameterized loss for the continuous heads weighted by
  // the detached discrete probabilities, both from one sample set.
  double h_d = 0.0, h_c = 0.0;
  std::vector<double> cond;
  {
    Tape t(&params_);
    const NodeRef s_node = t.constant(S);
    const ActorNodes actor = actor_forward(t, ag, s_node);
    const SampledSlots slots = sample_slots_tape(t, ag, actor, n, rng_update_);
    const NodeRef input =
        C > 0 ? t.concat_cols(s_node, slots.a_all) : s_node;
    const NodeRef qmin = t.minimum(mlp_apply(t, ccfg, "q1", input),
                                   mlp_apply(t, ccfg, "q2", input));

    NodeRef loss{};
    bool have_loss = false;
    if (ag.has_discrete()) {
      const NodeRef l_d = discrete_policy_loss(t, actor.pi_d, actor.log_pi_d,
                                               t.stop_grad(qmin), ad);
      m.discrete_loss = t.scalar_value(l_d);
      loss = l_d;
      have_loss = true;
    }
    if (C > 0) {
      NodeRef logp = slots.logp[0];
      for (int j = 1; j < C; ++j)
        logp = ag.per_discrete() ? t.concat_cols(logp, slots.logp[j])
                                 : t.add(logp, slots.logp[j]);
      const NodeRef l_c = continuous_policy_loss(t, qmin, logp,
                                                 t.stop_grad(actor.pi_d), ac);
      m.continuous_loss = t.scalar_value(l_c);
      loss = have_loss ? t.add(loss, l_c) : l_c;
      have_loss = true;
    }
    if (!have_loss) throw TrainingError("actor has nothing to optimize");
    if (!std::isfinite(t.scalar_value(loss)))
      throw TrainingError("actor loss is not finite");
    ParameterSet grads = ParameterSet::zeros_like(params_);
    t.backward(loss, Mat::Ones(1, 1), &grads);
    opt_actor_.step(params_, grads);

    // Entropy estimates from the same forward values: exact for the
    // categorical head, single-sample -log density for the continuous ones.
    const Mat& pi_v = t.value(actor.pi_d);
    const Mat& lpi_v = t.value(actor.log_pi_d);
    h_d = -(pi_v.array() * lpi_v.array()).rowwise().sum().mean();
    if (C > 0) {
      if (ag.per_discrete()) {
        for (int k = 0; k < K; ++k) {
          const Mat& lp = t.value(slots.logp[k]);
          cond.push_back(-lp.mean());
          h_c += -(pi_v.col(k).array() * lp.col(0).array()).mean();
        }
      } else {
        Eigen::VectorXd lp_total = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < C; ++j) {
          const Mat& lp = t.value(slots.logp[j]);
          cond.push_back(-lp.mean());
          lp_total += lp.col(0);
        }
        h_c = -lp_total.mean();
      }
    }
  }

  if (cfg_.auto_alpha) {
    ParameterSet grads = ParameterSet::zeros_like(params_);
    if (ag.has_discrete())
      grads.data("alpha.d")(0) =
          temperature_gradient(ad, h_d, cfg_.target_entropy_d_value());
    if (C > 0)
      grads.data("alpha.c")(0) =
          temperature_gradient(ac, h_c, cfg_.target_entropy_c_value());
    opt_alpha_.step(params_, grads);
  }

  polyak_update(params_, "q1", "tq1", cfg_.tau);
  polyak_update(params_, "q2", "tq2", cfg_.tau);

  ++updates_;
  m.entropy_d = ag.has_discrete() ? h_d : std::nan("");
  m.entropy_c = C > 0 ? h_c : std::nan("");
  m.cond_entropy = std::move(cond);
}

EvalStats Trainer::evaluate(Env& env, int episodes, std::uint64_t seed_base) {
  EvalStats st;
  for (int e = 0; e < episodes; ++e) {
    Eigen::RowVectorXd obs =
        env.reset(stream_seed(seed_base, fnv1a64("eval"),
                              static_cast<std::uint64_t>(e)));
    double ret = 0.0;
    int len = 0;
    bool done = false;
    while (!done) {
      const HybridAction a = act(obs, /*stochastic=*/false);
      const StepResult r = env.step(rescale_to_env(env.spec(), a));
      ret += r.reward;
      ++len;
      done = r.done;
      obs = r.observation;
    }
    st.returns.push_back(ret);
    st.lengths.push_back(static_cast<double>(len));
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  st.mean_return = mean(st.returns);
  st.mean_length = mean(st.lengths);
  return st;
}

void Trainer::save(const std::string& path,
                   const std::string& config_json) const {
  ParameterSet out;
  for (const auto& e : params_.entries()) out.add(e.name, e.shape, e.data);
  opt_actor_.pack(out, "opt.actor");
  opt_critic_.pack(out, "opt.critic");
  opt_alpha_.pack(out, "opt.alpha");
  Eigen::VectorXd counters(3);
  counters << static_cast<double>(env_steps_), static_cast<double>(updates_),
      static_cast<double>(episodes_);
  out.add("state.counters", {3}, counters);
  save_checkpoint(path, out, config_json);
}

void Trainer::load(const std::string& path,
                   const std::string& expected_config_json) {
  const CheckpointContents cc = load_checkpoint(path, expected_config_json);
  for (const auto& e : params_.entries()) {
    const Eigen::VectorXd& src = cc.arrays.data(e.name);
    if (src.size() != e.data.size())
      throw CheckpointFormatError("checkpoint entry has wrong size: " +
                                  e.name);
    params_.data(e.name) = src;
  }
  opt_actor_.unpack(cc.arrays, "opt.actor");
  opt_critic_.unpack(cc.arrays, "opt.critic");
  opt_alpha_.unpack(cc.arrays, "opt.alpha");
  const Eigen::VectorXd& counters = cc.arrays.data("state.counters");
  env_steps_ = static_cast<std::int64_t>(counters(0));
  updates_ = static_cast<std::int64_t>(counters(1));
  episodes_ = static_cast<std::int64_t>(counters(2));
  // Replay contents and generator positions are not part of a checkpoint;
  // the training episode restarts cleanly.
  reset_episode();
}

}  // namespace hsac

#include "hsac/rl/agent.hpp"

#include <cmath>

#include "hsac/errors.hpp"

namespace hsac {

int AgentConfig::total_cont_dim() const {
  int total = 0;
  for (int m : action_spec.continuous) total += m;
  return total;
}

MlpConfig AgentConfig::trunk_config() const {
  MlpConfig cfg;
  cfg.input_dim = obs_dim;
  cfg.output_dim = actor_hidden.back();
  cfg.hidden_sizes.assign(actor_hidden.begin(), actor_hidden.end() - 1);
  cfg.activation = activation;
  return cfg;
}

MlpConfig AgentConfig::critic_config() const {
  MlpConfig cfg;
  cfg.input_dim = obs_dim + total_cont_dim();
  cfg.output_dim = num_options();
  cfg.hidden_sizes = critic_hidden;
  cfg.activation = activation;
  return cfg;
}

void AgentConfig::validate() const {
  action_spec.validate();
  if (action_spec.num_discrete() > 1)
    throw ConfigError("agent: at most one discrete component");
  if (action_spec.num_discrete() + action_spec.num_continuous() == 0)
    throw ConfigError("agent: action space is empty");
  if (obs_dim < 1) throw ConfigError("agent: obs_dim must be >= 1");
  if (actor_hidden.empty() || critic_hidden.empty())
    throw ConfigError("agent: hidden layer lists must be non-empty");
  for (int h : actor_hidden)
    if (h < 1) throw ConfigError("agent: actor hidden sizes must be >= 1");
  for (int h : critic_hidden)
    if (h < 1) throw ConfigError("agent: critic hidden sizes must be >= 1");
  if (flows < 0) throw ConfigError("agent: flows must be >= 0");
}

std::string slot_prefix(int j) { return "actor.c" + std::to_string(j); }

namespace {

MlpConfig head_config(const AgentConfig& cfg, int out) {
  MlpConfig head;
  head.input_dim = cfg.hidden_dim();
  head.output_dim = out;
  head.activation = cfg.activation;
  return head;
}

void copy_with_prefix(ParameterSet& params, const std::string& from,
                      const std::string& to) {
  for (const auto& name : params.names_with_prefix(from + ".")) {
    const auto& e = params.entry(name);
    params.add(to + name.substr(from.size()), e.shape, e.data);
  }
}

}  // namespace

void add_actor_params(ParameterSet& params, const AgentConfig& cfg,
                      std::uint64_t seed) {
  cfg.validate();
  add_mlp_params(params, "actor", cfg.trunk_config(), seed);
  if (cfg.has_discrete())
    add_mlp_params(params, "actor.d", head_config(cfg, cfg.num_options()), seed);
  for (int j = 0; j < cfg.slots(); ++j) {
    const std::string p = slot_prefix(j);
    add_mlp_params(params, p + ".mu", head_config(cfg, cfg.slot_dim(j)), seed);
    add_mlp_params(params, p + ".ls", head_config(cfg, cfg.slot_dim(j)), seed);
    for (int i = 0; i < cfg.flows; ++i) {
      const std::string f = p + ".f" + std::to_string(i);
      // Near-identity start: x = y = 0 makes beta vanish, and the center
      // gets a small jitter so stacked layers do not coincide.
      Rng z0_rng(stream_seed(seed, fnv1a64(f + ".z0"), 0));
      params.add(f + ".z0", {cfg.slot_dim(j)},
                 0.01 * z0_rng.normal_vector(cfg.slot_dim(j)));
      params.add(f + ".x", {1});
      params.add(f + ".y", {1});
    }
  }
}

void add_agent_params(ParameterSet& params, const AgentConfig& cfg,
                      std::uint64_t seed, double alpha_d_init,
                      double alpha_c_init) {
  if (alpha_d_init <= 0.0 || alpha_c_init <= 0.0)
    throw ConfigError("agent: temperature inits must be positive");
  add_actor_params(params, cfg, seed);

  add_mlp_params(params, "q1", cfg.critic_config(), seed);
  add_mlp_params(params, "q2", cfg.critic_config(), seed);
  copy_with_prefix(params, "q1", "tq1");
  copy_with_prefix(params, "q2", "tq2");

  params.add("alpha.d", {1},
             Eigen::VectorXd::Constant(1, std::log(alpha_d_init)));
  params.add("alpha.c", {1},
             Eigen::VectorXd::Constant(1, std::log(alpha_c_init)));
}

std::vector<RadialFlowParams> slot_flow_params(const ParameterSet& params,
                                               const AgentConfig& cfg, int j) {
  std::vector<RadialFlowParams> flows;
  flows.reserve(cfg.flows);
  for (int i = 0; i < cfg.flows; ++i) {
    const std::string f = slot_prefix(j) + ".f" + std::to_string(i);
    RadialFlowParams layer;
    layer.z0 = params.data(f + ".z0").transpose();
    layer.x = params.data(f + ".x")(0);
    layer.y = params.data(f + ".y")(0);
    flows.push_back(std::move(layer));
  }
  return flows;
}

ActorNodes actor_forward(Tape& t, const AgentConfig& cfg, NodeRef s) {
  const int n = static_cast<int>(t.value(s).rows());
  ActorNodes out;
  NodeRef h = mlp_apply(t, cfg.trunk_config(), "actor", s);
  out.h = cfg.activation == Activation::kRelu ? t.relu(h) : t.tanh(h);

  if (cfg.has_discrete()) {
    out.logits = t.dense(out.h, t.param("actor.d.w0"), t.param("actor.d.b0"));
    out.pi_d = t.row_softmax(out.logits);
    out.log_pi_d = t.row_log_softmax(out.logits);
  } else {
    out.pi_d = t.constant(Mat::Ones(n, 1));
    out.log_pi_d = t.constant(Mat::Zero(n, 1));
  }

  for (int j = 0; j < cfg.slots(); ++j) {
    const std::string p = slot_prefix(j);
    out.mu.push_back(
        t.dense(out.h, t.param(p + ".mu.w0"), t.param(p + ".mu.b0")));
    NodeRef ls = t.dense(out.h, t.param(p + ".ls.w0"), t.param(p + ".ls.b0"));
    out.log_std.push_back(t.clamp(ls, kLogStdMin, kLogStdMax));
    std::vector<FlowLayerNodes> layers;
    for (int i = 0; i < cfg.flows; ++i) {
      const std::string f = p + ".f" + std::to_string(i);
      layers.push_back({t.param(f + ".z0"), t.param(f + ".x"),
                        t.param(f + ".y")});
    }
    out.flow_layers.push_back(std::move(layers));
  }
  return out;
}

SampledSlots sample_slots_tape(Tape& t, const AgentConfig& cfg,
                               const ActorNodes& actor, int n, Rng& rng) {
  SampledSlots out;
  for (int j = 0; j < cfg.slots(); ++j) {
    NodeRef eps = t.constant(rng.normal_matrix(n, cfg.slot_dim(j)));
    NodeRef sigma = t.exp(actor.log_std[j]);
    NodeRef z = t.add(actor.mu[j], t.mul(sigma, eps));
    FlowChainNodes chain = flow_chain_forward_tape(t, actor.flow_layers[j], z);
    NodeRef logp = t.sub(
        gaussian_log_prob_tape(t, actor.mu[j], actor.log_std[j], z),
        chain.log_det_sum);
    out.w.push_back(chain.final);
    out.logp.push_back(logp);
    NodeRef a = t.tanh(chain.final);
    out.a_all = j == 0 ? a : t.concat_cols(out.a_all, a);
  }
  return out;
}

}  // namespace hsac

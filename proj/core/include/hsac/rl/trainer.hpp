#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hsac/adam.hpp"
#include "hsac/envs/env.hpp"
#include "hsac/rl/agent.hpp"
#include "hsac/rl/replay.hpp"

namespace hsac {

struct TrainingConfig {
  AgentConfig agent;
  double gamma = 0.99;
  double tau = 0.005;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  double lr_alpha = 3e-4;
  int batch_size = 256;
  // Gradient updates per environment step: 0.1 means one update every ten
  // steps, 2 means two updates after every step.
  double train_ratio = 0.1;
  std::int64_t total_env_steps = 0;
  std::int64_t eval_interval = 0;  // env steps between eval rounds; 0 = never
  int eval_episodes = 5;
  int warmup_steps = 1000;  // uniform-random action collection before updates
  std::size_t buffer_capacity = 100000;
  std::uint64_t seed = 0;
  std::string preset = "desk";

  // Temperature handling. With auto_alpha the two temperatures follow
  // J(alpha) = alpha * (H_current - H_target) on log alpha; otherwise they
  // stay fixed at their init values.
  bool auto_alpha = true;
  double alpha_d_init = 0.2;
  double alpha_c_init = 0.2;
  double target_entropy_d_scale = 0.5;  // target H_d = scale * ln K
  // Override for the continuous target; NaN means the default -sum_j m_j.
  double target_entropy_c = std::nan("");

  double target_entropy_d_value() const;
  double target_entropy_c_value() const;
  void validate() const;
};

// One row of the training record. Loss/entropy fields are NaN on steps
// without a gradient update; episode fields are NaN except on the step a
// training episode finished.
struct TrainMetrics {
  std::int64_t env_step = 0;
  std::int64_t updates = 0;
  double reward = 0.0;
  bool done = false;
  double episode_return = std::nan("");
  double episode_length = std::nan("");
  double critic1_loss = std::nan("");
  double critic2_loss = std::nan("");
  double discrete_loss = std::nan("");
  double continuous_loss = std::nan("");
  double entropy_d = std::nan("");
  double entropy_c = std::nan("");
  double alpha_d = std::nan("");
  double alpha_c = std::nan("");
  // Per-option conditional entropy estimates (one per discrete action when
  // the continuous heads are bound to it, else one per continuous slot).
  std::vector<double> cond_entropy;
};

struct EvalStats {
  std::vector<double> returns;
  std::vector<double> lengths;
  double mean_return = 0.0;
  double mean_length = 0.0;
};

// Map a policy-space action (components in (-1, 1)) to the env's native
// bounds. Exact identity for components whose declared bounds are (-1, 1).
HybridAction rescale_to_env(const EnvSpec& spec, const HybridAction& action);

// Owns the training environment, parameters, optimizers, and replay buffer.
// All randomness flows through named substreams of the config seed (discrete
// action draws, continuous action draws, update-time noise, buffer sampling,
// episode reset seeds), so training is bit-reproducible and structurally
// different agents can share streams where their draw patterns coincide.
class Trainer {
 public:
  Trainer(TrainingConfig cfg, std::unique_ptr<Env> env);

  // One environment step plus the ratio-scheduled gradient updates.
  TrainMetrics train_step();

  // Env-conformant action in policy space. Stochastic mode samples the
  // categorical head and every continuous head; deterministic mode takes the
  // argmax discrete action and tanh(mean) of the heads, skipping the flows.
  HybridAction act(const Eigen::RowVectorXd& obs, bool stochastic);

  // Deterministic-policy rollouts on a caller-supplied env instance (the
  // training env is mid-episode and stays untouched). Draws nothing from the
  // trainer's action streams.
  EvalStats evaluate(Env& env, int episodes, std::uint64_t seed_base);

  // Value-level policy at one state: categorical head plus per-slot
  // Gaussian-with-flows heads.
  HybridPolicyHeads policy_at(const Eigen::RowVectorXd& obs) const;

  void save(const std::string& path, const std::string& config_json) const;
  void load(const std::string& path, const std::string& expected_config_json);

  const TrainingConfig& config() const { return cfg_; }
  const ParameterSet& params() const { return params_; }
  // Direct write access, for experiment setups that pin parts of the policy.
  ParameterSet& mutable_params() { return params_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t updates() const { return updates_; }
  std::int64_t episodes() const { return episodes_; }
  double alpha_d() const { return std::exp(params_.data("alpha.d")(0)); }
  double alpha_c() const { return std::exp(params_.data("alpha.c")(0)); }

 private:
  struct BatchActor {
    Eigen::MatrixXd logits;  // n x K, empty without a discrete head
    Eigen::MatrixXd pi;      // n x K
    Eigen::MatrixXd log_pi;  // n x K
    std::vector<Eigen::MatrixXd> mu;       // per slot, n x m_j
    std::vector<Eigen::MatrixXd> log_std;  // clamped
  };
  struct FullAction {
    HybridAction env_action;  // what the env receives (policy space)
    HybridAction full;        // every slot present, for the replay record
  };

  BatchActor value_actor(const Eigen::MatrixXd& states) const;
  FullAction sample_full(const Eigen::RowVectorXd& obs);
  FullAction random_full(const Eigen::RowVectorXd& obs);
  void do_update(TrainMetrics& m);
  void reset_episode();

  TrainingConfig cfg_;
  std::unique_ptr<Env> env_;
  ParameterSet params_;
  AdamState opt_actor_;
  AdamState opt_critic_;
  AdamState opt_alpha_;
  ReplayBuffer buffer_;
  Rng rng_act_d_;
  Rng rng_act_c_;
  Rng rng_update_;
  Rng rng_buffer_;

  Eigen::RowVectorXd obs_;
  std::int64_t env_steps_ = 0;
  std::int64_t updates_ = 0;
  std::int64_t episodes_ = 0;
  int ep_len_ = 0;
  double ep_return_ = 0.0;
};

}  // namespace hsac

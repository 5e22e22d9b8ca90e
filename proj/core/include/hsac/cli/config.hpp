#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsac/divlab/lab.hpp"
#include "hsac/divlab/target.hpp"
#include "hsac/rl/trainer.hpp"

namespace hsac {

// Fully resolved run description. Resolution order: built-in defaults (the
// "desk" preset is exactly these), then the named preset, then the config
// file, then command-line flags (--seed, --out, --preset). The "roboschool"
// preset raises the agent to two 256-neuron layers with 3 radial flows,
// batch 1024, a 1e6 replay buffer, 1e7 env steps, and a fixed temperature of
// 0.05 on both heads.
//
// File schema (all sections optional):
//   env: string                      seeds: [uint...]
//   preset: "desk" | "roboschool"    out: string
//   agent:  actor_hidden [int...], critic_hidden [int...],
//           activation "relu"|"tanh", flows int
//   train:  gamma tau lr_actor lr_critic lr_alpha batch_size train_ratio
//           total_env_steps eval_interval eval_episodes warmup_steps
//           buffer_capacity auto_alpha alpha_d_init alpha_c_init
//           target_entropy_d_scale target_entropy_c (null = per-dim default)
//           checkpoint_interval
//   eval:   checkpoint string, episodes int
//   divlab: steps batch lr hidden activation squashed alphas [..]
//           objectives [names] flows [ints] mass_samples
//           density { lo hi per_axis samples }
//           target  { weights [..], means [[..]..], stds [[..]..] }
//   export: input string, smooth bool
// Unknown keys anywhere are rejected with their path.
struct RunConfig {
  std::string env;
  std::string preset = "desk";
  std::vector<std::uint64_t> seeds = {0};
  std::string out = "runs/out";

  std::vector<int> actor_hidden = {64, 64};
  std::vector<int> critic_hidden = {64, 64};
  Activation activation = Activation::kRelu;
  int flows = 0;

  TrainingConfig train;  // agent/seed/preset fields filled in per command
  std::int64_t checkpoint_interval = 0;  // extra checkpoints every N steps

  std::string eval_checkpoint;
  int eval_episodes = 20;

  MatchConfig divlab;
  std::vector<double> divlab_alphas = {1.0};
  std::vector<ObjectiveKind> divlab_objectives = {
      ObjectiveKind::kForwardKl, ObjectiveKind::kReverseKl,
      ObjectiveKind::kJensenShannon};
  std::vector<int> divlab_flows = {0, 3};
  int divlab_mass_samples = 4096;
  double density_lo = -4.0;
  double density_hi = 4.0;
  int density_per_axis = 81;
  int density_samples = 20000;
  GaussianMixtureTarget target = GaussianMixtureTarget::default_two_mode();

  std::string export_input;
  bool export_smooth = true;

  // Canonical serialization of everything above (sorted keys) and its
  // FNV-1a digest; every output file carries the digest.
  std::string canonical_json;
  std::uint64_t digest = 0;
};

// Empty config_path resolves pure defaults + flags (cmd_gradcheck needs no
// file). Empty flag values mean "not given". Malformed JSON and unknown or
// ill-typed keys throw ConfigError with a line or key-path diagnostic.
RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::uint64_t>& seed_flags,
                          const std::string& out_flag,
                          const std::string& preset_flag);

// Agent architecture for an env's action/observation layout plus the
// config's network choices. The trainer embeds this in checkpoints, and
// cmd_eval rebuilds it to validate compatibility.
AgentConfig resolve_agent(const RunConfig& cfg, const EnvSpec& spec);
std::string architecture_json(const RunConfig& cfg);

std::string digest_hex(std::uint64_t digest);

}  // namespace hsac

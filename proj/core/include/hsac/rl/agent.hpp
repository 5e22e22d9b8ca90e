#pragma once

#include <string>
#include <vector>

#include "hsac/mlp.hpp"
#include "hsac/policy/hybrid.hpp"
#include "hsac/policy/tape_density.hpp"
#include "hsac/rng.hpp"

namespace hsac {

// Network layout for the hybrid agent. The actor is a trunk MLP whose last
// activation is the shared hidden state; on top sit a categorical head (one
// logit per discrete option, when there is a discrete component) and one
// Gaussian head per continuous slot, optionally deepened by a stack of
// radial flows. Critics are plain MLPs over concat(s, all continuous slots)
// with one Q output per discrete option.
//
// With no discrete component the option count is 1 and the lone "option" has
// probability one, which makes the pure-continuous case a degenerate instance
// of the same code path.
struct AgentConfig {
  HybridActionSpec action_spec;
  int obs_dim = 0;
  std::vector<int> actor_hidden = {64, 64};
  std::vector<int> critic_hidden = {64, 64};
  Activation activation = Activation::kRelu;
  int flows = 0;  // radial flows per continuous slot

  bool has_discrete() const { return !action_spec.discrete.empty(); }
  int num_options() const {
    return has_discrete() ? action_spec.discrete[0] : 1;
  }
  bool per_discrete() const {
    return action_spec.binding == ContinuousBinding::kPerDiscreteAction;
  }
  int slots() const { return action_spec.num_continuous(); }
  int slot_dim(int j) const { return action_spec.continuous[j]; }
  int total_cont_dim() const;
  int hidden_dim() const { return actor_hidden.back(); }

  MlpConfig trunk_config() const;
  MlpConfig critic_config() const;
  void validate() const;
};

// Parameter names:
//   actor.w<i>/b<i>          trunk
//   actor.d.w0/b0            discrete logits head (only with a discrete part)
//   actor.c<j>.mu.w0/b0      per-slot Gaussian mean
//   actor.c<j>.ls.w0/b0      per-slot log-std
//   actor.c<j>.f<i>.{z0,x,y} per-slot flow stack
//   q1.* q2.*                online critics
//   tq1.* tq2.*              target critics (copies of the online values)
//   alpha.d alpha.c          log-temperatures
// Every randomly initialized array draws from a substream keyed by its own
// name, so shared names across different architectures start identical.
void add_agent_params(ParameterSet& params, const AgentConfig& cfg,
                      std::uint64_t seed, double alpha_d_init,
                      double alpha_c_init);

// Just the actor subtree (trunk, heads, flow stacks). The distribution lab
// reuses this layout without critics or temperatures.
void add_actor_params(ParameterSet& params, const AgentConfig& cfg,
                      std::uint64_t seed);

std::string slot_prefix(int j);
std::vector<RadialFlowParams> slot_flow_params(const ParameterSet& params,
                                               const AgentConfig& cfg, int j);

// Taped actor forward over a batch of states. pi_d/log_pi_d are n x K; with
// no discrete head they are constant ones/zeros so downstream expectation
// code never branches.
struct ActorNodes {
  NodeRef h;
  NodeRef logits;  // invalid (-1) when there is no discrete head
  NodeRef pi_d;
  NodeRef log_pi_d;
  std::vector<NodeRef> mu;       // per slot, n x m_j
  std::vector<NodeRef> log_std;  // clamped
  std::vector<std::vector<FlowLayerNodes>> flow_layers;
};
ActorNodes actor_forward(Tape& t, const AgentConfig& cfg, NodeRef s);

// One reparameterized sample per continuous slot: z = mu + sigma * eps pushed
// through the slot's flow stack. logp is the pre-squash log-density of the
// sample (Gaussian term minus flow log-dets); a_all concatenates tanh of all
// slots and is invalid when there are none.
struct SampledSlots {
  std::vector<NodeRef> w;     // post-flow pre-squash values
  std::vector<NodeRef> logp;  // n x 1 each
  NodeRef a_all;
};
SampledSlots sample_slots_tape(Tape& t, const AgentConfig& cfg,
                               const ActorNodes& actor, int n, Rng& rng);

}  // namespace hsac

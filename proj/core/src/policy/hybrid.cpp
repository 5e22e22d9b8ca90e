#include "hsac/policy/hybrid.hpp"

#include <cmath>

#include "hsac/errors.hpp"

namespace hsac {

void HybridActionSpec::validate() const {
  for (int k : discrete)
    if (k < 1) throw ContractError("action spec: cardinality must be >= 1");
  for (int m : continuous)
    if (m < 1) throw ContractError("action spec: continuous dim must be >= 1");
  if (binding == ContinuousBinding::kPerDiscreteAction) {
    if (discrete.size() != 1)
      throw ContractError(
          "action spec: per-discrete binding needs exactly one discrete "
          "component");
    if (static_cast<int>(continuous.size()) != discrete[0])
      throw ContractError(
          "action spec: per-discrete binding needs one continuous head per "
          "discrete choice");
  }
}

double ContinuousPolicyHead::log_prob(const Eigen::RowVectorXd& action) const {
  return flow_log_prob(base, flows, action);
}

double ContinuousPolicyHead::entropy(Rng* rng) const {
  if (flows.empty()) return gaussian_entropy(base);
  if (!rng)
    throw ContractError("flow entropy estimate needs a random stream");
  const Eigen::RowVectorXd eps =
      rng->normal_vector(base.dim()).transpose();
  const Eigen::RowVectorXd w0 = base.mean + eps.cwiseProduct(base.std_dev());
  const FlowTrace t = flow_chain_forward(flows, w0);
  return -(gaussian_log_prob(base, w0) - t.log_det_sum());
}

SquashedSample ContinuousPolicyHead::sample(Rng& rng) const {
  const Eigen::RowVectorXd eps = rng.normal_vector(base.dim()).transpose();
  return flow_stack_sample(base, flows, eps);
}

void check_conforms(const HybridActionSpec& spec,
                    const HybridPolicyHeads& heads,
                    const HybridAction& action) {
  spec.validate();
  if (heads.discrete.size() != spec.discrete.size() ||
      heads.continuous.size() != spec.continuous.size())
    throw ContractError("hybrid policy: head count differs from spec");
  for (std::size_t i = 0; i < spec.discrete.size(); ++i)
    if (heads.discrete[i].size() != spec.discrete[i])
      throw ContractError("hybrid policy: discrete head size differs");
  for (std::size_t j = 0; j < spec.continuous.size(); ++j)
    if (heads.continuous[j].base.dim() != spec.continuous[j])
      throw ContractError("hybrid policy: continuous head dim differs");
  if (action.discrete.size() != spec.discrete.size())
    throw ContractError("hybrid action: discrete component count");
  for (std::size_t i = 0; i < spec.discrete.size(); ++i)
    if (action.discrete[i] < 0 || action.discrete[i] >= spec.discrete[i])
      throw ContractError("hybrid action: discrete index out of range");
  const bool selected_only =
      spec.binding == ContinuousBinding::kPerDiscreteAction;
  const std::size_t expected_components =
      selected_only ? 1 : spec.continuous.size();
  if (action.continuous.size() != expected_components)
    throw ContractError("hybrid action: continuous component count");
  for (std::size_t j = 0; j < action.continuous.size(); ++j) {
    const std::size_t head =
        selected_only ? static_cast<std::size_t>(action.discrete[0]) : j;
    if (action.continuous[j].size() !=
        static_cast<Eigen::Index>(spec.continuous[head]))
      throw ContractError("hybrid action: continuous dim mismatch");
    if ((action.continuous[j].array().abs() >= 1.0).any())
      throw ContractError("hybrid action: continuous value outside (-1, 1)");
  }
}

double hybrid_log_prob(const HybridActionSpec& spec,
                       const HybridPolicyHeads& heads,
                       const HybridAction& action) {
  check_conforms(spec, heads, action);
  double lp = 0.0;
  for (std::size_t i = 0; i < spec.discrete.size(); ++i)
    lp += heads.discrete[i].log_probs()(action.discrete[i]);
  if (spec.binding == ContinuousBinding::kPerDiscreteAction) {
    if (!action.continuous.empty())
      lp += heads.continuous[action.discrete[0]].log_prob(
          action.continuous[0]);
  } else {
    for (std::size_t j = 0; j < action.continuous.size(); ++j)
      lp += heads.continuous[j].log_prob(action.continuous[j]);
  }
  return lp;
}

double hybrid_entropy_bonus(const HybridActionSpec& spec,
                            const HybridPolicyHeads& heads, double alpha_d,
                            double alpha_c, Rng* rng) {
  spec.validate();
  double h_d = 0.0;
  for (const auto& head : heads.discrete) h_d += head.entropy();
  double h_c = 0.0;
  if (spec.binding == ContinuousBinding::kPerDiscreteAction) {
    const Eigen::RowVectorXd p = heads.discrete[0].probs();
    for (int k = 0; k < p.size(); ++k)
      h_c += p(k) * heads.continuous[k].entropy(rng);
  } else {
    for (const auto& head : heads.continuous) h_c += head.entropy(rng);
  }
  return alpha_d * h_d + alpha_c * h_c;
}

HybridAction hybrid_sample(const HybridActionSpec& spec,
                           const HybridPolicyHeads& heads, Rng& rng) {
  HybridAction a;
  a.discrete.reserve(spec.discrete.size());
  for (const auto& head : heads.discrete)
    a.discrete.push_back(head.sample(rng));
  if (spec.binding == ContinuousBinding::kPerDiscreteAction) {
    a.continuous.push_back(heads.continuous[a.discrete[0]].sample(rng).action);
  } else {
    a.continuous.reserve(spec.continuous.size());
    for (const auto& head : heads.continuous)
      a.continuous.push_back(head.sample(rng).action);
  }
  return a;
}

}  // namespace hsac

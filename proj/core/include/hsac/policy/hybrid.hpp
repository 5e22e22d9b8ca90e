#pragma once

#include <vector>

#include <Eigen/Core>

#include "hsac/policy/categorical.hpp"
#include "hsac/policy/flows.hpp"
#include "hsac/policy/gaussian.hpp"
#include "hsac/rng.hpp"

namespace hsac {

enum class ContinuousBinding {
  kIndependent,        // every continuous component always acts
  kPerDiscreteAction,  // one parameter head per discrete choice; only the
                       // selected one enters densities and execution
};

struct HybridActionSpec {
  std::vector<int> discrete;    // cardinalities K_1..K_D
  std::vector<int> continuous;  // dims m_1..m_C
  ContinuousBinding binding = ContinuousBinding::kIndependent;

  int num_discrete() const { return static_cast<int>(discrete.size()); }
  int num_continuous() const { return static_cast<int>(continuous.size()); }
  // Throws ContractError on K < 1, m < 1, or a per-discrete binding whose
  // head count does not match the single discrete cardinality.
  void validate() const;
};

struct HybridAction {
  std::vector<int> discrete;                     // indices in [0, K_i)
  std::vector<Eigen::RowVectorXd> continuous;    // squashed, in (-1, 1)
};

struct ContinuousPolicyHead {
  GaussianHead base;
  std::vector<RadialFlowParams> flows;

  double log_prob(const Eigen::RowVectorXd& action) const;
  // Entropy of the pre-squash density: closed form without flows, a
  // single-sample -log estimate otherwise (rng required then).
  double entropy(Rng* rng = nullptr) const;
  SquashedSample sample(Rng& rng) const;
};

struct HybridPolicyHeads {
  std::vector<CategoricalHead> discrete;
  std::vector<ContinuousPolicyHead> continuous;
};

// Checks shape conformance of action against spec/heads; ContractError if not.
void check_conforms(const HybridActionSpec& spec, const HybridPolicyHeads& heads,
                    const HybridAction& action);

// Factored log-density: sum of discrete log-probs plus the continuous
// log-densities that act under the binding.
double hybrid_log_prob(const HybridActionSpec& spec,
                       const HybridPolicyHeads& heads,
                       const HybridAction& action);

// Weighted entropy bonus alpha_d * H(discrete) + alpha_c * E_{a_d}[H(cont)].
// Discrete entropy is exact; with several discrete components the factored
// sum of per-component entropies is used.
double hybrid_entropy_bonus(const HybridActionSpec& spec,
                            const HybridPolicyHeads& heads, double alpha_d,
                            double alpha_c, Rng* rng = nullptr);

HybridAction hybrid_sample(const HybridActionSpec& spec,
                           const HybridPolicyHeads& heads, Rng& rng);

}  // namespace hsac

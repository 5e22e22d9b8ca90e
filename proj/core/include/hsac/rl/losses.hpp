#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsac/params.hpp"
#include "hsac/tape.hpp"

namespace hsac {

// Soft state value under the factored policy, one row per batch element:
//   v = sum_k pi_k * (q_min_k - alpha_c * logp_k) + alpha_d * H(pi_d)
// q_min/pi_d/log_pi_d are n x K; logp_per_option holds the continuous
// log-density of the sample tied to option k (all-equal columns when the
// continuous part does not depend on the discrete choice, zeros when there
// is none).
Eigen::VectorXd soft_state_value(const Eigen::MatrixXd& q_min,
                                 const Eigen::MatrixXd& logp_per_option,
                                 const Eigen::MatrixXd& pi_d,
                                 const Eigen::MatrixXd& log_pi_d,
                                 double alpha_d, double alpha_c);

// r + gamma * (1 - done) * v, elementwise.
Eigen::VectorXd bellman_target(const Eigen::VectorXd& r,
                               const Eigen::VectorXd& done, double gamma,
                               const Eigen::VectorXd& v);

// Mean squared error between the Q column picked by the taken action and the
// fixed target. Only the gathered outputs receive gradient; the other heads'
// output weights get exactly zero.
NodeRef critic_loss(Tape& t, NodeRef q_all, const std::vector<int>& taken,
                    NodeRef target);

// alpha_d-scaled KL between the policy and the Boltzmann distribution of the
// (detached) Q values: alpha_d * mean_n KL(pi_d || softmax(q / alpha_d)).
NodeRef discrete_policy_loss(Tape& t, NodeRef pi_d, NodeRef log_pi_d,
                             NodeRef q_min_detached, double alpha_d);

// Reparameterized continuous loss, weighted per discrete option:
//   mean_n sum_k pi_k * (alpha_c * logp_k - q_min_k)
// pi_detached must not carry gradient; logp may be n x 1 (broadcast) or n x K.
NodeRef continuous_policy_loss(Tape& t, NodeRef q_min, NodeRef logp,
                               NodeRef pi_detached, double alpha_c);

// d/d(log alpha) of J(alpha) = alpha * (h_current - h_target). Descending
// this raises alpha while entropy is short of its target and lowers it when
// entropy overshoots.
double temperature_gradient(double alpha, double h_current, double h_target);

// target <- (1 - tau) * target + tau * online, for every entry under
// online_prefix (layout under both prefixes must match).
void polyak_update(ParameterSet& params, const std::string& online_prefix,
                   const std::string& target_prefix, double tau);

}  // namespace hsac

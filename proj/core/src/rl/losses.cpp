#include "hsac/rl/losses.hpp"

#include "hsac/errors.hpp"

namespace hsac {

Eigen::VectorXd soft_state_value(const Eigen::MatrixXd& q_min,
                                 const Eigen::MatrixXd& logp_per_option,
                                 const Eigen::MatrixXd& pi_d,
                                 const Eigen::MatrixXd& log_pi_d,
                                 double alpha_d, double alpha_c) {
  if (q_min.rows() != pi_d.rows() || q_min.cols() != pi_d.cols() ||
      logp_per_option.rows() != q_min.rows() ||
      logp_per_option.cols() != q_min.cols() ||
      log_pi_d.rows() != pi_d.rows() || log_pi_d.cols() != pi_d.cols())
    throw ContractError("soft_state_value: shape mismatch");
  const Eigen::MatrixXd inner = q_min - alpha_c * logp_per_option;
  Eigen::VectorXd v = (pi_d.array() * inner.array()).rowwise().sum();
  v -= alpha_d * (pi_d.array() * log_pi_d.array()).rowwise().sum().matrix();
  return v;
}

Eigen::VectorXd bellman_target(const Eigen::VectorXd& r,
                               const Eigen::VectorXd& done, double gamma,
                               const Eigen::VectorXd& v) {
  if (r.size() != done.size() || r.size() != v.size())
    throw ContractError("bellman_target: shape mismatch");
  return r.array() + gamma * (1.0 - done.array()) * v.array();
}

NodeRef critic_loss(Tape& t, NodeRef q_all, const std::vector<int>& taken,
                    NodeRef target) {
  NodeRef picked = t.gather_cols(q_all, taken);
  return t.mean_all(t.square(t.sub(picked, target)));
}

NodeRef discrete_policy_loss(Tape& t, NodeRef pi_d, NodeRef log_pi_d,
                             NodeRef q_min_detached, double alpha_d) {
  if (alpha_d <= 0.0)
    throw ContractError("discrete_policy_loss: alpha_d must be positive");
  NodeRef boltzmann = t.row_log_softmax(t.scale(q_min_detached, 1.0 / alpha_d));
  NodeRef kl = t.sum_rows(t.mul(pi_d, t.sub(log_pi_d, boltzmann)));
  return t.scale(t.mean_all(kl), alpha_d);
}

NodeRef continuous_policy_loss(Tape& t, NodeRef q_min, NodeRef logp,
                               NodeRef pi_detached, double alpha_c) {
  NodeRef per_option = t.sub(t.scale(logp, alpha_c), q_min);
  return t.mean_all(t.sum_rows(t.mul(pi_detached, per_option)));
}

double temperature_gradient(double alpha, double h_current, double h_target) {
  if (alpha <= 0.0)
    throw ContractError("temperature_gradient: alpha must be positive");
  return alpha * (h_current - h_target);
}

void polyak_update(ParameterSet& params, const std::string& online_prefix,
                   const std::string& target_prefix, double tau) {
  if (tau < 0.0 || tau > 1.0)
    throw ContractError("polyak_update: tau must be in [0, 1]");
  const auto names = params.names_with_prefix(online_prefix + ".");
  if (names.empty())
    throw ContractError("polyak_update: no entries under " + online_prefix);
  for (const auto& name : names) {
    const std::string tgt = target_prefix + name.substr(online_prefix.size());
    Eigen::VectorXd& target = params.data(tgt);
    target = (1.0 - tau) * target + tau * params.data(name);
  }
}

}  // namespace hsac

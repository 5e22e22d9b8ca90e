#pragma once

#include <Eigen/Core>

namespace hsac {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian over the pre-squash variable w. log_std is clamped to
// [-20, 2] at construction so downstream densities stay finite.
struct GaussianHead {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd log_std;

  GaussianHead() = default;
  GaussianHead(Eigen::RowVectorXd mu, Eigen::RowVectorXd ls);

  Eigen::RowVectorXd std_dev() const { return log_std.array().exp(); }
  int dim() const { return static_cast<int>(mean.size()); }
};

struct SquashedSample {
  Eigen::RowVectorXd noise;
  Eigen::RowVectorXd pre_squash;
  Eigen::RowVectorXd action;  // tanh(pre_squash), in (-1, 1) per component
  double log_prob = 0.0;      // density of the squashed action
};

// log(1 - tanh(w)^2) summed over components, in the overflow-safe form
// 2 (log 2 - w - softplus(-2w)).
double tanh_log_jacobian(const Eigen::RowVectorXd& w);

// Diagonal-Gaussian log-density of w under the head (pre-squash).
double gaussian_log_prob(const GaussianHead& head,
                         const Eigen::RowVectorXd& w);

// a = tanh(mu + eps * sigma) with the change-of-variables log-density.
SquashedSample gaussian_sample(const GaussianHead& head,
                               const Eigen::RowVectorXd& noise);

// Differential entropy of the pre-squash density: sum_j 1/2 log(2 pi e s_j^2).
double gaussian_entropy(const GaussianHead& head);

}  // namespace hsac

#include "hsac/policy/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "hsac/errors.hpp"

namespace hsac {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453;  // log(2 pi)
}

GaussianHead::GaussianHead(Eigen::RowVectorXd mu, Eigen::RowVectorXd ls)
    : mean(std::move(mu)), log_std(std::move(ls)) {
  if (mean.size() != log_std.size())
    throw ContractError("gaussian head: mean/log_std size mismatch");
  log_std = log_std.array().max(kLogStdMin).min(kLogStdMax);
}

double tanh_log_jacobian(const Eigen::RowVectorXd& w) {
  const auto softplus = [](double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  };
  double out = 0.0;
  for (double v : w)
    out += 2.0 * (std::numbers::ln2 - v - softplus(-2.0 * v));
  return out;
}

double gaussian_log_prob(const GaussianHead& head,
                         const Eigen::RowVectorXd& w) {
  if (w.size() != head.mean.size())
    throw ContractError("gaussian log-prob: dim mismatch");
  const Eigen::ArrayXd z =
      (w - head.mean).transpose().array() / head.std_dev().transpose().array();
  return -0.5 * (z.square() + kLogTwoPi).sum() - head.log_std.sum();
}

SquashedSample gaussian_sample(const GaussianHead& head,
                               const Eigen::RowVectorXd& noise) {
  if (noise.size() != head.mean.size())
    throw ContractError("gaussian sample: noise dim mismatch");
  SquashedSample s;
  s.noise = noise;
  s.pre_squash = head.mean + noise.cwiseProduct(head.std_dev());
  s.action = s.pre_squash.array().tanh();
  s.log_prob =
      gaussian_log_prob(head, s.pre_squash) - tanh_log_jacobian(s.pre_squash);
  return s;
}

double gaussian_entropy(const GaussianHead& head) {
  constexpr double half_log_2pie = 1.4189385332046727;  // 1/2 log(2 pi e)
  return head.dim() * half_log_2pie + head.log_std.sum();
}

}  // namespace hsac

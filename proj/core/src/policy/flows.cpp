#include "hsac/policy/flows.hpp"

#include <algorithm>
#include <cmath>

#include "hsac/errors.hpp"

namespace hsac {

double radial_solve_radius(double alpha, double beta, double target_norm) {
  if (target_norm <= 0.0) return 0.0;
  const double big_r = target_norm;
  // The stretch factor 1 + beta/(alpha + r) lies between 1 and 1 + beta/alpha
  // for every r >= 0, which brackets the root.
  const double other = big_r * alpha / (alpha + beta);
  double lo = std::min(big_r, other);
  double hi = std::max(big_r, other);
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double denom = alpha + r;
    const double g = r + beta * r / denom;
    const double diff = g - big_r;
    if (std::abs(diff) <= 1e-14 * std::max(1.0, big_r)) break;
    (diff > 0.0 ? hi : lo) = r;
    const double slope = 1.0 + alpha * beta / (denom * denom);
    double next = r - diff / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    r = next;
  }
  return r;
}

double radial_log_det(const RadialFlowParams& p, const Eigen::RowVectorXd& z) {
  const double alpha = p.alpha();
  const double beta = p.beta();
  const double r = (z - p.z0).norm();
  const double denom = alpha + r;
  const double c1 = 1.0 + beta / denom;
  const double factor1 = c1 - beta * r / (denom * denom);
  return std::log(factor1) + (z.size() - 1) * std::log(c1);
}

RadialFlowResult radial_flow_forward(const RadialFlowParams& p,
                                     const Eigen::RowVectorXd& z) {
  if (z.size() != p.z0.size())
    throw ContractError("radial flow: dim mismatch");
  const Eigen::RowVectorXd diff = z - p.z0;
  const double r = diff.norm();
  RadialFlowResult out;
  out.value = z + (p.beta() / (p.alpha() + r)) * diff;
  out.log_det = radial_log_det(p, z);
  return out;
}

Eigen::RowVectorXd radial_flow_invert(const RadialFlowParams& p,
                                      const Eigen::RowVectorXd& target) {
  if (target.size() != p.z0.size())
    throw ContractError("radial flow: dim mismatch");
  const Eigen::RowVectorXd diff = target - p.z0;
  const double big_r = diff.norm();
  if (big_r == 0.0) return p.z0;
  const double r = radial_solve_radius(p.alpha(), p.beta(), big_r);
  return p.z0 + (r / big_r) * diff;
}

double FlowTrace::log_det_sum() const {
  double s = 0.0;
  for (double v : log_dets) s += v;
  return s;
}

FlowTrace flow_chain_forward(const std::vector<RadialFlowParams>& flows,
                             const Eigen::RowVectorXd& w0) {
  FlowTrace trace;
  trace.points.resize(static_cast<Eigen::Index>(flows.size()) + 1, w0.size());
  trace.points.row(0) = w0;
  trace.log_dets.reserve(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    auto step = radial_flow_forward(flows[i], trace.points.row(i));
    trace.points.row(static_cast<Eigen::Index>(i) + 1) = step.value;
    trace.log_dets.push_back(step.log_det);
  }
  return trace;
}

FlowTrace flow_chain_invert(const std::vector<RadialFlowParams>& flows,
                            const Eigen::RowVectorXd& w_final) {
  FlowTrace trace;
  const auto n = static_cast<Eigen::Index>(flows.size());
  trace.points.resize(n + 1, w_final.size());
  trace.points.row(n) = w_final;
  trace.log_dets.assign(flows.size(), 0.0);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const Eigen::RowVectorXd z =
        radial_flow_invert(flows[i], trace.points.row(i + 1));
    trace.points.row(i) = z;
    trace.log_dets[i] = radial_log_det(flows[i], z);
  }
  return trace;
}

SquashedSample flow_stack_sample(const GaussianHead& head,
                                 const std::vector<RadialFlowParams>& flows,
                                 const Eigen::RowVectorXd& noise,
                                 FlowTrace* trace) {
  for (const auto& f : flows)
    if (f.z0.size() != head.mean.size())
      throw ContractError("flow stack: layer dim differs from head dim");
  const Eigen::RowVectorXd w0 =
      head.mean + noise.cwiseProduct(head.std_dev());
  FlowTrace t = flow_chain_forward(flows, w0);
  SquashedSample s;
  s.noise = noise;
  s.pre_squash = t.final();
  s.action = s.pre_squash.array().tanh();
  s.log_prob = gaussian_log_prob(head, w0) - t.log_det_sum() -
               tanh_log_jacobian(s.pre_squash);
  if (trace) *trace = std::move(t);
  return s;
}

double flow_log_prob_presquash(const GaussianHead& head,
                               const std::vector<RadialFlowParams>& flows,
                               const Eigen::RowVectorXd& w_final) {
  FlowTrace t = flow_chain_invert(flows, w_final);
  return gaussian_log_prob(head, t.points.row(0)) - t.log_det_sum();
}

double flow_log_prob(const GaussianHead& head,
                     const std::vector<RadialFlowParams>& flows,
                     const Eigen::RowVectorXd& action) {
  if ((action.array().abs() >= 1.0).any())
    throw ContractError("flow log-prob: action outside (-1, 1)");
  const Eigen::RowVectorXd w =
      action.unaryExpr([](double a) { return std::atanh(a); });
  return flow_log_prob_presquash(head, flows, w) - tanh_log_jacobian(w);
}

}  // namespace hsac

#pragma once

#include <vector>

#include <Eigen/Core>

#include "hsac/policy/gaussian.hpp"

namespace hsac {

// One radial layer f(z) = z + beta * (z - z0) / (alpha + ||z - z0||).
// alpha = exp(x) and beta = exp(y) - alpha, so alpha > 0 and beta > -alpha
// hold for any real (x, y) and the layer is always invertible.
struct RadialFlowParams {
  Eigen::RowVectorXd z0;
  double x = 0.0;
  double y = 0.0;

  double alpha() const { return std::exp(x); }
  double beta() const { return std::exp(y) - std::exp(x); }
};

// Radius r = ||z - z0|| of the preimage, given ||target - z0||. The map
// r -> r + beta r / (alpha + r) is strictly increasing, so the root is unique.
double radial_solve_radius(double alpha, double beta, double target_norm);

// log|det df/dz| at input z, with r = ||z - z0||.
double radial_log_det(const RadialFlowParams& p, const Eigen::RowVectorXd& z);

struct RadialFlowResult {
  Eigen::RowVectorXd value;
  double log_det;
};

RadialFlowResult radial_flow_forward(const RadialFlowParams& p,
                                     const Eigen::RowVectorXd& z);

Eigen::RowVectorXd radial_flow_invert(const RadialFlowParams& p,
                                      const Eigen::RowVectorXd& target);

// Intermediate values of a flow chain: points.row(0) is the base sample w0,
// points.row(N) the pre-squash output; log_dets[i] belongs to layer i.
struct FlowTrace {
  Eigen::MatrixXd points;
  std::vector<double> log_dets;
  double log_det_sum() const;
  Eigen::RowVectorXd final() const { return points.row(points.rows() - 1); }
};

FlowTrace flow_chain_forward(const std::vector<RadialFlowParams>& flows,
                             const Eigen::RowVectorXd& w0);
FlowTrace flow_chain_invert(const std::vector<RadialFlowParams>& flows,
                            const Eigen::RowVectorXd& w_final);

// Draws through base Gaussian + flows + tanh. log_prob is the density of the
// squashed action (base log-density minus the chain log-dets minus the tanh
// volume term).
SquashedSample flow_stack_sample(const GaussianHead& head,
                                 const std::vector<RadialFlowParams>& flows,
                                 const Eigen::RowVectorXd& noise,
                                 FlowTrace* trace = nullptr);

// Density of a given squashed action under the stack, via chain inversion.
double flow_log_prob(const GaussianHead& head,
                     const std::vector<RadialFlowParams>& flows,
                     const Eigen::RowVectorXd& action);

// Density of a given pre-squash point (no tanh term).
double flow_log_prob_presquash(const GaussianHead& head,
                               const std::vector<RadialFlowParams>& flows,
                               const Eigen::RowVectorXd& w_final);

}  // namespace hsac

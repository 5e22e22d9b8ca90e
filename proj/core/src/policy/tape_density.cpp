#include "hsac/policy/tape_density.hpp"

#include <cmath>
#include <numbers>

namespace hsac {

NodeRef gaussian_log_prob_tape(Tape& t, NodeRef mean, NodeRef log_std,
                               NodeRef w) {
  constexpr double log_two_pi = 1.8378770664093453;
  NodeRef z = t.div(t.sub(w, mean), t.exp(log_std));
  NodeRef quad = t.scale(
      t.sum_rows(t.add_const(t.square(z), log_two_pi)), -0.5);
  return t.sub(quad, t.sum_rows(log_std));
}

NodeRef tanh_log_jacobian_tape(Tape& t, NodeRef w) {
  NodeRef sp = t.softplus(t.scale(w, -2.0));
  NodeRef term =
      t.add_const(t.scale(t.add(w, sp), -1.0), std::numbers::ln2);
  return t.scale(t.sum_rows(term), 2.0);
}

namespace {

struct LayerStep {
  NodeRef output;
  NodeRef log_det;
};

// One radial layer and its log-det, evaluated at input w (n x d).
LayerStep flow_layer_tape(Tape& t, const FlowLayerNodes& layer, NodeRef w) {
  const auto d = t.value(w).cols();
  NodeRef alpha = t.exp(layer.x);
  NodeRef beta = t.sub(t.exp(layer.y), alpha);
  NodeRef diff = t.sub(w, layer.z0);
  NodeRef r = t.row_norm(diff);
  NodeRef denom = t.add(r, alpha);
  NodeRef h = t.div(beta, denom);  // beta / (alpha + r), n x 1
  LayerStep step;
  step.output = t.add(w, t.mul(diff, h));
  NodeRef c1 = t.add_const(h, 1.0);
  NodeRef factor1 =
      t.sub(c1, t.div(t.mul(beta, r), t.square(denom)));
  step.log_det = t.add(t.log(factor1),
                       t.scale(t.log(c1), static_cast<double>(d - 1)));
  return step;
}

NodeRef flow_layer_log_det_tape(Tape& t, const FlowLayerNodes& layer,
                                NodeRef w) {
  return flow_layer_tape(t, layer, w).log_det;
}

}  // namespace

FlowChainNodes flow_chain_forward_tape(
    Tape& t, const std::vector<FlowLayerNodes>& layers, NodeRef w0) {
  FlowChainNodes out;
  out.final = w0;
  out.log_det_sum = t.constant(Mat::Zero(t.value(w0).rows(), 1));
  for (const auto& layer : layers) {
    LayerStep step = flow_layer_tape(t, layer, out.final);
    out.final = step.output;
    out.log_det_sum = t.add(out.log_det_sum, step.log_det);
  }
  return out;
}

NodeRef flow_log_prob_presquash_tape(Tape& t,
                                     const std::vector<FlowLayerNodes>& layers,
                                     NodeRef mean, NodeRef log_std,
                                     NodeRef w_final) {
  NodeRef w = w_final;
  NodeRef log_det_sum = t.constant(Mat::Zero(t.value(w_final).rows(), 1));
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    w = t.flow_invert(w, it->z0, it->x, it->y);
    log_det_sum = t.add(log_det_sum, flow_layer_log_det_tape(t, *it, w));
  }
  return t.sub(gaussian_log_prob_tape(t, mean, log_std, w), log_det_sum);
}

}  // namespace hsac

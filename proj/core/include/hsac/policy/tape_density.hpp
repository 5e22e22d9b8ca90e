#pragma once

#include <vector>

#include "hsac/tape.hpp"

namespace hsac {

// Diagonal-Gaussian log-density per row (pre-squash): mean/log_std broadcast
// against w along rows. n x d -> n x 1.
NodeRef gaussian_log_prob_tape(Tape& t, NodeRef mean, NodeRef log_std,
                               NodeRef w);

// sum_j log(1 - tanh(w_j)^2) per row, stable form. n x d -> n x 1.
NodeRef tanh_log_jacobian_tape(Tape& t, NodeRef w);

struct FlowLayerNodes {
  NodeRef z0;  // 1 x d
  NodeRef x;   // 1 x 1
  NodeRef y;   // 1 x 1
};

struct FlowChainNodes {
  NodeRef final;        // n x d
  NodeRef log_det_sum;  // n x 1 (zero constant when the chain is empty)
};

FlowChainNodes flow_chain_forward_tape(Tape& t,
                                       const std::vector<FlowLayerNodes>& layers,
                                       NodeRef w0);

// Density of externally supplied pre-squash points: inverts the chain and
// evaluates the same per-layer log-dets at the recovered inputs.
NodeRef flow_log_prob_presquash_tape(Tape& t,
                                     const std::vector<FlowLayerNodes>& layers,
                                     NodeRef mean, NodeRef log_std,
                                     NodeRef w_final);

}  // namespace hsac

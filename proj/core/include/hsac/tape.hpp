#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsac/params.hpp"

namespace hsac {

using Mat = Eigen::MatrixXd;

struct NodeRef {
  int id = -1;
};

enum class Op {
  kConstant,
  kParam,
  kDense,        // x * W + row-broadcast bias
  kAdd,          // binary ops broadcast a 1-sized dim on either input
  kSub,
  kMul,
  kDiv,
  kMinimum,
  kScale,        // * compile-time constant
  kAddConst,
  kRelu,
  kTanh,
  kAtanh,
  kExp,
  kLog,
  kSqrt,
  kSquare,
  kSoftplus,
  kClamp,
  kSumAll,
  kMeanAll,
  kSumRows,      // n x m -> n x 1
  kSumCols,      // n x m -> 1 x m
  kRowSoftmax,
  kRowLogSoftmax,
  kRowLogSumExp,
  kRowNorm,      // Euclidean norm per row, n x d -> n x 1
  kGatherCols,   // per-row column pick, n x K -> n x 1
  kConcatCols,
  kSliceCols,
  kStopGrad,
  kFlowInvert,   // inverse radial flow; see flows.cpp for the solve
};

// Records every primitive of a forward computation so the reverse sweep can
// produce parameter gradients. Values are eagerly evaluated at build time.
// A tape borrows the ParameterSet it was given; the set must outlive it and
// stay unchanged while the tape is in use.
class Tape {
 public:
  struct Node {
    Op op;
    int a = -1, b = -1, c = -1, d = -1;
    double x0 = 0.0, x1 = 0.0;     // op constants (scale, clamp bounds, ...)
    std::vector<int> idx;          // gather indices / slice extents
    std::string param;             // kParam only
    Mat value;
  };

  Tape() = default;
  explicit Tape(const ParameterSet* params) : params_(params) {}

  NodeRef constant(Mat v);
  NodeRef scalar(double v);
  NodeRef param(std::string_view name);

  NodeRef dense(NodeRef x, NodeRef w, NodeRef b);
  NodeRef add(NodeRef a, NodeRef b);
  NodeRef sub(NodeRef a, NodeRef b);
  NodeRef mul(NodeRef a, NodeRef b);
  NodeRef div(NodeRef a, NodeRef b);
  NodeRef minimum(NodeRef a, NodeRef b);
  NodeRef scale(NodeRef a, double k);
  NodeRef add_const(NodeRef a, double k);
  NodeRef relu(NodeRef a);
  NodeRef tanh(NodeRef a);
  NodeRef atanh(NodeRef a);
  NodeRef exp(NodeRef a);
  NodeRef log(NodeRef a);
  NodeRef sqrt(NodeRef a);
  NodeRef square(NodeRef a);
  NodeRef softplus(NodeRef a);
  NodeRef clamp(NodeRef a, double lo, double hi);
  NodeRef sum_all(NodeRef a);
  NodeRef mean_all(NodeRef a);
  NodeRef sum_rows(NodeRef a);
  NodeRef sum_cols(NodeRef a);
  NodeRef row_softmax(NodeRef a);
  NodeRef row_log_softmax(NodeRef a);
  NodeRef row_logsumexp(NodeRef a);
  NodeRef row_norm(NodeRef a);
  NodeRef gather_cols(NodeRef a, std::vector<int> idx);
  NodeRef concat_cols(NodeRef a, NodeRef b);
  NodeRef slice_cols(NodeRef a, int start, int len);
  NodeRef stop_grad(NodeRef a);
  // z such that the radial flow with parameters (z0, x, y) maps z to target.
  NodeRef flow_invert(NodeRef target, NodeRef z0, NodeRef x, NodeRef y);

  const Mat& value(NodeRef r) const { return nodes_[r.id].value; }
  double scalar_value(NodeRef r) const { return nodes_[r.id].value(0, 0); }
  int size() const { return static_cast<int>(nodes_.size()); }
  const ParameterSet* params() const { return params_; }

  // Reverse sweep from `root`, seeded with d(out)/d(out) = seed. Accumulates
  // into `grads`, which must be congruent with the bound ParameterSet (see
  // ParameterSet::zeros_like). Adjoints of interior nodes are discarded.
  void backward(NodeRef root, const Mat& seed, ParameterSet* grads) const;
  // Convenience for scalar roots with seed 1.
  ParameterSet backward(NodeRef root) const;
  // Adjoint of a designated node (e.g. an input constant) from the same sweep.
  void backward_with_probe(NodeRef root, const Mat& seed, ParameterSet* grads,
                           NodeRef probe, Mat* probe_adjoint) const;

  // Re-evaluates every node from the leaves and compares bit-for-bit with the
  // recorded values.
  bool replay_matches() const;

 private:
  NodeRef push(Node n);
  Mat eval(const Node& n, const std::vector<Mat>& values) const;

  const ParameterSet* params_ = nullptr;
  std::vector<Node> nodes_;
};

}  // namespace hsac

#include "hsac/tape.hpp"

#include <cmath>
#include <cstring>

#include "hsac/errors.hpp"
#include "hsac/policy/flows.hpp"

namespace hsac {

namespace {

Mat expand(const Mat& m, Eigen::Index r, Eigen::Index c) {
  if (m.rows() == r && m.cols() == c) return m;
  return m.replicate(r / m.rows(), c / m.cols());
}

Mat reduce_to(const Mat& g, Eigen::Index r, Eigen::Index c) {
  Mat out = g;
  if (out.rows() != r) out = out.colwise().sum().eval();
  if (out.cols() != c) out = out.rowwise().sum().eval();
  return out;
}

void check_broadcast(const Mat& a, const Mat& b) {
  const auto ok = [](Eigen::Index x, Eigen::Index y) {
    return x == y || x == 1 || y == 1;
  };
  if (!ok(a.rows(), b.rows()) || !ok(a.cols(), b.cols()))
    throw ConfigError("incompatible shapes for elementwise op");
}

double softplus_stable(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

NodeRef Tape::push(Node n) {
  n.value = eval(n, {});
  nodes_.push_back(std::move(n));
  return NodeRef{static_cast<int>(nodes_.size() - 1)};
}

Mat Tape::eval(const Node& n, const std::vector<Mat>& replay) const {
  const auto val = [&](int id) -> const Mat& {
    return replay.empty() ? nodes_[id].value : replay[id];
  };
  switch (n.op) {
    case Op::kConstant:
      return n.value;
    case Op::kParam:
      return params_->matrix(n.param);
    case Op::kDense: {
      const Mat& x = val(n.a);
      const Mat& w = val(n.b);
      const Mat& b = val(n.c);
      Mat out = x * w;
      out.rowwise() += b.row(0);
      return out;
    }
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kMinimum: {
      const Mat& a = val(n.a);
      const Mat& b = val(n.b);
      const auto r = std::max(a.rows(), b.rows());
      const auto c = std::max(a.cols(), b.cols());
      Mat ea = expand(a, r, c), eb = expand(b, r, c);
      switch (n.op) {
        case Op::kAdd: return ea + eb;
        case Op::kSub: return ea - eb;
        case Op::kMul: return ea.cwiseProduct(eb);
        case Op::kDiv: return ea.cwiseQuotient(eb);
        default: return ea.cwiseMin(eb);
      }
    }
    case Op::kScale:
      return val(n.a) * n.x0;
    case Op::kAddConst:
      return val(n.a).array() + n.x0;
    case Op::kRelu:
      return val(n.a).cwiseMax(0.0);
    case Op::kTanh:
      return val(n.a).array().tanh();
    case Op::kAtanh:
      return val(n.a).unaryExpr([](double v) { return std::atanh(v); });
    case Op::kExp:
      return val(n.a).array().exp();
    case Op::kLog:
      return val(n.a).array().log();
    case Op::kSqrt:
      return val(n.a).array().sqrt();
    case Op::kSquare:
      return val(n.a).array().square();
    case Op::kSoftplus:
      return val(n.a).unaryExpr(&softplus_stable);
    case Op::kClamp:
      return val(n.a).array().max(n.x0).min(n.x1);
    case Op::kSumAll:
      return Mat::Constant(1, 1, val(n.a).sum());
    case Op::kMeanAll:
      return Mat::Constant(1, 1, val(n.a).mean());
    case Op::kSumRows:
      return val(n.a).rowwise().sum();
    case Op::kSumCols:
      return val(n.a).colwise().sum();
    case Op::kRowSoftmax: {
      const Mat& x = val(n.a);
      Mat out(x.rows(), x.cols());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double m = x.row(i).maxCoeff();
        Eigen::ArrayXd e = (x.row(i).array() - m).exp();
        out.row(i) = (e / e.sum()).matrix();
      }
      return out;
    }
    case Op::kRowLogSoftmax: {
      const Mat& x = val(n.a);
      Mat out(x.rows(), x.cols());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double m = x.row(i).maxCoeff();
        const double lse = m + std::log((x.row(i).array() - m).exp().sum());
        out.row(i) = x.row(i).array() - lse;
      }
      return out;
    }
    case Op::kRowLogSumExp: {
      const Mat& x = val(n.a);
      Mat out(x.rows(), 1);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double m = x.row(i).maxCoeff();
        out(i, 0) = m + std::log((x.row(i).array() - m).exp().sum());
      }
      return out;
    }
    case Op::kRowNorm: {
      const Mat& x = val(n.a);
      Mat out(x.rows(), 1);
      for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, 0) = x.row(i).norm();
      return out;
    }
    case Op::kGatherCols: {
      const Mat& x = val(n.a);
      Mat out(x.rows(), 1);
      for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, 0) = x(i, n.idx[i]);
      return out;
    }
    case Op::kConcatCols: {
      const Mat& a = val(n.a);
      const Mat& b = val(n.b);
      Mat out(a.rows(), a.cols() + b.cols());
      out << a, b;
      return out;
    }
    case Op::kSliceCols:
      return val(n.a).middleCols(n.idx[0], n.idx[1]);
    case Op::kStopGrad:
      return val(n.a);
    case Op::kFlowInvert: {
      const Mat& target = val(n.a);
      const Mat& z0 = val(n.b);
      const double alpha = std::exp(val(n.c)(0, 0));
      const double beta = std::exp(val(n.d)(0, 0)) - alpha;
      Mat out(target.rows(), target.cols());
      for (Eigen::Index i = 0; i < target.rows(); ++i) {
        Eigen::RowVectorXd up = target.row(i) - z0.row(0);
        const double big_r = up.norm();
        const double r = radial_solve_radius(alpha, beta, big_r);
        const double ratio = big_r > 0.0 ? r / big_r : 0.0;
        out.row(i) = z0.row(0) + ratio * up;
      }
      return out;
    }
  }
  throw ConfigError("unreachable op");
}

NodeRef Tape::constant(Mat v) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(v);
  nodes_.push_back(std::move(n));
  return NodeRef{static_cast<int>(nodes_.size() - 1)};
}

NodeRef Tape::scalar(double v) { return constant(Mat::Constant(1, 1, v)); }

NodeRef Tape::param(std::string_view name) {
  if (!params_) throw ConfigError("tape has no bound parameter set");
  Node n;
  n.op = Op::kParam;
  n.param = std::string(name);
  return push(std::move(n));
}

namespace {
Tape::Node unary(Op op, NodeRef a) {
  Tape::Node n;
  n.op = op;
  n.a = a.id;
  return n;
}
Tape::Node binary(Op op, NodeRef a, NodeRef b) {
  Tape::Node n;
  n.op = op;
  n.a = a.id;
  n.b = b.id;
  return n;
}
}  // namespace

NodeRef Tape::dense(NodeRef x, NodeRef w, NodeRef b) {
  if (value(x).cols() != value(w).rows() ||
      value(w).cols() != value(b).cols() || value(b).rows() != 1)
    throw ConfigError("dense: shape mismatch");
  Node n = binary(Op::kDense, x, w);
  n.c = b.id;
  return push(std::move(n));
}

NodeRef Tape::add(NodeRef a, NodeRef b) {
  check_broadcast(value(a), value(b));
  return push(binary(Op::kAdd, a, b));
}
NodeRef Tape::sub(NodeRef a, NodeRef b) {
  check_broadcast(value(a), value(b));
  return push(binary(Op::kSub, a, b));
}
NodeRef Tape::mul(NodeRef a, NodeRef b) {
  check_broadcast(value(a), value(b));
  return push(binary(Op::kMul, a, b));
}
NodeRef Tape::div(NodeRef a, NodeRef b) {
  check_broadcast(value(a), value(b));
  return push(binary(Op::kDiv, a, b));
}
NodeRef Tape::minimum(NodeRef a, NodeRef b) {
  check_broadcast(value(a), value(b));
  return push(binary(Op::kMinimum, a, b));
}

NodeRef Tape::scale(NodeRef a, double k) {
  Node n = unary(Op::kScale, a);
  n.x0 = k;
  return push(std::move(n));
}
NodeRef Tape::add_const(NodeRef a, double k) {
  Node n = unary(Op::kAddConst, a);
  n.x0 = k;
  return push(std::move(n));
}
NodeRef Tape::relu(NodeRef a) { return push(unary(Op::kRelu, a)); }
NodeRef Tape::tanh(NodeRef a) { return push(unary(Op::kTanh, a)); }
NodeRef Tape::atanh(NodeRef a) { return push(unary(Op::kAtanh, a)); }
NodeRef Tape::exp(NodeRef a) { return push(unary(Op::kExp, a)); }
NodeRef Tape::log(NodeRef a) { return push(unary(Op::kLog, a)); }
NodeRef Tape::sqrt(NodeRef a) { return push(unary(Op::kSqrt, a)); }
NodeRef Tape::square(NodeRef a) { return push(unary(Op::kSquare, a)); }
NodeRef Tape::softplus(NodeRef a) { return push(unary(Op::kSoftplus, a)); }

NodeRef Tape::clamp(NodeRef a, double lo, double hi) {
  Node n = unary(Op::kClamp, a);
  n.x0 = lo;
  n.x1 = hi;
  return push(std::move(n));
}

NodeRef Tape::sum_all(NodeRef a) { return push(unary(Op::kSumAll, a)); }
NodeRef Tape::mean_all(NodeRef a) { return push(unary(Op::kMeanAll, a)); }
NodeRef Tape::sum_rows(NodeRef a) { return push(unary(Op::kSumRows, a)); }
NodeRef Tape::sum_cols(NodeRef a) { return push(unary(Op::kSumCols, a)); }
NodeRef Tape::row_softmax(NodeRef a) { return push(unary(Op::kRowSoftmax, a)); }
NodeRef Tape::row_log_softmax(NodeRef a) {
  return push(unary(Op::kRowLogSoftmax, a));
}
NodeRef Tape::row_logsumexp(NodeRef a) {
  return push(unary(Op::kRowLogSumExp, a));
}
NodeRef Tape::row_norm(NodeRef a) { return push(unary(Op::kRowNorm, a)); }

NodeRef Tape::gather_cols(NodeRef a, std::vector<int> idx) {
  const Mat& x = value(a);
  if (static_cast<Eigen::Index>(idx.size()) != x.rows())
    throw ConfigError("gather_cols: one index per row required");
  for (int j : idx)
    if (j < 0 || j >= x.cols()) throw ConfigError("gather_cols: index range");
  Node n = unary(Op::kGatherCols, a);
  n.idx = std::move(idx);
  return push(std::move(n));
}

NodeRef Tape::concat_cols(NodeRef a, NodeRef b) {
  if (value(a).rows() != value(b).rows())
    throw ConfigError("concat_cols: row mismatch");
  return push(binary(Op::kConcatCols, a, b));
}

NodeRef Tape::slice_cols(NodeRef a, int start, int len) {
  if (start < 0 || len < 1 || start + len > value(a).cols())
    throw ConfigError("slice_cols: range");
  Node n = unary(Op::kSliceCols, a);
  n.idx = {start, len};
  return push(std::move(n));
}

NodeRef Tape::stop_grad(NodeRef a) { return push(unary(Op::kStopGrad, a)); }

NodeRef Tape::flow_invert(NodeRef target, NodeRef z0, NodeRef x, NodeRef y) {
  if (value(z0).rows() != 1 || value(z0).cols() != value(target).cols() ||
      value(x).size() != 1 || value(y).size() != 1)
    throw ConfigError("flow_invert: shape mismatch");
  Node n = binary(Op::kFlowInvert, target, z0);
  n.c = x.id;
  n.d = y.id;
  return push(std::move(n));
}

void Tape::backward(NodeRef root, const Mat& seed, ParameterSet* grads) const {
  backward_with_probe(root, seed, grads, NodeRef{-1}, nullptr);
}

ParameterSet Tape::backward(NodeRef root) const {
  if (!params_) throw ConfigError("tape has no bound parameter set");
  ParameterSet grads = ParameterSet::zeros_like(*params_);
  backward(root, Mat::Constant(1, 1, 1.0), &grads);
  return grads;
}

void Tape::backward_with_probe(NodeRef root, const Mat& seed,
                               ParameterSet* grads, NodeRef probe,
                               Mat* probe_adjoint) const {
  std::vector<Mat> adj(nodes_.size());
  const auto touch = [&](int id, Eigen::Index r, Eigen::Index c) -> Mat& {
    if (adj[id].size() == 0) adj[id] = Mat::Zero(r, c);
    return adj[id];
  };
  const auto acc = [&](int id, const Mat& g) {
    const Mat& v = nodes_[id].value;
    touch(id, v.rows(), v.cols()) += reduce_to(g, v.rows(), v.cols());
  };

  if (seed.rows() != nodes_[root.id].value.rows() ||
      seed.cols() != nodes_[root.id].value.cols())
    throw ConfigError("backward: seed shape mismatch");
  adj[root.id] = seed;

  for (int i = root.id; i >= 0; --i) {
    if (adj[i].size() == 0) continue;
    const Node& n = nodes_[i];
    const Mat& g = adj[i];
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParam: {
        if (grads) {
          auto& e = grads->entry(n.param);
          const int c = ParameterSet::cols(e);
          for (Eigen::Index r = 0; r < g.rows(); ++r)
            for (Eigen::Index cc = 0; cc < g.cols(); ++cc)
              e.data(r * c + cc) += g(r, cc);
        }
        break;
      }
      case Op::kDense: {
        const Mat& x = nodes_[n.a].value;
        const Mat& w = nodes_[n.b].value;
        acc(n.a, g * w.transpose());
        acc(n.b, x.transpose() * g);
        acc(n.c, g.colwise().sum());
        break;
      }
      case Op::kAdd:
        acc(n.a, g);
        acc(n.b, g);
        break;
      case Op::kSub:
        acc(n.a, g);
        acc(n.b, -g);
        break;
      case Op::kMul: {
        const Mat& a = nodes_[n.a].value;
        const Mat& b = nodes_[n.b].value;
        acc(n.a, g.cwiseProduct(expand(b, g.rows(), g.cols())));
        acc(n.b, g.cwiseProduct(expand(a, g.rows(), g.cols())));
        break;
      }
      case Op::kDiv: {
        const Mat ea = expand(nodes_[n.a].value, g.rows(), g.cols());
        const Mat eb = expand(nodes_[n.b].value, g.rows(), g.cols());
        acc(n.a, g.cwiseQuotient(eb));
        acc(n.b, -(g.cwiseProduct(ea).cwiseQuotient(eb.cwiseProduct(eb))));
        break;
      }
      case Op::kMinimum: {
        const Mat ea = expand(nodes_[n.a].value, g.rows(), g.cols());
        const Mat eb = expand(nodes_[n.b].value, g.rows(), g.cols());
        const Mat mask = (ea.array() <= eb.array()).cast<double>();
        acc(n.a, g.cwiseProduct(mask));
        acc(n.b, g.cwiseProduct(Mat(1.0 - mask.array())));
        break;
      }
      case Op::kScale:
        acc(n.a, g * n.x0);
        break;
      case Op::kAddConst:
        acc(n.a, g);
        break;
      case Op::kRelu: {
        const Mat mask =
            (nodes_[n.a].value.array() > 0.0).cast<double>();
        acc(n.a, g.cwiseProduct(mask));
        break;
      }
      case Op::kTanh:
        acc(n.a, g.cwiseProduct(Mat(1.0 - n.value.array().square())));
        break;
      case Op::kAtanh:
        acc(n.a, g.cwiseQuotient(
                     Mat(1.0 - nodes_[n.a].value.array().square())));
        break;
      case Op::kExp:
        acc(n.a, g.cwiseProduct(n.value));
        break;
      case Op::kLog:
        acc(n.a, g.cwiseQuotient(nodes_[n.a].value));
        break;
      case Op::kSqrt:
        acc(n.a, g.cwiseQuotient(Mat(2.0 * n.value.array())));
        break;
      case Op::kSquare:
        acc(n.a, g.cwiseProduct(Mat(2.0 * nodes_[n.a].value.array())));
        break;
      case Op::kSoftplus: {
        const Mat s = nodes_[n.a].value.unaryExpr(
            [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        acc(n.a, g.cwiseProduct(s));
        break;
      }
      case Op::kClamp: {
        const Mat mask = ((nodes_[n.a].value.array() >= n.x0) &&
                          (nodes_[n.a].value.array() <= n.x1))
                             .cast<double>();
        acc(n.a, g.cwiseProduct(mask));
        break;
      }
      case Op::kSumAll:
        acc(n.a, Mat::Constant(nodes_[n.a].value.rows(),
                               nodes_[n.a].value.cols(), g(0, 0)));
        break;
      case Op::kMeanAll:
        acc(n.a, Mat::Constant(nodes_[n.a].value.rows(),
                               nodes_[n.a].value.cols(),
                               g(0, 0) / nodes_[n.a].value.size()));
        break;
      case Op::kSumRows:
        acc(n.a, g.replicate(1, nodes_[n.a].value.cols()));
        break;
      case Op::kSumCols:
        acc(n.a, g.replicate(nodes_[n.a].value.rows(), 1));
        break;
      case Op::kRowSoftmax: {
        Mat dx(n.value.rows(), n.value.cols());
        for (Eigen::Index r = 0; r < n.value.rows(); ++r) {
          const double dot = n.value.row(r).dot(g.row(r));
          dx.row(r) = n.value.row(r).cwiseProduct(
              (g.row(r).array() - dot).matrix());
        }
        acc(n.a, dx);
        break;
      }
      case Op::kRowLogSoftmax: {
        Mat dx(n.value.rows(), n.value.cols());
        for (Eigen::Index r = 0; r < n.value.rows(); ++r) {
          const double gs = g.row(r).sum();
          dx.row(r) = g.row(r) - (n.value.row(r).array().exp() * gs).matrix();
        }
        acc(n.a, dx);
        break;
      }
      case Op::kRowLogSumExp: {
        const Mat& x = nodes_[n.a].value;
        Mat dx(x.rows(), x.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r)
          dx.row(r) = (x.row(r).array() - n.value(r, 0)).exp() * g(r, 0);
        acc(n.a, dx);
        break;
      }
      case Op::kRowNorm: {
        const Mat& x = nodes_[n.a].value;
        Mat dx = Mat::Zero(x.rows(), x.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r)
          if (n.value(r, 0) > 0.0)
            dx.row(r) = x.row(r) * (g(r, 0) / n.value(r, 0));
        acc(n.a, dx);
        break;
      }
      case Op::kGatherCols: {
        const Mat& x = nodes_[n.a].value;
        Mat dx = Mat::Zero(x.rows(), x.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r) dx(r, n.idx[r]) = g(r, 0);
        acc(n.a, dx);
        break;
      }
      case Op::kConcatCols: {
        const auto ca = nodes_[n.a].value.cols();
        acc(n.a, g.leftCols(ca));
        acc(n.b, g.rightCols(g.cols() - ca));
        break;
      }
      case Op::kSliceCols: {
        const Mat& x = nodes_[n.a].value;
        Mat dx = Mat::Zero(x.rows(), x.cols());
        dx.middleCols(n.idx[0], n.idx[1]) = g;
        acc(n.a, dx);
        break;
      }
      case Op::kStopGrad:
        break;
      case Op::kFlowInvert: {
        const Mat& target = nodes_[n.a].value;
        const Mat& z0 = nodes_[n.b].value;
        const double alpha = std::exp(nodes_[n.c].value(0, 0));
        const double ey = std::exp(nodes_[n.d].value(0, 0));
        const double beta = ey - alpha;
        Mat d_target(target.rows(), target.cols());
        Eigen::RowVectorXd d_z0 = Eigen::RowVectorXd::Zero(target.cols());
        double d_x = 0.0, d_y = 0.0;
        for (Eigen::Index i = 0; i < target.rows(); ++i) {
          const Eigen::RowVectorXd up = target.row(i) - z0.row(0);
          const double big_r = up.norm();
          const Eigen::RowVectorXd u = n.value.row(i) - z0.row(0);
          const double r = u.norm();
          const double denom = alpha + r;
          const double c1 = 1.0 + beta / denom;
          const double factor1 = 1.0 + alpha * beta / (denom * denom);
          // v = J^{-1} g via Sherman-Morrison; kappa folds the 1/r of the
          // rank-one term into u' so the r -> 0 limit stays finite.
          Eigen::RowVectorXd v;
          double vu = 0.0;  // v . u
          if (big_r > 0.0) {
            const double kappa =
                -beta * r / (denom * denom * big_r * big_r);
            const double ug = up.dot(g.row(i));
            v = (g.row(i) - (kappa / factor1) * ug * up) / c1;
            vu = (r / big_r) * v.dot(up);
          } else {
            v = g.row(i) / c1;
          }
          d_target.row(i) = v;
          d_z0 += g.row(i) - v;
          d_x += alpha * (1.0 / denom + beta / (denom * denom)) * vu;
          d_y += -(ey / denom) * vu;
        }
        acc(n.a, d_target);
        acc(n.b, d_z0);
        acc(n.c, Mat::Constant(1, 1, d_x));
        acc(n.d, Mat::Constant(1, 1, d_y));
        break;
      }
    }
  }

  if (probe_adjoint && probe.id >= 0) {
    const Mat& v = nodes_[probe.id].value;
    *probe_adjoint =
        adj[probe.id].size() ? adj[probe.id] : Mat::Zero(v.rows(), v.cols());
  }
}

bool Tape::replay_matches() const {
  std::vector<Mat> values(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    values[i] = eval(nodes_[i], values);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Mat& a = nodes_[i].value;
    const Mat& b = values[i];
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) != 0)
      return false;
  }
  return true;
}

}  // namespace hsac

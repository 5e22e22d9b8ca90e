#include "hsac/divlab/target.hpp"

#include <cmath>
#include <vector>

#include "hsac/errors.hpp"

namespace hsac {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453;
}

void GaussianMixtureTarget::validate() const {
  const int k = components();
  if (k < 1) throw ConfigError("mixture: needs at least one component");
  if (means.rows() != k || stds.rows() != k || stds.cols() != means.cols())
    throw ConfigError("mixture: weights/means/stds shapes disagree");
  if (dim() < 1) throw ConfigError("mixture: dimension must be >= 1");
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    if (weights(i) <= 0.0) throw ConfigError("mixture: weights must be > 0");
    total += weights(i);
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("mixture: weights must sum to 1");
  if ((stds.array() <= 0.0).any())
    throw ConfigError("mixture: stds must be > 0");
}

Eigen::VectorXd GaussianMixtureTarget::log_density(
    const Eigen::MatrixXd& a) const {
  const int n = static_cast<int>(a.rows());
  const int k = components();
  const int d = dim();
  Eigen::MatrixXd comp(n, k);
  for (int i = 0; i < k; ++i) {
    const Eigen::ArrayXXd z =
        (a.rowwise() - means.row(i)).array().rowwise() / stds.row(i).array();
    comp.col(i) = -0.5 * z.square().rowwise().sum() +
                  (std::log(weights(i)) - stds.row(i).array().log().sum() -
                   0.5 * d * kLogTwoPi);
  }
  const Eigen::VectorXd mx = comp.rowwise().maxCoeff();
  return mx.array() +
         (comp.colwise() - mx).array().exp().rowwise().sum().log();
}

double GaussianMixtureTarget::log_density(const Eigen::RowVectorXd& a) const {
  return log_density(Eigen::MatrixXd(a))(0);
}

Eigen::MatrixXd GaussianMixtureTarget::sample(int n, Rng& rng) const {
  if (n < 1) throw ConfigError("mixture: sample count must be >= 1");
  Eigen::MatrixXd out(n, dim());
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    int k = 0;
    double acc = weights(0);
    while (u >= acc && k + 1 < components()) acc += weights(++k);
    out.row(i) = (means.row(k).array() +
                  stds.row(k).array() *
                      rng.normal_vector(dim()).transpose().array())
                     .matrix();
  }
  return out;
}

double GaussianMixtureTarget::log_partition(double alpha) const {
  if (alpha <= 0.0) throw ConfigError("mixture: temperature must be > 0");
  const int d = dim();
  if (d > 2)
    throw ConfigError("mixture: tempered quadrature supports d <= 2 only");
  // Component k tempered alone has std sigma*sqrt(alpha); pad the box by
  // eight of the widest such std so the truncated tail is ~1e-14. The step is
  // a tenth of the narrowest effective std, where trapezoid quadrature on a
  // smooth decaying integrand is accurate far beyond the 1e-6 contract.
  const double widen = std::sqrt(std::max(alpha, 1.0));
  const double narrow = std::sqrt(std::min(alpha, 1.0));
  const double step = stds.minCoeff() * narrow / 10.0;
  std::vector<Eigen::VectorXd> axes(d);
  for (int j = 0; j < d; ++j) {
    const double pad = 8.0 * stds.col(j).maxCoeff() * widen;
    const double lo = means.col(j).minCoeff() - pad;
    const double hi = means.col(j).maxCoeff() + pad;
    const int m = static_cast<int>(std::ceil((hi - lo) / step)) + 1;
    axes[j] = Eigen::VectorXd::LinSpaced(m, lo, hi);
  }
  const auto trapezoid_weight = [](const Eigen::VectorXd& ax, int i) {
    const double h = ax(1) - ax(0);
    return (i == 0 || i + 1 == ax.size()) ? 0.5 * h : h;
  };
  // Accumulate exp((log pi)/alpha - shift) to keep the sums in range.
  const double shift =
      log_density(Eigen::RowVectorXd(means.row(0))) / alpha;
  double total = 0.0;
  if (d == 1) {
    Eigen::MatrixXd pts(axes[0].size(), 1);
    pts.col(0) = axes[0];
    const Eigen::VectorXd ld = log_density(pts);
    for (int i = 0; i < axes[0].size(); ++i)
      total += trapezoid_weight(axes[0], i) *
               std::exp(ld(i) / alpha - shift);
  } else {
    const int m1 = static_cast<int>(axes[1].size());
    Eigen::MatrixXd pts(m1, 2);
    for (int i = 0; i < axes[0].size(); ++i) {
      pts.col(0).setConstant(axes[0](i));
      pts.col(1) = axes[1];
      const Eigen::VectorXd ld = log_density(pts);
      double row = 0.0;
      for (int j = 0; j < m1; ++j)
        row += trapezoid_weight(axes[1], j) *
               std::exp(ld(j) / alpha - shift);
      total += trapezoid_weight(axes[0], i) * row;
    }
  }
  return std::log(total) + shift;
}

GaussianMixtureTarget GaussianMixtureTarget::default_two_mode() {
  GaussianMixtureTarget t;
  t.weights = Eigen::Vector2d(0.5, 0.5);
  t.means.resize(2, 2);
  t.means << -2.0, -2.0, 2.0, 2.0;
  t.stds = Eigen::MatrixXd::Constant(2, 2, 0.5);
  return t;
}

NodeRef mixture_log_density_tape(Tape& t, const GaussianMixtureTarget& target,
                                 NodeRef a) {
  target.validate();
  const int d = target.dim();
  NodeRef cols{-1};
  for (int i = 0; i < target.components(); ++i) {
    const double c = std::log(target.weights(i)) -
                     target.stds.row(i).array().log().sum() -
                     0.5 * d * kLogTwoPi;
    NodeRef z = t.div(t.sub(a, t.constant(target.means.row(i))),
                      t.constant(target.stds.row(i)));
    NodeRef col =
        t.add_const(t.scale(t.sum_rows(t.square(z)), -0.5), c);
    cols = i == 0 ? col : t.concat_cols(cols, col);
  }
  return t.row_logsumexp(cols);
}

}  // namespace hsac

#pragma once

#include <Eigen/Core>

#include "hsac/rng.hpp"
#include "hsac/tape.hpp"

namespace hsac {

// Diagonal-Gaussian mixture with an exact log-density, used as the fixed
// target of the distribution-matching lab.
struct GaussianMixtureTarget {
  Eigen::VectorXd weights;  // K, positive, summing to one
  Eigen::MatrixXd means;    // K x d
  Eigen::MatrixXd stds;     // K x d, per-component diagonal std

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }
  void validate() const;  // throws ConfigError

  double log_density(const Eigen::RowVectorXd& a) const;
  Eigen::VectorXd log_density(const Eigen::MatrixXd& a) const;  // per row

  // Exact component sampling: one uniform for the component, d normals for
  // the offset, in that order for every draw.
  Eigen::MatrixXd sample(int n, Rng& rng) const;

  // log of the normalization constant of the tempered density
  // exp(log_density / alpha), by trapezoid quadrature on a grid wide enough
  // that truncation is negligible. Only 1- and 2-dim targets are supported.
  double log_partition(double alpha) const;

  // Two well-separated modes: equal weights, means (-2,-2) and (2,2),
  // isotropic std 0.5.
  static GaussianMixtureTarget default_two_mode();
};

// Taped mixture log-density of a (n x d), differentiable in a so the
// reparameterized objectives can push gradients through the sample.
NodeRef mixture_log_density_tape(Tape& t, const GaussianMixtureTarget& target,
                                 NodeRef a);

}  // namespace hsac

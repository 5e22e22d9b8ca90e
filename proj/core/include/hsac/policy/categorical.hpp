#pragma once

#include <Eigen/Core>

#include "hsac/rng.hpp"

namespace hsac {

struct CategoricalHead {
  Eigen::RowVectorXd logits;

  int size() const { return static_cast<int>(logits.size()); }
  Eigen::RowVectorXd log_probs() const;
  Eigen::RowVectorXd probs() const;
  double entropy() const;  // exact -sum p log p
  int sample(Rng& rng) const;
  int argmax() const;
};

}  // namespace hsac

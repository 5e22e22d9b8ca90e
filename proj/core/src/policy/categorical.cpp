#include "hsac/policy/categorical.hpp"

#include <cmath>

#include "hsac/errors.hpp"

namespace hsac {

Eigen::RowVectorXd CategoricalHead::log_probs() const {
  if (logits.size() == 0) throw ContractError("categorical: empty logits");
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

Eigen::RowVectorXd CategoricalHead::probs() const {
  return log_probs().array().exp();
}

double CategoricalHead::entropy() const {
  const Eigen::RowVectorXd lp = log_probs();
  double h = 0.0;
  for (double l : lp) {
    const double p = std::exp(l);
    if (p > 0.0) h -= p * l;
  }
  return h;
}

int CategoricalHead::sample(Rng& rng) const {
  const Eigen::RowVectorXd p = probs();
  const double u = rng.uniform();
  double acc = 0.0;
  for (int k = 0; k < p.size(); ++k) {
    acc += p(k);
    if (u < acc) return k;
  }
  return static_cast<int>(p.size()) - 1;
}

int CategoricalHead::argmax() const {
  Eigen::Index k = 0;
  logits.maxCoeff(&k);
  return static_cast<int>(k);
}

}  // namespace hsac

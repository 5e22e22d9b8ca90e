#pragma once

#include <cmath>
#include <functional>
#include <string>

#include <hsac/params.hpp>

namespace hsac::testing {

// Central finite differences of a scalar loss over every entry of a
// ParameterSet. The loss must rebuild its computation from the set each call.
inline ParameterSet fd_grads(const ParameterSet& params,
                             const std::function<double(const ParameterSet&)>& loss,
                             double h = 1e-5) {
  ParameterSet work = params;
  ParameterSet grads = ParameterSet::zeros_like(params);
  for (const auto& e : params.entries()) {
    for (Eigen::Index i = 0; i < e.data.size(); ++i) {
      const double saved = work.data(e.name)(i);
      work.data(e.name)(i) = saved + h;
      const double up = loss(work);
      work.data(e.name)(i) = saved - h;
      const double down = loss(work);
      work.data(e.name)(i) = saved;
      grads.data(e.name)(i) = (up - down) / (2.0 * h);
    }
  }
  return grads;
}

// Max relative error < rel, with an absolute floor for entries near zero.
inline double grad_discrepancy(const ParameterSet& a, const ParameterSet& b,
                               double abs_floor = 1e-6) {
  double worst = 0.0;
  for (const auto& e : a.entries()) {
    const auto& other = b.data(e.name);
    for (Eigen::Index i = 0; i < e.data.size(); ++i) {
      const double denom =
          std::max({std::abs(e.data(i)), std::abs(other(i)), abs_floor});
      worst = std::max(worst, std::abs(e.data(i) - other(i)) / denom);
    }
  }
  return worst;
}

}  // namespace hsac::testing

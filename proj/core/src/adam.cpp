#include "hsac/adam.hpp"

#include <cmath>

#include "hsac/errors.hpp"

namespace hsac {

AdamState::AdamState(const ParameterSet& params,
                     std::vector<std::string> names, AdamConfig cfg)
    : cfg_(cfg), names_(std::move(names)) {
  for (const auto& name : names_) {
    const auto& e = params.entry(name);
    moments_[name] = Moments{Eigen::VectorXd::Zero(e.data.size()),
                             Eigen::VectorXd::Zero(e.data.size())};
  }
}

void AdamState::step(ParameterSet& params, const ParameterSet& grads) {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, double(step_count_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, double(step_count_));
  for (const auto& name : names_) {
    const Eigen::VectorXd& g = grads.data(name);
    if (!g.allFinite())
      throw TrainingError("non-finite gradient for " + name);
    auto& mom = moments_.at(name);
    mom.m = cfg_.beta1 * mom.m + (1.0 - cfg_.beta1) * g;
    mom.v = cfg_.beta2 * mom.v.array() +
            (1.0 - cfg_.beta2) * g.array().square();
    const Eigen::ArrayXd m_hat = mom.m.array() / bc1;
    const Eigen::ArrayXd v_hat = mom.v.array() / bc2;
    params.data(name).array() -=
        cfg_.learning_rate * m_hat / (v_hat.sqrt() + cfg_.epsilon);
  }
}

void AdamState::pack(ParameterSet& out, const std::string& prefix) const {
  out.add(prefix + ".t", {1},
          Eigen::VectorXd::Constant(1, double(step_count_)));
  for (const auto& name : names_) {
    const auto& mom = moments_.at(name);
    out.add(prefix + ".m." + name,
            {static_cast<int>(mom.m.size())}, mom.m);
    out.add(prefix + ".v." + name,
            {static_cast<int>(mom.v.size())}, mom.v);
  }
}

void AdamState::unpack(const ParameterSet& in, const std::string& prefix) {
  step_count_ = static_cast<std::int64_t>(in.data(prefix + ".t")(0));
  for (const auto& name : names_) {
    auto& mom = moments_.at(name);
    mom.m = in.data(prefix + ".m." + name);
    mom.v = in.data(prefix + ".v." + name);
  }
}

}  // namespace hsac

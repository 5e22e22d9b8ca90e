#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "hsac/params.hpp"

namespace hsac {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction over a named subset of a ParameterSet.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParameterSet& params, std::vector<std::string> names,
            AdamConfig cfg);

  // One update in place. Gradients must be congruent with `params`; a
  // non-finite gradient in the tracked subset raises TrainingError.
  void step(ParameterSet& params, const ParameterSet& grads);

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<std::string>& names() const { return names_; }
  void set_learning_rate(double lr) { cfg_.learning_rate = lr; }

  // Moments and step counter as named arrays for checkpointing.
  void pack(ParameterSet& out, const std::string& prefix) const;
  void unpack(const ParameterSet& in, const std::string& prefix);

 private:
  struct Moments {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
  };
  AdamConfig cfg_;
  std::int64_t step_count_ = 0;
  std::vector<std::string> names_;
  std::unordered_map<std::string, Moments> moments_;
};

}  // namespace hsac

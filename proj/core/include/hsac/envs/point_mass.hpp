#pragma once

#include "hsac/envs/env.hpp"

namespace hsac {

// Double integrator on the plane with two independent 1-dim accel actions.
// Reward is the negative distance to the goal each step.
class PointMassEnv final : public Env {
 public:
  static constexpr double kDt = 0.1;
  static constexpr double kVelMax = 1.0;
  static constexpr double kPosMax = 2.0;

  struct Options {
    Eigen::Vector2d start = Eigen::Vector2d(-0.5, -0.5);
    Eigen::Vector2d goal = Eigen::Vector2d(0.5, 0.5);
  };

  PointMassEnv();
  explicit PointMassEnv(Options opt);
  const EnvSpec& spec() const override { return spec_; }
  Eigen::RowVectorXd reset(std::uint64_t seed) override;
  StepResult step(const HybridAction& action) override;

 private:
  Eigen::RowVectorXd observe() const;

  EnvSpec spec_;
  Options opt_;
  Eigen::Vector2d pos_, vel_;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace hsac

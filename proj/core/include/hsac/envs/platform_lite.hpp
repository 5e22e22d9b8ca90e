#pragma once

#include "hsac/envs/env.hpp"

namespace hsac {

// One-dimensional platformer over the unit track with two gaps. Three
// discrete moves, each parameterized by u in [0, 1]:
//   run  advances 0.05 u
//   hop  advances 0.08 + 0.06 u
//   leap advances 0.12 + 0.10 u
// Landing strictly inside a gap ends the episode with zero step reward;
// otherwise the step reward is the distance gained. Reaching 1.0 ends the
// episode, so returns never exceed 1.0.
class PlatformLiteEnv final : public Env {
 public:
  static constexpr double kGap1Start = 0.30, kGap1End = 0.38;
  static constexpr double kGap2Start = 0.62, kGap2End = 0.72;
  static constexpr int kRun = 0, kHop = 1, kLeap = 2;

  PlatformLiteEnv();
  const EnvSpec& spec() const override { return spec_; }
  Eigen::RowVectorXd reset(std::uint64_t seed) override;
  StepResult step(const HybridAction& action) override;

  double position() const { return p_; }

 private:
  Eigen::RowVectorXd observe() const;

  EnvSpec spec_;
  double p_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace hsac

#pragma once

#include "hsac/envs/env.hpp"

namespace hsac {

// 5x5 grid, four moves, -1 per step and +10 on reaching (4,4). Off-grid
// moves keep the agent in place. Best return from (0,0) is 8 moves: +2.
class GridWorldEnv final : public Env {
 public:
  static constexpr int kSize = 5;
  static constexpr int kRight = 0, kLeft = 1, kUp = 2, kDown = 3;

  GridWorldEnv();
  const EnvSpec& spec() const override { return spec_; }
  Eigen::RowVectorXd reset(std::uint64_t seed) override;
  StepResult step(const HybridAction& action) override;

 private:
  Eigen::RowVectorXd observe() const;

  EnvSpec spec_;
  int x_ = 0, y_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace hsac

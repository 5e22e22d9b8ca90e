#include "hsac/envs/grid_world.hpp"

#include "hsac/errors.hpp"

namespace hsac {

GridWorldEnv::GridWorldEnv() {
  spec_.observation_dim = kSize * kSize;
  spec_.action_spec.discrete = {4};
  spec_.action_spec.binding = ContinuousBinding::kIndependent;
  spec_.max_episode_steps = 50;
  spec_.reward_min = -1.0;
  spec_.reward_max = 9.0;  // arrival step: -1 + 10
}

Eigen::RowVectorXd GridWorldEnv::reset(std::uint64_t) {
  x_ = 0;
  y_ = 0;
  steps_ = 0;
  done_ = false;
  return observe();
}

Eigen::RowVectorXd GridWorldEnv::observe() const {
  Eigen::RowVectorXd obs = Eigen::RowVectorXd::Zero(kSize * kSize);
  obs(y_ * kSize + x_) = 1.0;
  return obs;
}

StepResult GridWorldEnv::step(const HybridAction& action) {
  if (done_) throw ContractError("grid_world: step after episode end");
  if (action.discrete.size() != 1 || !action.continuous.empty())
    throw ContractError("grid_world: one discrete move expected");
  switch (action.discrete[0]) {
    case kRight: if (x_ + 1 < kSize) ++x_; break;
    case kLeft: if (x_ > 0) --x_; break;
    case kUp: if (y_ + 1 < kSize) ++y_; break;
    case kDown: if (y_ > 0) --y_; break;
    default: throw ContractError("grid_world: unknown move");
  }
  ++steps_;
  StepResult out;
  const bool at_goal = x_ == kSize - 1 && y_ == kSize - 1;
  out.reward = at_goal ? 9.0 : -1.0;
  done_ = at_goal || steps_ >= spec_.max_episode_steps;
  out.done = done_;
  out.observation = observe();
  return out;
}

}  // namespace hsac

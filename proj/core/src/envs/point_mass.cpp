#include "hsac/envs/point_mass.hpp"

#include <algorithm>

#include "hsac/errors.hpp"

namespace hsac {

PointMassEnv::PointMassEnv() : PointMassEnv(Options{}) {}

PointMassEnv::PointMassEnv(Options opt) : opt_(opt) {
  spec_.observation_dim = 4;  // position, velocity
  spec_.action_spec.continuous = {1, 1};
  spec_.action_spec.binding = ContinuousBinding::kIndependent;
  for (int i = 0; i < 2; ++i) {
    spec_.action_low.push_back(Eigen::RowVectorXd::Constant(1, -1.0));
    spec_.action_high.push_back(Eigen::RowVectorXd::Constant(1, 1.0));
  }
  spec_.max_episode_steps = 100;
  spec_.reward_min = -4.0;  // farthest clamped corner from any goal
  spec_.reward_max = 0.0;
}

Eigen::RowVectorXd PointMassEnv::reset(std::uint64_t) {
  pos_ = opt_.start;
  vel_.setZero();
  steps_ = 0;
  done_ = false;
  return observe();
}

Eigen::RowVectorXd PointMassEnv::observe() const {
  Eigen::RowVectorXd obs(4);
  obs << pos_.x(), pos_.y(), vel_.x(), vel_.y();
  return obs;
}

StepResult PointMassEnv::step(const HybridAction& action) {
  if (done_) throw ContractError("point_mass: step after episode end");
  if (!action.discrete.empty() || action.continuous.size() != 2)
    throw ContractError("point_mass: two accel components expected");
  Eigen::Vector2d a(std::clamp(action.continuous[0](0), -1.0, 1.0),
                    std::clamp(action.continuous[1](0), -1.0, 1.0));
  vel_ += a * kDt;
  vel_ = vel_.cwiseMax(-kVelMax).cwiseMin(kVelMax);
  pos_ += vel_ * kDt;
  pos_ = pos_.cwiseMax(-kPosMax).cwiseMin(kPosMax);
  ++steps_;
  StepResult out;
  out.reward = -(pos_ - opt_.goal).norm();
  done_ = steps_ >= spec_.max_episode_steps;
  out.done = done_;
  out.observation = observe();
  return out;
}

}  // namespace hsac

#include "hsac/envs/platform_lite.hpp"

#include <algorithm>

#include "hsac/errors.hpp"

namespace hsac {

PlatformLiteEnv::PlatformLiteEnv() {
  spec_.observation_dim = 4;  // position, distance to next gap, gap one-hot
  spec_.action_spec.discrete = {3};
  spec_.action_spec.continuous = {1, 1, 1};
  spec_.action_spec.binding = ContinuousBinding::kPerDiscreteAction;
  for (int i = 0; i < 3; ++i) {
    spec_.action_low.push_back(Eigen::RowVectorXd::Zero(1));
    spec_.action_high.push_back(Eigen::RowVectorXd::Ones(1));
  }
  spec_.max_episode_steps = 200;
  spec_.reward_min = 0.0;
  spec_.reward_max = 0.22;  // longest leap
}

Eigen::RowVectorXd PlatformLiteEnv::reset(std::uint64_t) {
  p_ = 0.0;
  steps_ = 0;
  done_ = false;
  return observe();
}

Eigen::RowVectorXd PlatformLiteEnv::observe() const {
  Eigen::RowVectorXd obs(4);
  double next_gap = 0.0;
  double gap1 = 0.0, gap2 = 0.0;
  if (p_ < kGap1End) {
    next_gap = kGap1Start - p_;
    gap1 = 1.0;
  } else if (p_ < kGap2End) {
    next_gap = kGap2Start - p_;
    gap2 = 1.0;
  } else {
    next_gap = 1.0 - p_;
  }
  obs << p_, next_gap, gap1, gap2;
  return obs;
}

StepResult PlatformLiteEnv::step(const HybridAction& action) {
  if (done_) throw ContractError("platform_lite: step after episode end");
  if (action.discrete.size() != 1 || action.continuous.size() != 1)
    throw ContractError("platform_lite: one move and one parameter expected");
  const int move = action.discrete[0];
  if (move < 0 || move > 2)
    throw ContractError("platform_lite: unknown move");

  StepResult out;
  double u = action.continuous[0](0);
  if (u < 0.0 || u > 1.0) {
    u = std::clamp(u, 0.0, 1.0);
    out.info["param_clamped"] = 1.0;
  }

  double advance = 0.0;
  switch (move) {
    case kRun: advance = 0.05 * u; break;
    case kHop: advance = 0.08 + 0.06 * u; break;
    default: advance = 0.12 + 0.10 * u; break;
  }

  const double landing = std::min(p_ + advance, 1.0);
  const bool fell =
      (landing > kGap1Start && landing < kGap1End) ||
      (landing > kGap2Start && landing < kGap2End);
  ++steps_;
  if (fell) {
    out.reward = 0.0;
    done_ = true;
    out.info["fell"] = 1.0;
  } else {
    out.reward = landing - p_;
    p_ = landing;
    done_ = p_ >= 1.0 || steps_ >= spec_.max_episode_steps;
  }
  out.done = done_;
  out.observation = observe();
  return out;
}

}  // namespace hsac

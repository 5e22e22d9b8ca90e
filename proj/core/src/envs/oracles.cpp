#include "hsac/envs/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hsac/envs/drive_path.hpp"
#include "hsac/envs/grid_world.hpp"
#include "hsac/envs/platform_lite.hpp"
#include "hsac/envs/point_mass.hpp"
#include "hsac/errors.hpp"

namespace hsac {

namespace {

Eigen::RowVectorXd scalar_action(double v) {
  return Eigen::RowVectorXd::Constant(1, v);
}

double platform_script() {
  PlatformLiteEnv env;
  env.reset(0);
  double ret = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double p = env.position();
    HybridAction a;
    if (p >= 0.24 && p <= PlatformLiteEnv::kGap1Start) {
      a.discrete = {PlatformLiteEnv::kHop};
    } else if (p >= 0.50 && p <= PlatformLiteEnv::kGap2Start) {
      a.discrete = {PlatformLiteEnv::kLeap};
    } else {
      a.discrete = {PlatformLiteEnv::kRun};
    }
    a.continuous = {scalar_action(1.0)};
    StepResult r = env.step(a);
    ret += r.reward;
    if (r.done) break;
  }
  return ret;
}

double grid_script() {
  GridWorldEnv env;
  env.reset(0);
  double ret = 0.0;
  for (int i = 0; i < 8; ++i) {
    HybridAction a;
    a.discrete = {i < 4 ? GridWorldEnv::kRight : GridWorldEnv::kUp};
    StepResult r = env.step(a);
    ret += r.reward;
    if (r.done) break;
  }
  return ret;
}

double point_mass_script() {
  PointMassEnv env;
  Eigen::RowVectorXd obs = env.reset(0);
  const Eigen::Vector2d goal(0.5, 0.5);
  double ret = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d pos(obs(0), obs(1));
    const Eigen::Vector2d vel(obs(2), obs(3));
    const Eigen::Vector2d accel = 3.0 * (goal - pos) - 2.5 * vel;
    HybridAction a;
    a.continuous = {scalar_action(std::clamp(accel.x(), -1.0, 1.0)),
                    scalar_action(std::clamp(accel.y(), -1.0, 1.0))};
    StepResult r = env.step(a);
    ret += r.reward;
    obs = r.observation;
    if (r.done) break;
  }
  return ret;
}

}  // namespace

// Pure pursuit with braking at corners: aim at a lookahead point on the
// path, cruise on the straights, and shed speed into each corner — with the
// hand brake when allowed, otherwise by plain deceleration. The no-brake
// variant runs the identical controller with the brake bit held at zero.
double drive_path_scripted_return(bool use_brake) {
  DrivePathEnv env;
  env.reset(0);
  double ret = 0.0;
  constexpr double kLookahead = 0.8;
  constexpr double kCruise = 3.5;
  constexpr double kCornerSpeed = 0.8;
  constexpr double kSlowDist = 2.5;
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector2d pos = env.position();
    const double speed = env.speed();
    const DrivePathEnv::PathPoint at = env.locate(pos.x(), pos.y());
    const Eigen::Vector2d target = env.point_at(at.arclength + kLookahead);

    double aim = std::atan2(target.y() - pos.y(), target.x() - pos.x()) -
                 env.heading();
    while (aim > std::numbers::pi) aim -= 2.0 * std::numbers::pi;
    while (aim <= -std::numbers::pi) aim += 2.0 * std::numbers::pi;

    const bool turning = std::abs(aim) > 0.35;
    const bool slow_zone = at.turn_dir != 0.0 && at.corner_dist < kSlowDist;

    int brake = 0;
    double accel;
    if (turning) {
      brake = use_brake && speed > 0.45 ? 1 : 0;
      accel = speed > 1.0 ? -1.0 : (speed < 0.6 ? 1.0 : 0.0);
    } else if (slow_zone) {
      brake = use_brake && speed > 2.0 * kCornerSpeed ? 1 : 0;
      accel = speed > kCornerSpeed ? -1.0 : (speed < 0.6 ? 1.0 : 0.0);
    } else {
      accel = speed < kCruise ? 1.0 : 0.0;
    }

    const double yaw_authority =
        DrivePathEnv::kYawRate * (brake ? DrivePathEnv::kBrakeYawMult : 1.0);
    const double steer =
        std::clamp(aim / (yaw_authority * DrivePathEnv::kDt), -1.0, 1.0);

    HybridAction a;
    a.discrete = {brake};
    a.continuous = {scalar_action(accel), scalar_action(steer)};
    StepResult r = env.step(a);
    ret += r.reward;
    if (r.done) break;
  }
  return ret;
}

double oracle_return(const std::string& env_name) {
  if (env_name == "platform_lite") return platform_script();
  if (env_name == "grid_world") return grid_script();
  if (env_name == "point_mass") return point_mass_script();
  if (env_name == "drive_path") return drive_path_scripted_return(true);
  throw ConfigError("oracle_return: unknown environment " + env_name);
}

}  // namespace hsac

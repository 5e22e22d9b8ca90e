#include "hsac/envs/drive_path.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hsac/errors.hpp"

namespace hsac {

namespace {

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

DrivePathEnv::DrivePathEnv() {
  // long straight, left-right chicane, long straight: corners at s = 42
  // and 43.5. The legs are long enough that lapping inside the 500-step cap
  // requires holding cruise speed, which is what makes braking into the
  // chicane worth anything.
  waypoints_ = {{0.0, 0.0}, {42.0, 0.0}, {42.0, 1.5}, {85.0, 1.5}};
  cum_length_.push_back(0.0);
  for (std::size_t i = 1; i < waypoints_.size(); ++i)
    cum_length_.push_back(cum_length_.back() +
                          (waypoints_[i] - waypoints_[i - 1]).norm());
  total_length_ = cum_length_.back();

  spec_.observation_dim = 6;
  spec_.action_spec.discrete = {2};         // hand brake off / on
  spec_.action_spec.continuous = {1, 1};    // accel, steering
  spec_.action_spec.binding = ContinuousBinding::kIndependent;
  for (int i = 0; i < 2; ++i) {
    spec_.action_low.push_back(Eigen::RowVectorXd::Constant(1, -1.0));
    spec_.action_high.push_back(Eigen::RowVectorXd::Constant(1, 1.0));
  }
  spec_.max_episode_steps = 500;
  // progress is continuous except where the projection hops across a corner
  // bisector; the hop is bounded by the sum of the distances to both legs
  // (at most 1.0 before the step and 1.5 after) plus one step of travel
  spec_.reward_min = -4.0;
  spec_.reward_max = 3.0;
}

Eigen::RowVectorXd DrivePathEnv::reset(std::uint64_t) {
  x_ = 0.0;
  y_ = 0.0;
  heading_ = 0.0;
  v_ = 0.0;
  s_prev_ = 0.0;
  steps_ = 0;
  done_ = false;
  return observe(locate(x_, y_));
}

DrivePathEnv::PathPoint DrivePathEnv::locate(double x, double y) const {
  const Eigen::Vector2d p(x, y);
  PathPoint best{};
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    const Eigen::Vector2d a = waypoints_[i];
    const Eigen::Vector2d d = waypoints_[i + 1] - a;
    const double len = d.norm();
    const double t = std::clamp((p - a).dot(d) / (len * len), 0.0, 1.0);
    const Eigen::Vector2d proj = a + t * d;
    const double dist = (p - proj).norm();
    // ties go to the later segment so overshooting a corner reads as lateral
    // error against the upcoming leg instead of zero error along the old one
    if (dist <= best_dist + 1e-9) {
      best_dist = dist;
      const Eigen::Vector2d dir = d / len;
      const Eigen::Vector2d off = p - proj;
      const double cross = dir.x() * off.y() - dir.y() * off.x();
      best.arclength = cum_length_[i] + t * len;
      // full distance to the polyline, signed by side; the perpendicular
      // component alone would vanish for overshoot past a segment end
      best.crosstrack = cross >= 0.0 ? dist : -dist;
      best.path_heading = std::atan2(dir.y(), dir.x());
    }
  }
  // corners sit at the interior waypoints
  if (best.arclength < cum_length_[1]) {
    best.corner_dist = cum_length_[1] - best.arclength;
    best.turn_dir = 1.0;  // onto the +y leg: left
  } else if (best.arclength < cum_length_[2]) {
    best.corner_dist = cum_length_[2] - best.arclength;
    best.turn_dir = -1.0;  // back onto +x: right
  } else {
    best.corner_dist = total_length_ - best.arclength;
    best.turn_dir = 0.0;
  }
  return best;
}

Eigen::Vector2d DrivePathEnv::point_at(double arclength) const {
  const double s = std::clamp(arclength, 0.0, total_length_);
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    if (s <= cum_length_[i + 1] + 1e-12) {
      const double seg_len = cum_length_[i + 1] - cum_length_[i];
      const double t = (s - cum_length_[i]) / seg_len;
      return waypoints_[i] + t * (waypoints_[i + 1] - waypoints_[i]);
    }
  }
  return waypoints_.back();
}

Eigen::RowVectorXd DrivePathEnv::observe(const PathPoint& at) const {
  const double herr = wrap_angle(heading_ - at.path_heading);
  Eigen::RowVectorXd obs(6);
  obs << v_ / kSpeedMax, std::clamp(at.crosstrack, -1.0, 1.0),
      std::cos(herr), std::sin(herr), std::min(at.corner_dist, 3.0) / 3.0,
      at.turn_dir;
  return obs;
}

StepResult DrivePathEnv::step(const HybridAction& action) {
  if (done_) throw ContractError("drive_path: step after episode end");
  if (action.discrete.size() != 1 || action.continuous.size() != 2)
    throw ContractError("drive_path: brake bit plus accel and steering "
                        "expected");
  const bool brake = action.discrete[0] == 1;
  const double accel = std::clamp(action.continuous[0](0), -1.0, 1.0);
  const double steer = std::clamp(action.continuous[1](0), -1.0, 1.0);

  double yaw_mult = 1.0;
  if (brake) {
    v_ *= kBrakeFactor;
    yaw_mult = kBrakeYawMult;
  }
  heading_ = wrap_angle(heading_ + steer * kYawRate * yaw_mult * kDt);
  v_ = std::clamp(v_ + accel * kAccelMax * kDt, 0.0, kSpeedMax);
  x_ += v_ * std::cos(heading_) * kDt;
  y_ += v_ * std::sin(heading_) * kDt;

  const PathPoint at = locate(x_, y_);
  StepResult out;
  out.reward = (at.arclength - s_prev_) - 0.5 * std::abs(at.crosstrack);
  s_prev_ = at.arclength;
  ++steps_;

  const bool off_path = std::abs(at.crosstrack) > kOffPathLimit;
  const bool finished = at.arclength >= total_length_ - 1e-9;
  done_ = off_path || finished || steps_ >= spec_.max_episode_steps;
  out.done = done_;
  out.observation = observe(at);
  out.info["arclength"] = at.arclength;
  out.info["crosstrack"] = at.crosstrack;
  out.info["speed"] = v_;
  out.info["brake"] = brake ? 1.0 : 0.0;
  out.info["corner_dist"] = at.corner_dist;
  if (off_path) out.info["off_path"] = 1.0;
  if (finished) out.info["finished"] = 1.0;
  return out;
}

}  // namespace hsac

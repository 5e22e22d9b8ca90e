#pragma once

#include "hsac/envs/env.hpp"

namespace hsac {

// Kinematic car following a fixed polyline with two 90-degree corners.
// Continuous accel and steering in [-1, 1]; a binary hand brake multiplies
// speed by 0.6 and doubles yaw authority for the step it is held. Reward is
// path progress minus 0.5x the cross-track distance; drifting more than 1.0
// off the path ends the episode.
//
// The yaw rate is deliberately weak relative to plain deceleration: the
// corner only becomes visible in the observation 3.0 ahead, and shedding
// cruise speed with accel alone takes longer than that, so clean cornering
// hinges on the brake's speed cut and doubled steering authority.
class DrivePathEnv final : public Env {
 public:
  static constexpr double kDt = 0.1;
  static constexpr double kAccelMax = 2.0;
  static constexpr double kYawRate = 0.6;  // rad/s at full steering
  static constexpr double kBrakeFactor = 0.6;
  static constexpr double kBrakeYawMult = 2.0;
  static constexpr double kSpeedMax = 5.0;
  static constexpr double kOffPathLimit = 1.0;

  DrivePathEnv();
  const EnvSpec& spec() const override { return spec_; }
  Eigen::RowVectorXd reset(std::uint64_t seed) override;
  StepResult step(const HybridAction& action) override;

  struct PathPoint {
    double arclength;    // along-path position of the projection
    double crosstrack;   // signed, left of travel positive
    double path_heading;
    double corner_dist;  // along-path distance to the next corner (or end)
    double turn_dir;     // +1 left, -1 right, 0 none ahead
  };
  PathPoint locate(double x, double y) const;
  Eigen::Vector2d point_at(double arclength) const;
  Eigen::Vector2d position() const { return {x_, y_}; }
  double total_length() const { return total_length_; }
  double speed() const { return v_; }
  double heading() const { return heading_; }

 private:
  Eigen::RowVectorXd observe(const PathPoint& at) const;

  EnvSpec spec_;
  std::vector<Eigen::Vector2d> waypoints_;
  std::vector<double> cum_length_;
  double total_length_ = 0.0;
  double x_ = 0.0, y_ = 0.0, heading_ = 0.0, v_ = 0.0;
  double s_prev_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace hsac

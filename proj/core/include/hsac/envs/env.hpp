#pragma once

#include <map>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "hsac/policy/hybrid.hpp"

namespace hsac {

struct EnvSpec {
  int observation_dim = 0;
  HybridActionSpec action_spec;
  // native bounds per continuous component; policies act in (-1, 1) and are
  // rescaled by the caller
  std::vector<Eigen::RowVectorXd> action_low;
  std::vector<Eigen::RowVectorXd> action_high;
  int max_episode_steps = 0;
  double reward_min = 0.0;
  double reward_max = 0.0;
};

struct StepResult {
  Eigen::RowVectorXd observation;
  double reward = 0.0;
  bool done = false;
  std::map<std::string, double> info;
};

// Deterministic state machines: the same reset seed and action sequence
// reproduce the trajectory bitwise. Continuous action components arrive in
// the native bounds declared by the spec.
class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Eigen::RowVectorXd reset(std::uint64_t seed) = 0;
  virtual StepResult step(const HybridAction& action) = 0;
};

// Names: platform_lite, drive_path, point_mass, grid_world.
std::unique_ptr<Env> make_env(const std::string& name);

}  // namespace hsac

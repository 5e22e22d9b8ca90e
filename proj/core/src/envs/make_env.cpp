#include "hsac/envs/drive_path.hpp"
#include "hsac/envs/env.hpp"
#include "hsac/envs/grid_world.hpp"
#include "hsac/envs/platform_lite.hpp"
#include "hsac/envs/point_mass.hpp"
#include "hsac/errors.hpp"

namespace hsac {

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "platform_lite") return std::make_unique<PlatformLiteEnv>();
  if (name == "drive_path") return std::make_unique<DrivePathEnv>();
  if (name == "point_mass") return std::make_unique<PointMassEnv>();
  if (name == "grid_world") return std::make_unique<GridWorldEnv>();
  throw ConfigError("unknown environment: " + name);
}

}  // namespace hsac

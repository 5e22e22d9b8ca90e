#pragma once

#include <string>

namespace hsac {

// Scripted baseline returns used as acceptance denominators. Each policy is
// deterministic, so these are fixed values computed by rollout.
double oracle_return(const std::string& env_name);

// The drive controller with the hand brake disabled must do strictly worse;
// exposed separately so that claim can be checked directly.
double drive_path_scripted_return(bool use_brake);

}  // namespace hsac

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hsac {

struct GradCheckCase {
  int index = 0;
  std::string description;
  int entries = 0;          // parameter entries compared
  double max_abs_err = 0.0; // worst |analytic - central difference|
  double max_rel_err = 0.0; // worst error relative to the gradient scale
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckCase> cases;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  double seconds = 0.0;
  bool all_pass = false;
};

// Random-architecture gradient audit. Even cases build a full hybrid agent
// (trunk, categorical head, squashed Gaussian heads with radial flow stacks,
// twin critics) and differentiate a composite of entropy, sample log-density
// and critic value; odd cases build distribution-lab policies (squashed and
// unsquashed, with and without flows) and differentiate sampled plus
// supplied-point log-densities. Every parameter entry is compared against a
// central difference at h = 1e-6; an entry passes when
//   |g - fd| <= abs_tol + rel_tol * max(|g|, |fd|).
GradCheckReport run_gradient_suite(int num_cases = 50, std::uint64_t seed = 0,
                                   double rel_tol = 1e-4,
                                   double abs_tol = 1e-6);

// One line per case plus a verdict line, the format cmd_gradcheck prints.
std::string format_report(const GradCheckReport& report);

}  // namespace hsac

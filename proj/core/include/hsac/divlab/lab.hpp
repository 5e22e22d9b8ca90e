#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsac/divlab/target.hpp"
#include "hsac/rl/agent.hpp"

namespace hsac {

// Objectives for matching the policy to the tempered target. Forward KL is
// the mode-seeking direction used by the actor update; reverse KL is the
// mass-covering distillation direction; linear_switch interpolates from
// forward to reverse over the course of a fit.
enum class ObjectiveKind {
  kForwardKl,
  kReverseKl,
  kJensenShannon,
  kLinearSwitch,
};

std::string objective_name(ObjectiveKind kind);
ObjectiveKind objective_from_name(const std::string& name);

// One matching run: a policy conditioned on a fixed state is trained for
// `steps` optimizer steps to match the target raised to 1/alpha. Defaults are
// sized for a single desktop core; the full-scale variant uses hidden
// {256, 256} and batch 1024.
struct MatchConfig {
  int steps = 10000;
  double alpha = 1.0;
  ObjectiveKind objective = ObjectiveKind::kForwardKl;
  int flows = 0;  // 0 = plain Gaussian, 3 = the enriched policy
  int batch = 128;
  std::vector<int> hidden = {32, 32};
  Activation activation = Activation::kRelu;
  double lr = 3e-4;
  bool squashed = false;  // keep unsquashed so the target's support is free
  Eigen::RowVectorXd state;  // conditioning input; empty -> default_lab_state()
  std::uint64_t seed = 0;

  void validate() const;
};

// The fixed conditioning state: 8 standard-normal draws from a constant seed.
Eigen::RowVectorXd default_lab_state();

// A lab policy is the agent's actor with a single continuous slot and no
// discrete head, plus the fixed state it is conditioned on. `squashed`
// controls whether samples pass through tanh; when they do, densities carry
// the change-of-variables correction so they are true action densities.
struct LabPolicy {
  AgentConfig arch;
  bool squashed = false;
  Eigen::RowVectorXd state;
  ParameterSet params;
};

LabPolicy make_lab_policy(const MatchConfig& cfg,
                          const GaussianMixtureTarget& target);

// Taped heads for the one conditioning state (mu/log_std are 1 x d).
ActorNodes lab_forward(Tape& t, const LabPolicy& policy);

// n reparameterized draws and their exact log-density (flow log-dets and,
// when squashed, the tanh term included).
struct LabSampleNodes {
  NodeRef a;     // n x d
  NodeRef logp;  // n x 1
};
LabSampleNodes lab_sample_tape(Tape& t, const LabPolicy& policy,
                               const ActorNodes& actor, int n, Rng& rng);

// Exact log-density of externally supplied actions, via flow inversion.
NodeRef lab_log_prob_tape(Tape& t, const LabPolicy& policy,
                          const ActorNodes& actor,
                          const Eigen::MatrixXd& points);

// Value-level draws from the same distribution (no tape).
Eigen::MatrixXd lab_sample(const LabPolicy& policy, int n, Rng& rng);

// One Monte-Carlo estimate of the objective as a differentiable tape node.
// Draw order from `rng` is fixed: reparameterization noise first (forward
// side), then target samples (reverse / JS side); linear_switch evaluates the
// forward part before the reverse part. `ess` is the effective sample size of
// the target-side importance weights (= batch when sampling is exact, i.e.
// alpha = 1). `switch_lambda` only applies to kLinearSwitch.
struct ObjectiveNodes {
  NodeRef loss;
  double ess = 0.0;
};
ObjectiveNodes estimate_objective_tape(Tape& t, const LabPolicy& policy,
                                       const ActorNodes& actor,
                                       const GaussianMixtureTarget& target,
                                       ObjectiveKind kind, double alpha,
                                       int batch, Rng& rng,
                                       double switch_lambda = 0.0);

// Convenience scalar estimate; throws DivergenceError when non-finite.
double estimate_objective(const LabPolicy& policy,
                          const GaussianMixtureTarget& target,
                          ObjectiveKind kind, double alpha, int batch,
                          Rng& rng);

// Runs `steps` Adam updates of the configured objective. Throws
// DivergenceError with the failing step in the message if the loss leaves
// the reals. Same config and seed give bitwise-identical traces.
struct FitResult {
  LabPolicy policy;
  std::vector<double> losses;
  std::vector<double> ess;
};
FitResult fit(LabPolicy policy, const GaussianMixtureTarget& target,
              const MatchConfig& cfg);
// make_lab_policy + fit in one call.
FitResult run_match(const MatchConfig& cfg,
                    const GaussianMixtureTarget& target);

// Fraction of samples nearest each target mean.
Eigen::VectorXd mode_mass_from_samples(const Eigen::MatrixXd& samples,
                                       const GaussianMixtureTarget& target);
Eigen::VectorXd mode_mass(const LabPolicy& policy,
                          const GaussianMixtureTarget& target, int n,
                          Rng& rng);

// Gaussian-product kernel density estimate on grid rows, bandwidth per
// dimension n^(-1/(d+4)) * sample std, floored at 1e-3.
Eigen::VectorXd kde_density(const Eigen::MatrixXd& samples,
                            const Eigen::MatrixXd& grid);

// Square grid over [lo, hi]^2 in row-major order (first axis outer).
Eigen::MatrixXd grid_2d(double lo, double hi, int per_axis);

// Full sweep: for each alpha, objective in {forward, reverse} and flow count
// in {0, 3}, fit a fresh policy and measure its mode masses. A cell whose fit
// diverges is recorded as failed and the sweep continues.
struct SweepCell {
  ObjectiveKind objective = ObjectiveKind::kForwardKl;
  int flows = 0;
  double alpha = 1.0;
  bool failed = false;
  std::string error;
  Eigen::VectorXd masses;  // empty when failed
  LabPolicy policy;
};
std::vector<SweepCell> temperature_sweep(const MatchConfig& base,
                                         const std::vector<double>& alphas,
                                         const GaussianMixtureTarget& target,
                                         int mass_samples = 4096);

}  // namespace hsac

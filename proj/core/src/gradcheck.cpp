#include "hsac/gradcheck.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include "hsac/divlab/lab.hpp"
#include "hsac/mlp.hpp"
#include "hsac/rl/agent.hpp"
#include "hsac/rng.hpp"
#include "hsac/tape.hpp"

namespace hsac {
namespace {

// A case is a scalar loss over its parameter set. Both entry points rebuild
// the graph from scratch and reseed their own noise, so repeated evaluations
// are bitwise identical — exactly what central differences need.
struct BuiltCase {
  ParameterSet params;
  std::function<double(const ParameterSet&)> value;
  std::function<void(const ParameterSet&, ParameterSet*)> gradient;
  std::string description;
};

double agent_composite(const ParameterSet& ps, const AgentConfig& cfg,
                       const Eigen::MatrixXd& states,
                       std::uint64_t noise_seed, ParameterSet* grads) {
  Tape t(&ps);
  const int n = static_cast<int>(states.rows());
  const NodeRef s = t.constant(states);
  const ActorNodes actor = actor_forward(t, cfg, s);
  Rng noise(noise_seed);
  const SampledSlots slots = sample_slots_tape(t, cfg, actor, n, noise);

  // negative discrete entropy + continuous sample log-densities + critic
  // minimum on the sampled action: touches every head and both critics
  NodeRef loss = t.mean_all(t.sum_rows(t.mul(actor.pi_d, actor.log_pi_d)));
  for (int j = 0; j < cfg.slots(); ++j)
    loss = t.add(loss, t.mean_all(slots.logp[j]));
  const NodeRef input =
      cfg.slots() > 0 ? t.concat_cols(s, slots.a_all) : s;
  const MlpConfig ccfg = cfg.critic_config();
  const NodeRef qmin = t.minimum(mlp_apply(t, ccfg, "q1", input),
                                 mlp_apply(t, ccfg, "q2", input));
  loss = t.add(loss, t.mean_all(qmin));
  if (grads) t.backward(loss, Eigen::MatrixXd::Ones(1, 1), grads);
  return t.scalar_value(loss);
}

BuiltCase build_agent_case(std::uint64_t case_seed) {
  Rng rng(stream_seed(case_seed, fnv1a64("arch"), 0));
  AgentConfig cfg;
  const bool discrete = rng.uniform() < 0.75;
  if (discrete) cfg.action_spec.discrete = {2 + rng.uniform_int(3)};
  if (discrete && rng.uniform() < 0.5) {
    cfg.action_spec.binding = ContinuousBinding::kPerDiscreteAction;
    for (int k = 0; k < cfg.action_spec.discrete[0]; ++k)
      cfg.action_spec.continuous.push_back(1 + rng.uniform_int(2));
  } else {
    const int slots = discrete ? rng.uniform_int(3) : 1 + rng.uniform_int(2);
    for (int j = 0; j < slots; ++j)
      cfg.action_spec.continuous.push_back(1 + rng.uniform_int(2));
  }
  cfg.obs_dim = 2 + rng.uniform_int(4);
  cfg.actor_hidden = {4 + rng.uniform_int(5), 4 + rng.uniform_int(5)};
  cfg.critic_hidden = {4 + rng.uniform_int(5), 4 + rng.uniform_int(5)};
  cfg.activation = rng.uniform() < 0.5 ? Activation::kRelu : Activation::kTanh;
  cfg.flows = cfg.slots() > 0 ? rng.uniform_int(4) : 0;

  const int n = 1 + rng.uniform_int(3);
  const Eigen::MatrixXd states = rng.normal_matrix(n, cfg.obs_dim);
  const std::uint64_t noise_seed = stream_seed(case_seed, fnv1a64("noise"), 0);

  BuiltCase out;
  add_agent_params(out.params, cfg, case_seed, 0.2, 0.2);
  out.value = [cfg, states, noise_seed](const ParameterSet& ps) {
    return agent_composite(ps, cfg, states, noise_seed, nullptr);
  };
  out.gradient = [cfg, states, noise_seed](const ParameterSet& ps,
                                           ParameterSet* grads) {
    agent_composite(ps, cfg, states, noise_seed, grads);
  };
  std::ostringstream desc;
  desc << "agent K=" << (discrete ? cfg.action_spec.discrete[0] : 0)
       << " slots=" << cfg.slots() << " flows=" << cfg.flows
       << (cfg.per_discrete() ? " per-action" : "")
       << (cfg.activation == Activation::kTanh ? " tanh" : " relu")
       << " batch=" << n;
  out.description = desc.str();
  return out;
}

double lab_composite(LabPolicy& policy, const Eigen::MatrixXd& pts, int n,
                     std::uint64_t noise_seed, ParameterSet* grads) {
  Tape t(&policy.params);
  const ActorNodes actor = lab_forward(t, policy);
  Rng noise(noise_seed);
  const LabSampleNodes sampled = lab_sample_tape(t, policy, actor, n, noise);
  NodeRef loss = t.mean_all(sampled.logp);
  loss = t.add(loss, t.mean_all(lab_log_prob_tape(t, policy, actor, pts)));
  if (grads) t.backward(loss, Eigen::MatrixXd::Ones(1, 1), grads);
  return t.scalar_value(loss);
}

BuiltCase build_lab_case(std::uint64_t case_seed) {
  Rng rng(stream_seed(case_seed, fnv1a64("arch"), 0));
  const int d = 1 + rng.uniform_int(3);
  GaussianMixtureTarget target;
  target.weights = Eigen::VectorXd::Ones(1);
  target.means = rng.normal_matrix(1, d);
  target.stds = Eigen::MatrixXd::Constant(1, d, rng.uniform(0.4, 1.2));

  MatchConfig cfg;
  cfg.flows = rng.uniform_int(4);
  cfg.squashed = rng.uniform() < 0.5;
  cfg.hidden = {4 + rng.uniform_int(5), 4 + rng.uniform_int(5)};
  cfg.activation = rng.uniform() < 0.5 ? Activation::kRelu : Activation::kTanh;
  cfg.seed = case_seed;

  const int n = 1 + rng.uniform_int(3);
  Eigen::MatrixXd pts(2, d);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < d; ++c) pts(r, c) = rng.uniform(-0.9, 0.9);
  const std::uint64_t noise_seed = stream_seed(case_seed, fnv1a64("noise"), 0);

  BuiltCase out;
  auto policy = std::make_shared<LabPolicy>(make_lab_policy(cfg, target));
  out.params = policy->params;
  out.value = [policy, pts, n, noise_seed](const ParameterSet& ps) {
    policy->params = ps;
    return lab_composite(*policy, pts, n, noise_seed, nullptr);
  };
  out.gradient = [policy, pts, n, noise_seed](const ParameterSet& ps,
                                              ParameterSet* grads) {
    policy->params = ps;
    lab_composite(*policy, pts, n, noise_seed, grads);
  };
  std::ostringstream desc;
  desc << "lab d=" << d << " flows=" << cfg.flows
       << (cfg.squashed ? " squashed" : " unsquashed")
       << (cfg.activation == Activation::kTanh ? " tanh" : " relu")
       << " batch=" << n;
  out.description = desc.str();
  return out;
}

struct CheckedCase {
  GradCheckCase result;
  // A failing entry whose second difference is far above the smooth h^2
  // scale sat on a kink (relu, clamp, or critic-minimum tie); central
  // differences are meaningless there and the case should be redrawn.
  bool kink_suspected = false;
};

CheckedCase check_case(int index, const BuiltCase& built, double rel_tol,
                       double abs_tol) {
  CheckedCase out;
  out.result.index = index;
  out.result.description = built.description;
  out.result.pass = true;

  ParameterSet params = built.params;
  ParameterSet grads = ParameterSet::zeros_like(params);
  built.gradient(params, &grads);
  const double base = built.value(params);

  const double h = 1e-6;
  for (const std::string& name : params.names_with_prefix("")) {
    Eigen::VectorXd& arr = params.data(name);
    const Eigen::VectorXd& g = grads.data(name);
    for (Eigen::Index i = 0; i < arr.size(); ++i) {
      const double orig = arr(i);
      arr(i) = orig + h;
      const double up = built.value(params);
      arr(i) = orig - h;
      const double down = built.value(params);
      arr(i) = orig;
      const double fd = (up - down) / (2.0 * h);
      const double err = std::abs(g(i) - fd);
      const double scale = std::max(std::abs(g(i)), std::abs(fd));
      out.result.entries += 1;
      out.result.max_abs_err = std::max(out.result.max_abs_err, err);
      if (scale > 0.0)
        out.result.max_rel_err = std::max(out.result.max_rel_err, err / scale);
      if (err > abs_tol + rel_tol * scale) {
        out.result.pass = false;
        if (std::abs(up + down - 2.0 * base) > 1e-9) out.kink_suspected = true;
      }
    }
  }
  return out;
}

}  // namespace

GradCheckReport run_gradient_suite(int num_cases, std::uint64_t seed,
                                   double rel_tol, double abs_tol) {
  const auto t0 = std::chrono::steady_clock::now();
  GradCheckReport report;
  report.rel_tol = rel_tol;
  report.abs_tol = abs_tol;
  report.all_pass = true;

  for (int i = 0; i < num_cases; ++i) {
    CheckedCase checked;
    // Central differences break down when an evaluation point lands on a
    // relu/clamp/min kink; those draws are discarded and the case redrawn.
    for (int attempt = 0; attempt < 8; ++attempt) {
      const std::uint64_t case_seed =
          stream_seed(seed, fnv1a64("gradcheck"),
                      static_cast<std::uint64_t>(i) * 16 + attempt);
      const BuiltCase built = i % 2 == 0 ? build_agent_case(case_seed)
                                         : build_lab_case(case_seed);
      checked = check_case(i, built, rel_tol, abs_tol);
      if (checked.result.pass || !checked.kink_suspected) break;
    }
    report.all_pass = report.all_pass && checked.result.pass;
    report.cases.push_back(std::move(checked.result));
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

std::string format_report(const GradCheckReport& report) {
  std::ostringstream os;
  int failures = 0;
  for (const GradCheckCase& c : report.cases) {
    if (!c.pass) ++failures;
    os << (c.pass ? "pass" : "FAIL") << "  case " << c.index << "  "
       << c.description << "  entries=" << c.entries
       << "  max_abs=" << c.max_abs_err << "  max_rel=" << c.max_rel_err
       << "\n";
  }
  os << (report.all_pass ? "PASS" : "FAIL") << ": "
     << (report.cases.size() - failures) << "/" << report.cases.size()
     << " cases within rel " << report.rel_tol << " / abs " << report.abs_tol
     << " (" << report.seconds << " s)\n";
  return os.str();
}

}  // namespace hsac

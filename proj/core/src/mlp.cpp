#include "hsac/mlp.hpp"

#include <cmath>

#include "hsac/errors.hpp"
#include "hsac/rng.hpp"

namespace hsac {

void MlpConfig::validate() const {
  if (input_dim < 1 || output_dim < 1)
    throw ConfigError("mlp: input/output dims must be >= 1");
  for (int h : hidden_sizes)
    if (h < 1) throw ConfigError("mlp: hidden sizes must be >= 1");
}

std::string mlp_weight_name(const std::string& prefix, int layer) {
  return prefix + ".w" + std::to_string(layer);
}

std::string mlp_bias_name(const std::string& prefix, int layer) {
  return prefix + ".b" + std::to_string(layer);
}

namespace {

std::vector<int> layer_dims(const MlpConfig& cfg) {
  std::vector<int> dims;
  dims.push_back(cfg.input_dim);
  for (int h : cfg.hidden_sizes) dims.push_back(h);
  dims.push_back(cfg.output_dim);
  return dims;
}

}  // namespace

void add_mlp_params(ParameterSet& params, const std::string& prefix,
                    const MlpConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto dims = layer_dims(cfg);
  for (int l = 0; l + 1 < static_cast<int>(dims.size()); ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    const std::string wname = mlp_weight_name(prefix, l);
    Rng rng(stream_seed(seed, fnv1a64(wname), 0));
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::VectorXd w(static_cast<Eigen::Index>(fan_in) * fan_out);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w(i) = rng.uniform(-limit, limit);
    params.add(wname, {fan_in, fan_out}, std::move(w));
    params.add(mlp_bias_name(prefix, l), {fan_out});
  }
}

ParameterSet init_params(const MlpConfig& cfg, std::uint64_t seed,
                         const std::string& prefix) {
  ParameterSet params;
  add_mlp_params(params, prefix, cfg, seed);
  return params;
}

NodeRef mlp_apply(Tape& tape, const MlpConfig& cfg, const std::string& prefix,
                  NodeRef x) {
  cfg.validate();
  if (tape.value(x).cols() != cfg.input_dim)
    throw ConfigError("mlp: input width differs from config");
  NodeRef h = x;
  const int layers = cfg.num_layers();
  for (int l = 0; l < layers; ++l) {
    h = tape.dense(h, tape.param(mlp_weight_name(prefix, l)),
                   tape.param(mlp_bias_name(prefix, l)));
    if (l + 1 < layers)
      h = cfg.activation == Activation::kRelu ? tape.relu(h) : tape.tanh(h);
  }
  return h;
}

Eigen::MatrixXd mlp_eval(const ParameterSet& params, const MlpConfig& cfg,
                         const std::string& prefix, const Eigen::MatrixXd& x) {
  cfg.validate();
  if (x.cols() != cfg.input_dim)
    throw ConfigError("mlp: input width differs from config");
  Eigen::MatrixXd h = x;
  const int layers = cfg.num_layers();
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd next = h * params.matrix(mlp_weight_name(prefix, l));
    next.rowwise() += params.matrix(mlp_bias_name(prefix, l)).row(0);
    if (l + 1 < layers) {
      if (cfg.activation == Activation::kRelu)
        next = next.cwiseMax(0.0);
      else
        next = next.array().tanh();
    }
    h = std::move(next);
  }
  return h;
}

MlpForward mlp_forward(const ParameterSet& params, const MlpConfig& cfg,
                       const std::string& prefix,
                       const Eigen::RowVectorXd& input) {
  MlpForward fwd{Tape(&params), NodeRef{}};
  fwd.output = mlp_apply(fwd.tape, cfg, prefix, fwd.tape.constant(input));
  return fwd;
}

}  // namespace hsac

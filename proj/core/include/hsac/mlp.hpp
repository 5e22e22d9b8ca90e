#pragma once

#include <string>
#include <vector>

#include "hsac/params.hpp"
#include "hsac/tape.hpp"

namespace hsac {

enum class Activation { kRelu, kTanh };

struct MlpConfig {
  int input_dim = 1;
  int output_dim = 1;
  std::vector<int> hidden_sizes;
  Activation activation = Activation::kRelu;

  // Throws ConfigError unless every dimension is >= 1.
  void validate() const;
  int num_layers() const { return static_cast<int>(hidden_sizes.size()) + 1; }
};

// Layer parameter names: <prefix>.w<i> and <prefix>.b<i>, i = 0..L-1.
std::string mlp_weight_name(const std::string& prefix, int layer);
std::string mlp_bias_name(const std::string& prefix, int layer);

// Xavier-uniform weights, zero biases. Each weight array gets its own
// substream keyed by (seed, name), so a parameter's initial values depend
// only on the seed and its own name, not on what else is in the set.
void add_mlp_params(ParameterSet& params, const std::string& prefix,
                    const MlpConfig& cfg, std::uint64_t seed);

ParameterSet init_params(const MlpConfig& cfg, std::uint64_t seed,
                         const std::string& prefix = "mlp");

// Records the network on the tape; x is n x input_dim.
NodeRef mlp_apply(Tape& tape, const MlpConfig& cfg, const std::string& prefix,
                  NodeRef x);

// Value-only batched forward, no tape.
Eigen::MatrixXd mlp_eval(const ParameterSet& params, const MlpConfig& cfg,
                         const std::string& prefix, const Eigen::MatrixXd& x);

// Single-input convenience used by the simple-forward contract and tests.
struct MlpForward {
  Tape tape;
  NodeRef output;
};
MlpForward mlp_forward(const ParameterSet& params, const MlpConfig& cfg,
                       const std::string& prefix,
                       const Eigen::RowVectorXd& input);

}  // namespace hsac

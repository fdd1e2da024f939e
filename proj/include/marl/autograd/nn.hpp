#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marl/autograd/graph.hpp"
#include "marl/core/random.hpp"

namespace marl::ad {

struct Linear {
  Linear() = default;
  // Weights and bias uniform in +-1/sqrt(in).
  Linear(const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng);

  Param weight;  // in x out
  Param bias;    // 1 x out

  Var forward(Graph& g, Var x, bool track = true);
  std::vector<Param*> params() { return {&weight, &bias}; }
  Eigen::Index in_dim() const { return weight.data.rows(); }
  Eigen::Index out_dim() const { return weight.data.cols(); }
};

enum class OutputActivation { Linear, Tanh, Softmax };

struct MlpSpec {
  Eigen::Index input_dim = 0;
  std::vector<Eigen::Index> hidden_dims{128, 128};
  Eigen::Index output_dim = 0;
  OutputActivation output_activation = OutputActivation::Linear;
  bool layer_norm = true;
};

// Hidden layers: linear -> layer norm (gain, shift) -> [mask on the first layer] -> relu.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string name, MlpSpec spec, Rng& rng);

  const MlpSpec& spec() const { return spec_; }
  const std::string& name() const { return name_; }

  // mask: B x K one-hot rows (or a soft relaxation); the first hidden width must be a
  // multiple of K and unit m is scaled by mask[m mod K].
  Var trunk(Graph& g, Var x, std::optional<Var> mask = std::nullopt, bool track = true);
  Var head(Graph& g, Var features, bool track = true);
  Var forward(Graph& g, Var x, std::optional<Var> mask = std::nullopt, bool track = true);

  // Graph-free convenience for rollouts.
  Matrix evaluate(const Matrix& x, const Matrix* mask = nullptr) const;

  std::vector<Param*> params();
  std::vector<const Param*> params() const;

 private:
  struct Hidden {
    Linear linear;
    Param gain;
    Param shift;
  };

  std::string name_;
  MlpSpec spec_;
  std::vector<Hidden> hidden_;
  Linear out_;
};

Var apply_output(Var x, OutputActivation act);

}  // namespace marl::ad

#pragma once

#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace bfrl {

enum class OutputActivation { Identity, TanhScaled };

// Dense network with ReLU hidden layers. Weights are row-major [out][in].
// All math is 64-bit.
struct Mlp {
  std::vector<int> sizes;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  OutputActivation output_activation = OutputActivation::Identity;
  double output_scale = 1.0;  // output = scale * tanh(z) when TanhScaled

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
};

// Uniform fan-in init (+-1/sqrt(fan_in)); the final layer is scaled by
// final_layer_scale so a freshly built actor emits near-zero actions.
Mlp make_mlp(const std::vector<int>& sizes, OutputActivation activation,
             double output_scale, std::mt19937_64& rng,
             double final_layer_scale = 1.0);

struct ForwardCache {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;   // pre-activations, per layer
  std::vector<std::vector<double>> post;  // activations, per layer
};

// Forward pass; fills `cache` when given so a backward pass can follow.
std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input,
                                ForwardCache* cache = nullptr);

struct MlpGrads {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

MlpGrads zero_grads_like(const Mlp& net);
void scale_grads(MlpGrads& grads, double factor);

// Accumulates d(output . output_grad)/d(params) into `grads` and returns the
// gradient with respect to the input. The cache must come from a forward pass
// of the same network; a shape mismatch throws std::logic_error.
std::vector<double> mlp_backward(const Mlp& net, const ForwardCache& cache,
                                 std::span<const double> output_grad,
                                 MlpGrads& grads);

bool params_finite(const Mlp& net);

// Binary snapshot: magic/version header, layer sizes, activation, scale, then
// weights and biases in layer order as little-endian 64-bit reals.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);

}  // namespace bfrl

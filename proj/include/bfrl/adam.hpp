#pragma once

#include "bfrl/mlp.hpp"

namespace bfrl {

// Bias-corrected Adam, moments shaped like the network parameters.
struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step_count = 0;
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};

AdamState make_adam(const Mlp& net, double lr = 3e-4, double beta1 = 0.9,
                    double beta2 = 0.999, double eps = 1e-8);

// One update of `net` in place; throws std::invalid_argument on any shape
// mismatch between optimizer state, parameters and gradients.
void adam_step(AdamState& opt, Mlp& net, const MlpGrads& grads);

// target <- (1 - tau) * target + tau * source, elementwise.
void polyak_update(Mlp& target, const Mlp& source, double tau);

}  // namespace bfrl

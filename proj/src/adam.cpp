#include "bfrl/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace bfrl {

AdamState make_adam(const Mlp& net, double lr, double beta1, double beta2,
                    double eps) {
  if (!(lr > 0.0) || !(eps > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) ||
      !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("adam: invalid hyperparameters");
  }
  AdamState opt;
  opt.lr = lr;
  opt.beta1 = beta1;
  opt.beta2 = beta2;
  opt.eps = eps;
  for (std::size_t layer = 0; layer < net.layer_count(); ++layer) {
    opt.m_w.emplace_back(net.weights[layer].size(), 0.0);
    opt.v_w.emplace_back(net.weights[layer].size(), 0.0);
    opt.m_b.emplace_back(net.biases[layer].size(), 0.0);
    opt.v_b.emplace_back(net.biases[layer].size(), 0.0);
  }
  return opt;
}

namespace {

void update_block(std::vector<double>& params, const std::vector<double>& grads,
                  std::vector<double>& m, std::vector<double>& v,
                  const AdamState& opt, double bc1, double bc2) {
  if (params.size() != grads.size() || params.size() != m.size()) {
    throw std::invalid_argument("adam: parameter/gradient shape mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g;
    v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    params[i] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps);
  }
}

}  // namespace

void adam_step(AdamState& opt, Mlp& net, const MlpGrads& grads) {
  if (opt.m_w.size() != net.layer_count() ||
      grads.weights.size() != net.layer_count()) {
    throw std::invalid_argument("adam: layer count mismatch");
  }
  ++opt.step_count;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step_count));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step_count));
  for (std::size_t layer = 0; layer < net.layer_count(); ++layer) {
    update_block(net.weights[layer], grads.weights[layer], opt.m_w[layer],
                 opt.v_w[layer], opt, bc1, bc2);
    update_block(net.biases[layer], grads.biases[layer], opt.m_b[layer],
                 opt.v_b[layer], opt, bc1, bc2);
  }
}

void polyak_update(Mlp& target, const Mlp& source, double tau) {
  if (!(tau > 0.0) || tau > 1.0) {
    throw std::invalid_argument("polyak: tau must be in (0, 1]");
  }
  if (target.sizes != source.sizes) {
    throw std::invalid_argument("polyak: architecture mismatch");
  }
  for (std::size_t layer = 0; layer < target.layer_count(); ++layer) {
    for (std::size_t i = 0; i < target.weights[layer].size(); ++i) {
      target.weights[layer][i] = (1.0 - tau) * target.weights[layer][i] +
                                 tau * source.weights[layer][i];
    }
    for (std::size_t i = 0; i < target.biases[layer].size(); ++i) {
      target.biases[layer][i] = (1.0 - tau) * target.biases[layer][i] +
                                tau * source.biases[layer][i];
    }
  }
}

}  // namespace bfrl

#include "bfrl/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace bfrl {

namespace {

constexpr char kMagic[8] = {'B', 'F', 'M', 'L', 'P', '0', '0', '1'};

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("mlp: need at least input and output sizes");
  }
  for (int s : sizes) {
    if (s < 1) {
      throw std::invalid_argument("mlp: layer sizes must be >= 1");
    }
  }
}

}  // namespace

Mlp make_mlp(const std::vector<int>& sizes, OutputActivation activation,
             double output_scale, std::mt19937_64& rng,
             double final_layer_scale) {
  check_sizes(sizes);
  Mlp net;
  net.sizes = sizes;
  net.output_activation = activation;
  net.output_scale = output_scale;
  for (std::size_t layer = 0; layer + 1 < sizes.size(); ++layer) {
    const int fan_in = sizes[layer];
    const int fan_out = sizes[layer + 1];
    const bool last = layer + 2 == sizes.size();
    const double bound =
        (last ? final_layer_scale : 1.0) / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
    std::vector<double> b(fan_out);
    for (double& x : w) x = dist(rng);
    for (double& x : b) x = dist(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input,
                                ForwardCache* cache) {
  if (static_cast<int>(input.size()) != net.input_dim()) {
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  }
  if (cache) {
    cache->input.assign(input.begin(), input.end());
    cache->pre.assign(net.layer_count(), {});
    cache->post.assign(net.layer_count(), {});
  }
  std::vector<double> act(input.begin(), input.end());
  for (std::size_t layer = 0; layer < net.layer_count(); ++layer) {
    const int n_in = net.sizes[layer];
    const int n_out = net.sizes[layer + 1];
    const std::vector<double>& w = net.weights[layer];
    const std::vector<double>& b = net.biases[layer];
    std::vector<double> z(n_out);
    for (int o = 0; o < n_out; ++o) {
      const double* row = &w[static_cast<std::size_t>(o) * n_in];
      double sum = b[o];
      for (int i = 0; i < n_in; ++i) {
        sum += row[i] * act[i];
      }
      z[o] = sum;
    }
    if (cache) cache->pre[layer] = z;
    const bool last = layer + 1 == net.layer_count();
    if (!last) {
      for (double& x : z) x = x > 0.0 ? x : 0.0;
    } else if (net.output_activation == OutputActivation::TanhScaled) {
      for (double& x : z) x = net.output_scale * std::tanh(x);
    }
    if (cache) cache->post[layer] = z;
    act = std::move(z);
  }
  return act;
}

MlpGrads zero_grads_like(const Mlp& net) {
  MlpGrads g;
  for (std::size_t layer = 0; layer < net.layer_count(); ++layer) {
    g.weights.emplace_back(net.weights[layer].size(), 0.0);
    g.biases.emplace_back(net.biases[layer].size(), 0.0);
  }
  return g;
}

void scale_grads(MlpGrads& grads, double factor) {
  for (auto& w : grads.weights)
    for (double& x : w) x *= factor;
  for (auto& b : grads.biases)
    for (double& x : b) x *= factor;
}

std::vector<double> mlp_backward(const Mlp& net, const ForwardCache& cache,
                                 std::span<const double> output_grad,
                                 MlpGrads& grads) {
  const std::size_t layers = net.layer_count();
  if (cache.pre.size() != layers || cache.post.size() != layers ||
      static_cast<int>(cache.input.size()) != net.input_dim() ||
      grads.weights.size() != layers) {
    throw std::logic_error("mlp_backward: cache/grads do not match network");
  }
  for (std::size_t layer = 0; layer < layers; ++layer) {
    if (cache.pre[layer].size() != static_cast<std::size_t>(net.sizes[layer + 1])) {
      throw std::logic_error("mlp_backward: stale cache");
    }
  }
  if (static_cast<int>(output_grad.size()) != net.output_dim()) {
    throw std::invalid_argument("mlp_backward: output_grad dimension mismatch");
  }

  // delta = dL/dz for the current layer, starting from the output.
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  if (net.output_activation == OutputActivation::TanhScaled) {
    const std::vector<double>& z = cache.pre.back();
    for (std::size_t o = 0; o < delta.size(); ++o) {
      const double t = std::tanh(z[o]);
      delta[o] *= net.output_scale * (1.0 - t * t);
    }
  }

  for (std::size_t layer = layers; layer-- > 0;) {
    const int n_in = net.sizes[layer];
    const int n_out = net.sizes[layer + 1];
    const std::vector<double>& in_act =
        layer == 0 ? cache.input : cache.post[layer - 1];
    std::vector<double>& gw = grads.weights[layer];
    std::vector<double>& gb = grads.biases[layer];
    for (int o = 0; o < n_out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      double* row = &gw[static_cast<std::size_t>(o) * n_in];
      for (int i = 0; i < n_in; ++i) {
        row[i] += d * in_act[i];
      }
    }
    // Input gradient of this layer feeds the previous layer's delta.
    std::vector<double> prev(n_in, 0.0);
    const std::vector<double>& w = net.weights[layer];
    for (int o = 0; o < n_out; ++o) {
      const double d = delta[o];
      const double* row = &w[static_cast<std::size_t>(o) * n_in];
      for (int i = 0; i < n_in; ++i) {
        prev[i] += d * row[i];
      }
    }
    if (layer > 0) {
      const std::vector<double>& z = cache.pre[layer - 1];
      for (int i = 0; i < n_in; ++i) {
        if (z[i] <= 0.0) prev[i] = 0.0;  // ReLU
      }
    }
    delta = std::move(prev);
  }
  return delta;
}

bool params_finite(const Mlp& net) {
  for (const auto& w : net.weights)
    for (double x : w)
      if (!std::isfinite(x)) return false;
  for (const auto& b : net.biases)
    for (double x : b)
      if (!std::isfinite(x)) return false;
  return true;
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("checkpoint: truncated stream");
  return v;
}

void read_f64(std::istream& in, std::vector<double>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated stream");
}

}  // namespace

void save_mlp(std::ostream& out, const Mlp& net) {
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, static_cast<std::uint32_t>(net.sizes.size()));
  for (int s : net.sizes) write_u32(out, static_cast<std::uint32_t>(s));
  write_u32(out, net.output_activation == OutputActivation::TanhScaled ? 1 : 0);
  const double scale = net.output_scale;
  out.write(reinterpret_cast<const char*>(&scale), sizeof(scale));
  for (std::size_t layer = 0; layer < net.layer_count(); ++layer) {
    write_f64(out, net.weights[layer]);
    write_f64(out, net.biases[layer]);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

Mlp load_mlp(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const std::uint32_t n_sizes = read_u32(in);
  if (n_sizes < 2 || n_sizes > 64) {
    throw std::runtime_error("checkpoint: implausible layer count");
  }
  Mlp net;
  net.sizes.resize(n_sizes);
  for (auto& s : net.sizes) s = static_cast<int>(read_u32(in));
  check_sizes(net.sizes);
  net.output_activation = read_u32(in) == 1 ? OutputActivation::TanhScaled
                                            : OutputActivation::Identity;
  in.read(reinterpret_cast<char*>(&net.output_scale), sizeof(double));
  if (!in) throw std::runtime_error("checkpoint: truncated stream");
  for (std::size_t layer = 0; layer + 1 < net.sizes.size(); ++layer) {
    const auto n_in = static_cast<std::size_t>(net.sizes[layer]);
    const auto n_out = static_cast<std::size_t>(net.sizes[layer + 1]);
    std::vector<double> w(n_out * n_in);
    std::vector<double> b(n_out);
    read_f64(in, w);
    read_f64(in, b);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

}  // namespace bfrl

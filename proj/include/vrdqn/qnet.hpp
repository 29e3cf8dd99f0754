#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vrdqn {

struct LayerShape {
  int in = 0;
  int out = 0;
  bool operator==(const LayerShape&) const = default;
};

// Fully connected net: hidden layers ReLU, output layer linear. One weight
// matrix of in*out values followed by out biases per layer, layers in order.
struct NetworkShape {
  std::vector<LayerShape> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
  std::size_t param_count() const;
  bool operator==(const NetworkShape&) const = default;
};

// input -> hidden x hidden_layers -> n_actions.
NetworkShape make_mlp_shape(int input_dim, int hidden, int n_actions,
                            int hidden_layers = 1);

std::size_t weight_offset(const NetworkShape& shape, int layer);
std::size_t bias_offset(const NetworkShape& shape, int layer);

// Flat parameter vector theta plus its layer layout. Gradients and Adam
// moments share the exact same layout, so they reuse the type.
struct ParamVector {
  std::vector<double> values;
  NetworkShape shape;
};
using GradVector = ParamVector;

ParamVector zeros_like(const NetworkShape& shape);

// Throws std::invalid_argument when layouts differ.
void check_same_layout(const ParamVector& a, const ParamVector& b);

// He-style scaled-uniform init: weights U(-sqrt(6/fan_in), sqrt(6/fan_in)),
// biases exactly zero. Deterministic per seed.
ParamVector init_params(std::uint64_t seed, const NetworkShape& shape);

// Q(s, .; theta), one value per action. Pure; throws on dimension mismatch.
std::vector<double> forward(const ParamVector& params,
                            std::span<const double> observation);

// Exact reverse-mode gradient of the scalar Q(s, a; theta) w.r.t. every
// parameter. The ReLU subgradient at exactly 0 is fixed to 0.
GradVector q_grad(const ParamVector& params,
                  std::span<const double> observation, int action);

// Flat little-endian binary blob: magic "QPV1", u32 layer count, u32 (in,
// out) per layer, then the values as f64.
void save_params(const ParamVector& params, const std::filesystem::path& path);
ParamVector load_params(const std::filesystem::path& path);

}  // namespace vrdqn

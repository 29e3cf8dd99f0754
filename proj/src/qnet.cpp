#include "vrdqn/qnet.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "vrdqn/rng.hpp"

namespace vrdqn {

namespace {

void check_shape(const NetworkShape& shape) {
  if (shape.layers.empty())
    throw std::invalid_argument("network shape has no layers");
  for (std::size_t l = 0; l < shape.layers.size(); ++l) {
    if (shape.layers[l].in <= 0 || shape.layers[l].out <= 0)
      throw std::invalid_argument("layer dimensions must be positive");
    if (l > 0 && shape.layers[l].in != shape.layers[l - 1].out)
      throw std::invalid_argument("layer dimensions do not chain");
  }
}

}  // namespace

std::size_t NetworkShape::param_count() const {
  std::size_t n = 0;
  for (const LayerShape& l : layers)
    n += static_cast<std::size_t>(l.in) * l.out + l.out;
  return n;
}

NetworkShape make_mlp_shape(int input_dim, int hidden, int n_actions,
                            int hidden_layers) {
  if (input_dim <= 0 || hidden <= 0 || n_actions <= 0 || hidden_layers < 1)
    throw std::invalid_argument("make_mlp_shape: dimensions must be positive");
  NetworkShape shape;
  shape.layers.push_back({input_dim, hidden});
  for (int l = 1; l < hidden_layers; ++l) shape.layers.push_back({hidden, hidden});
  shape.layers.push_back({hidden, n_actions});
  return shape;
}

std::size_t weight_offset(const NetworkShape& shape, int layer) {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l)
    off += static_cast<std::size_t>(shape.layers[l].in) * shape.layers[l].out +
           shape.layers[l].out;
  return off;
}

std::size_t bias_offset(const NetworkShape& shape, int layer) {
  return weight_offset(shape, layer) +
         static_cast<std::size_t>(shape.layers[layer].in) *
             shape.layers[layer].out;
}

ParamVector zeros_like(const NetworkShape& shape) {
  check_shape(shape);
  return {std::vector<double>(shape.param_count(), 0.0), shape};
}

void check_same_layout(const ParamVector& a, const ParamVector& b) {
  if (a.shape != b.shape || a.values.size() != b.values.size())
    throw std::invalid_argument("parameter vector layouts differ");
}

ParamVector init_params(std::uint64_t seed, const NetworkShape& shape) {
  check_shape(shape);
  ParamVector p = zeros_like(shape);
  Rng rng(seed);
  for (std::size_t l = 0; l < shape.layers.size(); ++l) {
    const LayerShape& ls = shape.layers[l];
    const double limit = std::sqrt(6.0 / ls.in);
    double* w = p.values.data() + weight_offset(shape, static_cast<int>(l));
    for (int i = 0; i < ls.in * ls.out; ++i) w[i] = rng.uniform(-limit, limit);
    // biases stay exactly zero
  }
  return p;
}

std::vector<double> forward(const ParamVector& params,
                            std::span<const double> observation) {
  check_shape(params.shape);
  if (params.values.size() != params.shape.param_count())
    throw std::invalid_argument("forward: parameter count mismatch");
  if (static_cast<int>(observation.size()) != params.shape.input_dim())
    throw std::invalid_argument("forward: observation dimension mismatch");

  std::vector<double> cur(observation.begin(), observation.end());
  std::size_t off = 0;
  const std::size_t n_layers = params.shape.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const LayerShape& ls = params.shape.layers[l];
    const double* w = params.values.data() + off;
    const double* b = w + static_cast<std::size_t>(ls.in) * ls.out;
    std::vector<double> next(ls.out);
    for (int j = 0; j < ls.out; ++j) {
      double acc = b[j];
      for (int i = 0; i < ls.in; ++i) acc += cur[i] * w[i * ls.out + j];
      next[j] = acc;
    }
    if (l + 1 < n_layers)
      for (double& v : next) v = v > 0.0 ? v : 0.0;  // ReLU
    cur = std::move(next);
    off += static_cast<std::size_t>(ls.in) * ls.out + ls.out;
  }
  return cur;
}

GradVector q_grad(const ParamVector& params,
                  std::span<const double> observation, int action) {
  check_shape(params.shape);
  if (params.values.size() != params.shape.param_count())
    throw std::invalid_argument("q_grad: parameter count mismatch");
  if (static_cast<int>(observation.size()) != params.shape.input_dim())
    throw std::invalid_argument("q_grad: observation dimension mismatch");
  if (action < 0 || action >= params.shape.output_dim())
    throw std::invalid_argument("q_grad: action out of range");

  const std::size_t n_layers = params.shape.layers.size();

  // Forward pass keeping every activation. acts[0] is the input; hidden
  // activations are post-ReLU, so act > 0 doubles as the ReLU mask.
  std::vector<std::vector<double>> acts(n_layers + 1);
  acts[0].assign(observation.begin(), observation.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const LayerShape& ls = params.shape.layers[l];
    const double* w = params.values.data() + off;
    const double* b = w + static_cast<std::size_t>(ls.in) * ls.out;
    acts[l + 1].resize(ls.out);
    for (int j = 0; j < ls.out; ++j) {
      double acc = b[j];
      for (int i = 0; i < ls.in; ++i) acc += acts[l][i] * w[i * ls.out + j];
      acts[l + 1][j] = (l + 1 < n_layers) ? (acc > 0.0 ? acc : 0.0) : acc;
    }
    off += static_cast<std::size_t>(ls.in) * ls.out + ls.out;
  }

  GradVector grad = zeros_like(params.shape);

  // Backward from the single output unit `action`.
  std::vector<double> delta(params.shape.output_dim(), 0.0);
  delta[action] = 1.0;
  for (std::size_t lp1 = n_layers; lp1 > 0; --lp1) {
    const std::size_t l = lp1 - 1;
    const LayerShape& ls = params.shape.layers[l];
    const std::size_t w_off = weight_offset(params.shape, static_cast<int>(l));
    const double* w = params.values.data() + w_off;
    double* gw = grad.values.data() + w_off;
    double* gb = gw + static_cast<std::size_t>(ls.in) * ls.out;
    std::vector<double> delta_prev(ls.in, 0.0);
    for (int j = 0; j < ls.out; ++j) {
      const double d = delta[j];
      if (d == 0.0) {
        continue;
      }
      gb[j] += d;
      for (int i = 0; i < ls.in; ++i) {
        gw[i * ls.out + j] += acts[l][i] * d;
        delta_prev[i] += w[i * ls.out + j] * d;
      }
    }
    if (l > 0) {
      // through the ReLU of the layer below; derivative at exactly 0 is 0
      for (int i = 0; i < ls.in; ++i)
        if (!(acts[l][i] > 0.0)) delta_prev[i] = 0.0;
    }
    delta = std::move(delta_prev);
  }
  return grad;
}

namespace {
constexpr char kMagic[4] = {'Q', 'P', 'V', '1'};
static_assert(std::endian::native == std::endian::little,
              "parameter blobs are little-endian; big-endian hosts need a swap");
}  // namespace

void save_params(const ParamVector& params,
                 const std::filesystem::path& path) {
  check_shape(params.shape);
  if (params.values.size() != params.shape.param_count())
    throw std::invalid_argument("save_params: parameter count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kMagic, sizeof kMagic);
  const std::uint32_t n_layers =
      static_cast<std::uint32_t>(params.shape.layers.size());
  out.write(reinterpret_cast<const char*>(&n_layers), sizeof n_layers);
  for (const LayerShape& l : params.shape.layers) {
    const std::uint32_t in = static_cast<std::uint32_t>(l.in);
    const std::uint32_t outd = static_cast<std::uint32_t>(l.out);
    out.write(reinterpret_cast<const char*>(&in), sizeof in);
    out.write(reinterpret_cast<const char*>(&outd), sizeof outd);
  }
  out.write(reinterpret_cast<const char*>(params.values.data()),
            static_cast<std::streamsize>(params.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ParamVector load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("bad parameter blob: " + path.string());
  std::uint32_t n_layers = 0;
  in.read(reinterpret_cast<char*>(&n_layers), sizeof n_layers);
  if (!in || n_layers == 0 || n_layers > 1024)
    throw std::runtime_error("bad layer count: " + path.string());
  NetworkShape shape;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    std::uint32_t dims[2];
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (!in) throw std::runtime_error("truncated header: " + path.string());
    shape.layers.push_back(
        {static_cast<int>(dims[0]), static_cast<int>(dims[1])});
  }
  check_shape(shape);
  ParamVector p = zeros_like(shape);
  in.read(reinterpret_cast<char*>(p.values.data()),
          static_cast<std::streamsize>(p.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated values: " + path.string());
  for (double v : p.values)
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite parameter in " + path.string());
  return p;
}

}  // namespace vrdqn

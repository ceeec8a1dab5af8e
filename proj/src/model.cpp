#include "dsmhn/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "dsmhn/binary_io.hpp"
#include "dsmhn/error.hpp"

namespace dsmhn {

namespace {

constexpr double kHashLrMultiplier = 1000.0;
constexpr double kClassLrMultiplier = 100.0;

std::string layer_name(const NetworkConfig& config, std::size_t m) {
  std::string name = "layer " + std::to_string(m);
  if (config.layers.size() >= 2) {
    if (m == config.hash_layer()) name += " (hash)";
    if (m == config.class_layer()) name += " (classification)";
  }
  return name;
}

}  // namespace

void NetworkConfig::validate() const {
  if (layers.size() < 2)
    throw ConfigError("network needs at least a hash and a classification layer");
  if (code_length == 0) throw ConfigError("code length must be at least 1");
  if (num_classes == 0) throw ConfigError("class count must be at least 1");
  for (std::size_t m = 0; m < layers.size(); ++m) {
    const LayerSpec& l = layers[m];
    if (l.in_dim == 0 || l.out_dim == 0)
      throw ConfigError(layer_name(*this, m) + ": zero dimension");
    if (!(l.lr_multiplier > 0.0))
      throw ConfigError(layer_name(*this, m) + ": lr multiplier must be positive");
    if (m + 1 < layers.size() && l.out_dim != layers[m + 1].in_dim)
      throw ConfigError(layer_name(*this, m) + ": out_dim " + std::to_string(l.out_dim) +
                        " does not chain into in_dim " +
                        std::to_string(layers[m + 1].in_dim) + " of layer " +
                        std::to_string(m + 1));
  }
  const LayerSpec& hash = layers[hash_layer()];
  if (hash.out_dim != code_length || hash.activation != Activation::Tanh)
    throw ConfigError(layer_name(*this, hash_layer()) + ": must be tanh with width " +
                      std::to_string(code_length));
  const LayerSpec& cls = layers[class_layer()];
  if (cls.out_dim != num_classes || cls.activation != Activation::Sigmoid)
    throw ConfigError(layer_name(*this, class_layer()) +
                      ": must be sigmoid with width " + std::to_string(num_classes));
}

NetworkParams build_network(const NetworkConfig& config, Rng& rng) {
  config.validate();
  NetworkParams p;
  for (const LayerSpec& l : config.layers) {
    p.weights.push_back(xavier_init(l.out_dim, l.in_dim, rng));
    p.biases.emplace_back(l.out_dim, 0.0);
  }
  return p;
}

void check_params(const NetworkParams& params, const NetworkConfig& config) {
  if (params.weights.size() != config.depth() || params.biases.size() != config.depth())
    throw ShapeError("parameter set has " + std::to_string(params.weights.size()) +
                     " layers, config has " + std::to_string(config.depth()));
  for (std::size_t m = 0; m < config.depth(); ++m) {
    const LayerSpec& l = config.layers[m];
    const Matrix& w = params.weights[m];
    if (w.rows() != l.out_dim || w.cols() != l.in_dim || params.biases[m].size() != l.out_dim)
      throw ShapeError(layer_name(config, m) + ": weights " + w.shape_string() +
                       " do not match " + std::to_string(l.out_dim) + "x" +
                       std::to_string(l.in_dim));
  }
}

ForwardTrace forward(const NetworkParams& params, const NetworkConfig& config,
                     const Matrix& batch) {
  check_params(params, config);
  if (batch.rows() != config.input_dim())
    throw ShapeError("forward: batch has " + std::to_string(batch.rows()) +
                     " features, network expects " + std::to_string(config.input_dim()));
  ForwardTrace t;
  t.post_activations.reserve(config.depth() + 1);
  t.post_activations.push_back(batch);
  for (std::size_t m = 0; m < config.depth(); ++m) {
    Matrix pre = matmul(params.weights[m], t.post_activations.back());
    add_column_broadcast(pre, params.biases[m]);
    t.post_activations.push_back(apply_activation(pre, config.layers[m].activation));
    t.pre_activations.push_back(std::move(pre));
  }
  t.relaxed_codes = t.post_activations[config.hash_layer() + 1];
  t.class_probs = t.post_activations.back();
  return t;
}

Matrix hash_outputs(const NetworkParams& params, const NetworkConfig& config,
                    const Matrix& features) {
  if (features.cols() != config.input_dim())
    throw ShapeError("features have dimension " + std::to_string(features.cols()) +
                     ", network expects " + std::to_string(config.input_dim()));
  constexpr std::size_t kBlock = 1024;
  const std::size_t n = features.rows();
  Matrix out(config.code_length, n);
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t len = std::min(kBlock, n - start);
    Matrix batch(features.cols(), len);
    for (std::size_t k = 0; k < len; ++k) {
      const auto r = features.row(start + k);
      for (std::size_t f = 0; f < r.size(); ++f) batch(f, k) = r[f];
    }
    const ForwardTrace t = forward(params, config, batch);
    for (std::size_t b = 0; b < config.code_length; ++b)
      for (std::size_t k = 0; k < len; ++k) out(b, start + k) = t.relaxed_codes(b, k);
  }
  return out;
}

NetworkConfig config_from_widths(const std::vector<std::size_t>& widths) {
  if (widths.size() < 3)
    throw ConfigError("need at least input, code and class widths");
  NetworkConfig c;
  const std::size_t n_layers = widths.size() - 1;
  for (std::size_t m = 0; m < n_layers; ++m) {
    LayerSpec l{widths[m], widths[m + 1], Activation::ReLU, 1.0};
    if (m == n_layers - 2) {
      l.activation = Activation::Tanh;
      l.lr_multiplier = kHashLrMultiplier;
    } else if (m == n_layers - 1) {
      l.activation = Activation::Sigmoid;
      l.lr_multiplier = kClassLrMultiplier;
    }
    c.layers.push_back(l);
  }
  c.code_length = widths[widths.size() - 2];
  c.num_classes = widths.back();
  c.validate();
  return c;
}

std::pair<NetworkConfig, NetworkConfig> default_configs(std::size_t d_x, std::size_t d_y,
                                                        std::size_t code_length,
                                                        std::size_t num_classes,
                                                        const std::vector<std::size_t>& hidden) {
  auto chain = [&](std::size_t in) {
    std::vector<std::size_t> w{in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(code_length);
    w.push_back(num_classes);
    return config_from_widths(w);
  };
  return {chain(d_x), chain(d_y)};
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params) {
  io::Writer w;
  w.bytes("DSMP");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(params.weights.size()));
  for (std::size_t m = 0; m < params.weights.size(); ++m) {
    const Matrix& W = params.weights[m];
    w.u32(static_cast<std::uint32_t>(W.cols()));
    w.u32(static_cast<std::uint32_t>(W.rows()));
    for (double x : W.data()) w.f64(x);
    for (double x : params.biases[m]) w.f64(x);
  }
  io::write_file_atomic(path, w.buffer());
}

std::pair<NetworkConfig, NetworkParams> load_checkpoint(const std::filesystem::path& path) {
  io::Reader r(io::read_file(path), "checkpoint " + path.string());
  r.expect_magic("DSMP");
  const std::uint32_t version = r.u32();
  if (version != 1) r.fail("unsupported version " + std::to_string(version));
  const std::uint32_t n_layers = r.u32();
  if (n_layers < 2) r.fail("needs at least 2 layers, found " + std::to_string(n_layers));
  NetworkParams p;
  std::vector<std::size_t> widths;
  for (std::uint32_t m = 0; m < n_layers; ++m) {
    const std::uint32_t in = r.u32();
    const std::uint32_t out = r.u32();
    if (m == 0) widths.push_back(in);
    else if (in != widths.back()) r.fail("layer " + std::to_string(m) + " does not chain");
    widths.push_back(out);
    const std::size_t count = static_cast<std::size_t>(in) * out;
    r.require((count + out) * 8, "layer " + std::to_string(m) + " parameters");
    Matrix W(out, in);
    for (double& x : W.data()) x = r.f64();
    Vector c(out);
    for (double& x : c) x = r.f64();
    p.weights.push_back(std::move(W));
    p.biases.push_back(std::move(c));
  }
  r.expect_end();
  NetworkConfig config;
  try {
    config = config_from_widths(widths);
  } catch (const ConfigError& e) {
    throw FormatError("checkpoint " + path.string() + ": " + e.what());
  }
  return {config, p};
}

std::uint64_t params_checksum(const NetworkParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](double x) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (std::size_t m = 0; m < params.weights.size(); ++m) {
    for (double x : params.weights[m].data()) mix(x);
    for (double x : params.biases[m]) mix(x);
  }
  return h;
}

}  // namespace dsmhn

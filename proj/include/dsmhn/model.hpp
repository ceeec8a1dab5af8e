#pragma once

#include <cstddef>
#include <filesystem>
#include <utility>
#include <vector>

#include "dsmhn/numerics.hpp"
#include "dsmhn/rng.hpp"

namespace dsmhn {

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::ReLU;
  double lr_multiplier = 1.0;
};

/// A fully-connected stack whose last two layers are the hash layer
/// (tanh, width code_length) and the classification layer (sigmoid, width
/// num_classes).
struct NetworkConfig {
  std::vector<LayerSpec> layers;
  std::size_t code_length = 0;
  std::size_t num_classes = 0;

  std::size_t depth() const { return layers.size(); }
  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in_dim; }
  std::size_t hash_layer() const { return layers.size() - 2; }
  std::size_t class_layer() const { return layers.size() - 1; }

  /// Throws ConfigError naming the offending layer.
  void validate() const;
};

struct NetworkParams {
  std::vector<Matrix> weights;  // out_dim × in_dim
  std::vector<Vector> biases;   // out_dim

  bool operator==(const NetworkParams&) const = default;
};

/// Everything forward() computes, kept for backprop.
struct ForwardTrace {
  std::vector<Matrix> pre_activations;   // one per layer
  std::vector<Matrix> post_activations;  // Z^0 (input) ... Z^M
  Matrix relaxed_codes;                  // hash-layer output, L × batch
  Matrix class_probs;                    // C × batch
};

NetworkParams build_network(const NetworkConfig& config, Rng& rng);

/// Throws ShapeError if params do not match config.
void check_params(const NetworkParams& params, const NetworkConfig& config);

ForwardTrace forward(const NetworkParams& params, const NetworkConfig& config,
                     const Matrix& batch);

/// Image and text networks: d → hidden… → L (tanh) → C (sigmoid), ReLU
/// hidden layers, lr multipliers 1 / 1000 on the hash layer / 100 on the
/// classification layer.
std::pair<NetworkConfig, NetworkConfig> default_configs(
    std::size_t d_x, std::size_t d_y, std::size_t code_length,
    std::size_t num_classes, const std::vector<std::size_t>& hidden = {512, 512});

/// Relaxed hash-layer outputs (L × n) for row-per-item features (n × d),
/// computed in column blocks to bound memory.
Matrix hash_outputs(const NetworkParams& params, const NetworkConfig& config,
                    const Matrix& features);

/// Builds a config from a layer-width chain using the default activation and
/// lr-multiplier conventions. widths = {in, h1, ..., L, C}.
NetworkConfig config_from_widths(const std::vector<std::size_t>& widths);

// Checkpoint file ("DSMP", version 1). Layer activations and lr multipliers
// are not stored; load_checkpoint reconstructs them from the conventions of
// config_from_widths.
void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params);
std::pair<NetworkConfig, NetworkParams> load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over the raw parameter bytes; logged to identify a trained model.
std::uint64_t params_checksum(const NetworkParams& params);

}  // namespace dsmhn

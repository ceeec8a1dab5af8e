#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dsmhn/data.hpp"
#include "dsmhn/model.hpp"
#include "dsmhn/objective.hpp"
#include "dsmhn/rng.hpp"

namespace dsmhn {

struct TrainConfig {
  PairwiseLossKind loss = PairwiseLossKind::contrastive(32.0);
  ObjectiveWeights weights;
  double learning_rate = 3e-5;
  std::size_t batch_size = 128;
  std::size_t iterations = 2000;
  double positive_fraction = 0.5;
  std::uint64_t seed = 1;

  /// α=1, β=γ=0.5, lr=1e-5, batch 128.
  static TrainConfig paper_preset(std::size_t code_length);
  /// Same weights and batch, 2000 iterations, lr from desk_learning_rate.
  static TrainConfig desk_preset(std::size_t code_length,
                                 PairwiseLoss loss = PairwiseLoss::Contrastive);
  /// 3e-5 for L1, L2 and hinge. The contrastive gradient grows like L² relative
  /// to the others, so its rate is 3e-5 / L².
  static double desk_learning_rate(PairwiseLoss loss, std::size_t code_length);

  void validate() const;
};

enum class Modality { Image, Text };

/// One mini-batch of cross-modal pairs. Column k of the image batch is
/// dataset item image_items[k] and column k of the text batch is
/// text_items[k]; pairs[k] = {k, k, s}.
struct PairBatch {
  std::vector<std::size_t> image_items;
  std::vector<std::size_t> text_items;
  std::vector<PairSample> pairs;
  /// The requested polarity could not be met within the retry cap.
  bool polarity_shortfall = false;
};

/// Draws n pairs from `pool` (dataset indices). Each slot is positive with
/// probability frac_pos; a matching pair is found by rejection sampling
/// with a retry cap. If the dataset has no negative (or no positive) pairs
/// the slot takes the available polarity and the batch is flagged.
PairBatch sample_pair_batch(const MultimodalDataset& ds, const std::vector<std::size_t>& pool,
                            std::size_t n, double frac_pos, Rng& rng);

struct LayerGrads {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Alternative gradient forms, exposed only for the gradient checker's
/// demonstrations. The defaults are the exact derivatives.
struct BackwardOptions {
  L1GradForm l1_form = L1GradForm::SignResidual;
  /// Multiply the classification delta by an extra sigmoid derivative.
  bool extra_sigmoid_factor = false;
};

/// Traces and labels for both modalities on one batch.
struct BatchState {
  const ForwardTrace& trace_x;
  const ForwardTrace& trace_y;
  const Matrix& labels_x;  // C × n
  const Matrix& labels_y;  // C × n
  std::span<const PairSample> pairs;
};

/// Gradients of the batch objective with respect to every weight and bias
/// of the target modality's network, the other network held fixed.
LayerGrads backward(const NetworkParams& params, const NetworkConfig& config,
                    const BatchState& batch, const PairwiseLossKind& loss,
                    const ObjectiveWeights& weights, Modality target,
                    const BackwardOptions& options = {});

/// W ← W − lr·multiplier·∂O/∂W, likewise biases. Throws NumericError naming
/// the layer and iteration if a gradient is not finite.
NetworkParams sgd_step(const NetworkParams& params, const LayerGrads& grads,
                       const NetworkConfig& config, double learning_rate,
                       std::size_t iteration = 0);

struct TrainLog {
  std::vector<LossReport> reports;  // one per iteration
  double wall_seconds = 0.0;
  std::uint64_t checksum_x = 0;
  std::uint64_t checksum_y = 0;
  std::size_t shortfall_batches = 0;
};

struct TrainResult {
  NetworkParams params_x;
  NetworkParams params_y;
  TrainLog log;
};

/// Called after each iteration with (iteration index, report).
using TrainObserver = std::function<void(std::size_t, const LossReport&)>;

/// Alternating mini-batch SGD. Each iteration samples a pair batch,
/// updates the image network with the text network fixed, re-runs the image
/// forward pass, then updates the text network on the same batch.
/// `pool` holds the training item indices (empty = every item).
TrainResult train(const MultimodalDataset& ds, const std::vector<std::size_t>& pool,
                  const NetworkConfig& config_x, const NetworkConfig& config_y,
                  const TrainConfig& tc, const TrainObserver& observer = {});

}  // namespace dsmhn

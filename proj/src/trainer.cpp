#include "dsmhn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "dsmhn/codes.hpp"
#include "dsmhn/error.hpp"

namespace dsmhn {

namespace {

constexpr std::size_t kRetryCap = 1000;

bool has_negative_pair(const MultimodalDataset& ds, const std::vector<std::size_t>& pool) {
  std::set<std::vector<double>> patterns;
  for (std::size_t i : pool) {
    const auto r = ds.labels.row(i);
    patterns.emplace(r.begin(), r.end());
  }
  for (auto a = patterns.begin(); a != patterns.end(); ++a)
    for (auto b = std::next(a); b != patterns.end(); ++b)
      if (label_similarity(*a, *b) < 0) return true;
  return false;
}

void check_trace(const ForwardTrace& t, const NetworkConfig& config, const char* which) {
  if (t.pre_activations.size() != config.depth() ||
      t.post_activations.size() != config.depth() + 1)
    throw ShapeError(std::string(which) + " trace depth does not match the network");
  for (std::size_t m = 0; m < config.depth(); ++m)
    if (t.pre_activations[m].rows() != config.layers[m].out_dim ||
        t.post_activations[m].rows() != config.layers[m].in_dim)
      throw ShapeError(std::string(which) + " trace is stale at layer " + std::to_string(m));
}

}  // namespace

TrainConfig TrainConfig::paper_preset(std::size_t code_length) {
  TrainConfig tc;
  tc.loss = PairwiseLossKind::contrastive(2.0 * static_cast<double>(code_length));
  tc.weights = {1.0, 0.5, 0.5};
  tc.learning_rate = 1e-5;
  tc.batch_size = 128;
  tc.iterations = 1000;
  return tc;
}

TrainConfig TrainConfig::desk_preset(std::size_t code_length, PairwiseLoss loss) {
  TrainConfig tc = paper_preset(code_length);
  tc.iterations = 2000;
  tc.learning_rate = desk_learning_rate(loss, code_length);
  return tc;
}

double TrainConfig::desk_learning_rate(PairwiseLoss loss, std::size_t code_length) {
  constexpr double base = 3e-5;
  if (loss != PairwiseLoss::Contrastive) return base;
  const double l = static_cast<double>(code_length == 0 ? 1 : code_length);
  return base / (l * l);
}

void TrainConfig::validate() const {
  loss.validate();
  if (weights.alpha < 0.0 || weights.beta < 0.0 || weights.gamma < 0.0)
    throw ConfigError("alpha, beta and gamma must be nonnegative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 2) throw ConfigError("batch size must be at least 2");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0))
    throw ConfigError("positive fraction must be in [0, 1]");
}

PairBatch sample_pair_batch(const MultimodalDataset& ds, const std::vector<std::size_t>& pool_in,
                            std::size_t n, double frac_pos, Rng& rng) {
  std::vector<std::size_t> pool = pool_in;
  if (pool.empty()) {
    pool.resize(ds.size());
    std::iota(pool.begin(), pool.end(), 0);
  }
  if (pool.empty()) throw ConfigError("cannot sample pairs from an empty dataset");
  const bool negatives = frac_pos < 1.0 && has_negative_pair(ds, pool);

  PairBatch b;
  for (std::size_t k = 0; k < n; ++k) {
    int want = rng.uniform() < frac_pos ? 1 : -1;
    if (want == -1 && !negatives) {
      want = 1;
      b.polarity_shortfall = true;
    }
    std::size_t i = 0, j = 0;
    int s = 0;
    for (std::size_t attempt = 0; attempt < kRetryCap; ++attempt) {
      i = pool[rng.index(pool.size())];
      j = pool[rng.index(pool.size())];
      s = label_similarity(ds.labels.row(i), ds.labels.row(j));
      if (s == want) break;
    }
    if (s != want) b.polarity_shortfall = true;
    b.image_items.push_back(i);
    b.text_items.push_back(j);
    b.pairs.push_back({k, k, s});
  }
  return b;
}

LayerGrads backward(const NetworkParams& params, const NetworkConfig& config,
                    const BatchState& batch, const PairwiseLossKind& loss,
                    const ObjectiveWeights& weights, Modality target,
                    const BackwardOptions& options) {
  check_params(params, config);
  const bool image = target == Modality::Image;
  const ForwardTrace& own = image ? batch.trace_x : batch.trace_y;
  const Matrix& labels = image ? batch.labels_x : batch.labels_y;
  check_trace(own, config, image ? "image" : "text");
  if (batch.trace_x.relaxed_codes.rows() != batch.trace_y.relaxed_codes.rows() ||
      batch.trace_x.relaxed_codes.cols() != batch.trace_y.relaxed_codes.cols())
    throw ShapeError("image and text code batches differ in shape: " +
                     batch.trace_x.relaxed_codes.shape_string() + " vs " +
                     batch.trace_y.relaxed_codes.shape_string());

  const std::size_t depth = config.depth();
  const std::size_t hash = config.hash_layer();
  const std::size_t cls = config.class_layer();
  const Matrix& codes = own.relaxed_codes;

  std::vector<Matrix> delta(depth);

  // Classification layer: sigmoid + cross-entropy cancel to (ĝ − g)/n.
  delta[cls] = cross_entropy_grad_preact(own.class_probs, labels);
  for (double& v : delta[cls].data()) v *= weights.alpha;
  if (options.extra_sigmoid_factor)
    delta[cls] = hadamard(delta[cls], activation_grad(own.pre_activations[cls], Activation::Sigmoid));

  // Hash layer output: path through the classifier, the pairwise terms and
  // the two code penalties.
  Matrix d_codes = matmul_at_b(params.weights[cls], delta[cls]);
  for (const PairSample& p : batch.pairs) {
    if (p.i >= codes.cols() || p.j >= codes.cols())
      throw ShapeError("pair index outside the batch");
    const Vector zx = batch.trace_x.relaxed_codes.column(p.i);
    const Vector zy = batch.trace_y.relaxed_codes.column(p.j);
    const auto [gx, gy] = pairwise_loss_grads(loss, zx, zy, p.s, options.l1_form);
    const Vector& g = image ? gx : gy;
    const std::size_t col = image ? p.i : p.j;
    for (std::size_t b = 0; b < g.size(); ++b) d_codes(b, col) += g[b];
  }
  axpy(d_codes, weights.beta, quantization_grad(codes));
  axpy(d_codes, weights.gamma, balance_grad(codes));
  delta[hash] = hadamard(d_codes, activation_grad(own.pre_activations[hash],
                                                  config.layers[hash].activation));

  for (std::size_t m = hash; m-- > 0;) {
    const Matrix up = matmul_at_b(params.weights[m + 1], delta[m + 1]);
    delta[m] = hadamard(up, activation_grad(own.pre_activations[m], config.layers[m].activation));
  }

  LayerGrads g;
  for (std::size_t m = 0; m < depth; ++m) {
    g.weights.push_back(matmul_a_bt(delta[m], own.post_activations[m]));
    g.biases.push_back(row_sums(delta[m]));
  }
  return g;
}

NetworkParams sgd_step(const NetworkParams& params, const LayerGrads& grads,
                       const NetworkConfig& config, double learning_rate,
                       std::size_t iteration) {
  check_params(params, config);
  if (grads.weights.size() != config.depth() || grads.biases.size() != config.depth())
    throw ShapeError("gradient set does not match the network depth");
  NetworkParams next = params;
  for (std::size_t m = 0; m < config.depth(); ++m) {
    const Matrix& gw = grads.weights[m];
    const Vector& gb = grads.biases[m];
    if (gw.rows() != next.weights[m].rows() || gw.cols() != next.weights[m].cols() ||
        gb.size() != next.biases[m].size())
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(m));
    if (!all_finite(gw.data()) || !all_finite(gb))
      throw NumericError("non-finite gradient at layer " + std::to_string(m) + ", iteration " +
                         std::to_string(iteration));
    const double step = learning_rate * config.layers[m].lr_multiplier;
    axpy(next.weights[m], -step, gw);
    for (std::size_t k = 0; k < gb.size(); ++k) next.biases[m][k] -= step * gb[k];
  }
  return next;
}

TrainResult train(const MultimodalDataset& ds, const std::vector<std::size_t>& pool_in,
                  const NetworkConfig& config_x, const NetworkConfig& config_y,
                  const TrainConfig& tc, const TrainObserver& observer) {
  tc.validate();
  ds.validate();
  if (ds.size() == 0) throw ConfigError("training set is empty");
  config_x.validate();
  config_y.validate();
  if (config_x.input_dim() != ds.dim_x() || config_y.input_dim() != ds.dim_y())
    throw ConfigError("network input dims " + std::to_string(config_x.input_dim()) + "/" +
                      std::to_string(config_y.input_dim()) + " do not match dataset dims " +
                      std::to_string(ds.dim_x()) + "/" + std::to_string(ds.dim_y()));
  if (config_x.code_length != config_y.code_length)
    throw ConfigError("image and text networks must share the code length");
  if (config_x.num_classes != ds.num_classes() || config_y.num_classes != ds.num_classes())
    throw ConfigError("classification width does not match the dataset's " +
                      std::to_string(ds.num_classes()) + " classes");

  std::vector<std::size_t> pool = pool_in;
  if (pool.empty()) {
    pool.resize(ds.size());
    std::iota(pool.begin(), pool.end(), 0);
  }

  Rng master(tc.seed);
  Rng init_x = master.fork();
  Rng init_y = master.fork();
  Rng sampler = master.fork();

  TrainResult result{build_network(config_x, init_x), build_network(config_y, init_y), {}};
  result.log.reports.reserve(tc.iterations);
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t it = 0; it < tc.iterations; ++it) {
    const PairBatch pb =
        sample_pair_batch(ds, pool, tc.batch_size, tc.positive_fraction, sampler);
    if (pb.polarity_shortfall) ++result.log.shortfall_batches;
    const Matrix bx = ds.batch_x(pb.image_items);
    const Matrix by = ds.batch_y(pb.text_items);
    const Matrix gx = ds.batch_labels(pb.image_items);
    const Matrix gy = ds.batch_labels(pb.text_items);

    ForwardTrace tx = forward(result.params_x, config_x, bx);
    const ForwardTrace ty = forward(result.params_y, config_y, by);

    const LossReport report = evaluate_objective(
        {tx.relaxed_codes, ty.relaxed_codes, tx.class_probs, ty.class_probs, gx, gy, pb.pairs},
        tc.loss, tc.weights);
    if (!std::isfinite(report.total))
      throw NumericError("objective is not finite at iteration " + std::to_string(it));

    const LayerGrads grad_x = backward(result.params_x, config_x, {tx, ty, gx, gy, pb.pairs},
                                       tc.loss, tc.weights, Modality::Image);
    result.params_x = sgd_step(result.params_x, grad_x, config_x, tc.learning_rate, it);

    tx = forward(result.params_x, config_x, bx);
    const LayerGrads grad_y = backward(result.params_y, config_y, {tx, ty, gx, gy, pb.pairs},
                                       tc.loss, tc.weights, Modality::Text);
    result.params_y = sgd_step(result.params_y, grad_y, config_y, tc.learning_rate, it);

    result.log.reports.push_back(report);
    if (observer) observer(it, report);
  }

  result.log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.log.checksum_x = params_checksum(result.params_x);
  result.log.checksum_y = params_checksum(result.params_y);
  return result;
}

}  // namespace dsmhn

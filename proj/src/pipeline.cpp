#include "dsmhn/pipeline.hpp"

#include <cmath>

namespace dsmhn {

double code_imbalance(const BinaryCodes& codes) {
  if (codes.count() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t b = 0; b < codes.bits(); ++b) {
    long long sum = 0;
    for (std::size_t k = 0; k < codes.count(); ++k) sum += codes.at(k, b);
    total += std::abs(static_cast<double>(sum) / static_cast<double>(codes.count()));
  }
  return total / static_cast<double>(codes.bits());
}

double quantization_residual(const Matrix& relaxed) {
  if (relaxed.size() == 0) return 0.0;
  double total = 0.0;
  for (double z : relaxed.data()) total += std::abs(std::abs(z) - 1.0);
  return total / static_cast<double>(relaxed.size());
}

BinaryCodes encode(const NetworkParams& params, const NetworkConfig& config, const Matrix& features) {
  return quantize(hash_outputs(params, config, features));
}

BinaryCodes random_codes(std::size_t bits, std::size_t count, Rng& rng) {
  BinaryCodes codes(bits, count);
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t b = 0; b < bits; ++b) codes.set(k, b, (rng.bits() >> 63) != 0);
  return codes;
}

PipelineResult run_pipeline(const RunConfig& config, const TrainObserver& observer) {
  Rng synth_rng(config.synth_seed());
  const MultimodalDataset ds = generate_synthetic(config.synth, synth_rng);
  Rng split_rng(config.split_seed());
  const SplitResult sp = split(ds, config.split, split_rng);

  const auto [cx, cy] =
      default_configs(ds.dim_x(), ds.dim_y(), config.bits, ds.num_classes(), config.hidden);
  PipelineResult r;
  r.trained = train(sp.database, sp.train_indices, cx, cy, config.train, observer);

  const Matrix zq_x = hash_outputs(r.trained.params_x, cx, sp.query.x);
  const Matrix zq_y = hash_outputs(r.trained.params_y, cy, sp.query.y);
  const Matrix zd_x = hash_outputs(r.trained.params_x, cx, sp.database.x);
  const Matrix zd_y = hash_outputs(r.trained.params_y, cy, sp.database.y);
  const BinaryCodes q_x = quantize(zq_x), q_y = quantize(zq_y);
  const BinaryCodes d_x = quantize(zd_x), d_y = quantize(zd_y);

  const Matrix& ql = sp.query.labels;
  const Matrix& dl = sp.database.labels;
  r.image_query_text = evaluate(q_x, ql, d_y, dl, config.ks);
  r.text_query_image = evaluate(q_y, ql, d_x, dl, config.ks);
  r.image_query_image = evaluate(q_x, ql, d_x, dl, config.ks);

  Rng random_rng(config.seed + 3);
  const BinaryCodes rq_x = random_codes(config.bits, q_x.count(), random_rng);
  const BinaryCodes rq_y = random_codes(config.bits, q_y.count(), random_rng);
  const BinaryCodes rd_x = random_codes(config.bits, d_x.count(), random_rng);
  const BinaryCodes rd_y = random_codes(config.bits, d_y.count(), random_rng);
  r.random_image_query_text = evaluate(rq_x, ql, rd_y, dl, config.ks);
  r.random_text_query_image = evaluate(rq_y, ql, rd_x, dl, config.ks);
  r.random_image_query_image = evaluate(rq_x, ql, rd_x, dl, config.ks);

  r.imbalance = 0.5 * (code_imbalance(d_x) + code_imbalance(d_y));
  r.quant_residual = 0.5 * (quantization_residual(zd_x) + quantization_residual(zd_y));
  return r;
}

}  // namespace dsmhn

#pragma once

#include "dsmhn/codes.hpp"
#include "dsmhn/retrieval.hpp"
#include "dsmhn/run_config.hpp"
#include "dsmhn/trainer.hpp"

namespace dsmhn {

/// mean over bits of |mean over items of b|, for ±1 codes.
double code_imbalance(const BinaryCodes& codes);
/// mean over entries of | |z| − 1 |.
double quantization_residual(const Matrix& relaxed);

/// Codes of one modality network for row-per-item features.
BinaryCodes encode(const NetworkParams& params, const NetworkConfig& config, const Matrix& features);

/// Independent uniform ±1 codes.
BinaryCodes random_codes(std::size_t bits, std::size_t count, Rng& rng);

struct PipelineResult {
  TrainResult trained;
  EvalReport image_query_text;
  EvalReport text_query_image;
  EvalReport image_query_image;
  /// Same split and evaluator, uniform random codes in place of trained ones.
  EvalReport random_image_query_text;
  EvalReport random_text_query_image;
  EvalReport random_image_query_image;
  /// Statistics of the trained database codes, averaged over both modalities.
  double imbalance = 0.0;
  double quant_residual = 0.0;
};

/// synth → split → train → encode → evaluate, entirely in memory.
PipelineResult run_pipeline(const RunConfig& config, const TrainObserver& observer = {});

}  // namespace dsmhn

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsmhn/data.hpp"
#include "dsmhn/retrieval.hpp"
#include "dsmhn/trainer.hpp"

namespace dsmhn {

/// Everything one pipeline run needs. Loaded from a JSON file whose schema
/// is versioned ("version": 1); unknown keys are rejected. Every field is
/// optional and defaults to the desk preset.
///
/// Stage seeds derive from the single top-level seed: synthesis uses seed,
/// splitting seed + 1, training seed + 2.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string preset = "desk";
  SynthSpec synth;
  SplitSpec split;
  std::vector<std::size_t> hidden{512, 512};
  std::size_t bits = 16;
  TrainConfig train = TrainConfig::desk_preset(16);
  RetrievalTask task = RetrievalTask::ImageQueryText;
  std::vector<std::size_t> ks{1, 100};

  std::uint64_t synth_seed() const { return seed; }
  std::uint64_t split_seed() const { return seed + 1; }
  std::uint64_t train_seed() const { return seed + 2; }
};

/// Overrides applied on top of a config file, in the order preset → file →
/// flags. Unset members leave the file value in place.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> preset;
  std::optional<std::size_t> bits;
  std::optional<std::string> loss;
  std::optional<std::string> task;
  std::optional<std::vector<std::size_t>> ks;
};

/// Parses JSON text. Throws ConfigError on unknown keys, wrong types, bad
/// values or an unsupported version.
RunConfig parse_run_config(const std::string& json_text, const RunOverrides& overrides = {});
RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const RunOverrides& overrides = {});

/// The effective configuration as JSON (used for log headers).
std::string describe_training(const RunConfig& config);

}  // namespace dsmhn

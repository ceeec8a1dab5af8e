#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "dsmhn/numerics.hpp"
#include "dsmhn/rng.hpp"

namespace dsmhn {

/// Aligned image features, text features and multi-hot labels, one row per
/// instance.
struct MultimodalDataset {
  Matrix x;       // n × d_x
  Matrix y;       // n × d_y
  Matrix labels;  // n × C, entries 0/1

  std::size_t size() const { return labels.rows(); }
  std::size_t dim_x() const { return x.cols(); }
  std::size_t dim_y() const { return y.cols(); }
  std::size_t num_classes() const { return labels.cols(); }

  /// Throws ShapeError / ConfigError on inconsistent blocks or an empty
  /// label row.
  void validate() const;

  MultimodalDataset subset(const std::vector<std::size_t>& indices) const;

  // Column-per-item batches, as consumed by forward().
  Matrix batch_x(const std::vector<std::size_t>& indices) const;
  Matrix batch_y(const std::vector<std::size_t>& indices) const;
  Matrix batch_labels(const std::vector<std::size_t>& indices) const;

  bool operator==(const MultimodalDataset&) const = default;
};

enum class LabelMode { Single, Multi };

struct SynthSpec {
  std::size_t classes = 4;
  std::size_t dim_x = 64;
  std::size_t dim_y = 32;
  std::size_t samples = 1200;
  double noise = 0.15;
  LabelMode label_mode = LabelMode::Single;
  /// Multi mode: probability that each other class co-occurs.
  double cooccurrence = 0.2;

  void validate() const;
};

/// One random unit prototype per class and modality; each sample is the sum
/// of its classes' prototypes plus isotropic Gaussian noise of standard
/// deviation `noise`, independently per modality. Features are rounded to
/// float precision so the dataset survives a save/load round trip exactly.
MultimodalDataset generate_synthetic(const SynthSpec& spec, Rng& rng);

struct SplitSpec {
  /// Fraction of items held out as queries (used when per_class_queries = 0).
  double query_fraction = 0.2;
  /// If nonzero, this many queries are drawn per class instead.
  std::size_t per_class_queries = 0;
  /// Training subset size drawn from the database; 0 = whole database.
  std::size_t train_size = 0;

  void validate() const;
};

struct SplitResult {
  MultimodalDataset query;
  MultimodalDataset database;
  std::vector<std::size_t> train_indices;  // into database
};

SplitResult split(const MultimodalDataset& ds, const SplitSpec& spec, Rng& rng);

/// Sorted random subset of [0, n) of the given size (size 0 or ≥ n: all).
std::vector<std::size_t> sample_train_indices(std::size_t n, std::size_t size, Rng& rng);

/// Dataset file ("DSMD", version 1). Features are stored as 32-bit floats.
void save_dataset(const std::filesystem::path& path, const MultimodalDataset& ds);
MultimodalDataset load_dataset(const std::filesystem::path& path);

/// Plain-text fixture import. First non-comment line: "d_x=A,d_y=B,C=K".
/// Each following line: A image values, B text values, K 0/1 labels,
/// comma-separated. Lines starting with '#' are skipped.
MultimodalDataset import_csv(const std::filesystem::path& path);

}  // namespace dsmhn

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsmhn/codes.hpp"
#include "dsmhn/numerics.hpp"

namespace dsmhn {

enum class RetrievalTask { ImageQueryText, TextQueryImage, ImageQueryImage };

/// "ixt", "txi", "ixi"
std::string to_string(RetrievalTask task);
RetrievalTask parse_task(const std::string& name);

struct RankedList {
  std::size_t query = 0;
  std::vector<std::uint32_t> items;      // database indices, best first
  std::vector<std::uint32_t> distances;  // Hamming distance of each entry
};

/// Database items ordered by Hamming distance to query q, ties by ascending
/// index. Counting sort over the L+1 possible distances.
RankedList rank(const BinaryCodes& queries, std::size_t q, const BinaryCodes& database);

/// Full query × database distance table (row-major), OpenMP kernel.
std::vector<std::uint32_t> distance_table(const BinaryCodes& queries, const BinaryCodes& database);

struct AveragePrecision {
  double value = 0.0;
  bool has_relevant = false;
};

/// (1/R) Σ_{k: rel_k} (relevant in top k)/k over a ranked relevance list;
/// 0 with has_relevant = false when R = 0.
AveragePrecision average_precision(std::span<const std::uint8_t> ranked_relevance);

struct EvalReport {
  double map = 0.0;
  std::size_t queries = 0;
  /// Queries excluded from mAP and the PR curve (no relevant item).
  std::size_t queries_without_relevant = 0;
  std::vector<std::pair<std::size_t, double>> p_at_k;  // (K, precision)
  std::vector<std::pair<double, double>> pr_curve;     // (recall, precision)
};

/// Relevance: sharing at least one label. mAP over the full ranking,
/// averaged over queries with ≥ 1 relevant item. P@K averages
/// (relevant in top K) / min(K, database size) over all queries. The PR
/// curve is 11-point interpolated precision at recall 0.0, 0.1, ..., 1.0.
/// Queries run in parallel; per-query results are merged in query order.
EvalReport evaluate(const BinaryCodes& queries, const Matrix& query_labels,
                    const BinaryCodes& database, const Matrix& db_labels,
                    std::span<const std::size_t> ks);

/// Same computation with a plain loop over queries. Reference for the
/// parallel version and the benchmark.
EvalReport evaluate_serial(const BinaryCodes& queries, const Matrix& query_labels,
                           const BinaryCodes& database, const Matrix& db_labels,
                           std::span<const std::size_t> ks);

/// key = value lines.
std::string format_report(const EvalReport& report, RetrievalTask task, std::size_t bits);
/// Writes report.txt, p_at_k.csv and pr_curve.csv into dir.
void write_report(const std::filesystem::path& dir, const EvalReport& report,
                  RetrievalTask task, std::size_t bits);
/// rankings.csv: query,rank,item,distance
void write_rankings(const std::filesystem::path& path, const BinaryCodes& queries,
                    const BinaryCodes& database);

}  // namespace dsmhn

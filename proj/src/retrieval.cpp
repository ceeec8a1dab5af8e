#include "dsmhn/retrieval.hpp"

#include <bit>
#include <cstdio>
#include <sstream>

#include "dsmhn/binary_io.hpp"
#include "dsmhn/error.hpp"
#include "dsmhn/kernels.hpp"

namespace dsmhn {

namespace {

constexpr int kRecallLevels = 11;

void require_compatible(const BinaryCodes& a, const BinaryCodes& b) {
  if (a.bits() != b.bits())
    throw ShapeError("code length mismatch: queries have " + std::to_string(a.bits()) +
                     " bits, database has " + std::to_string(b.bits()));
}

/// Multi-hot label rows packed into bit sets for a fast shared-label test.
struct LabelBits {
  std::size_t words = 0;
  std::vector<std::uint64_t> bits;

  explicit LabelBits(const Matrix& labels) : words((labels.cols() + 63) / 64) {
    bits.assign(labels.rows() * words, 0);
    for (std::size_t i = 0; i < labels.rows(); ++i)
      for (std::size_t c = 0; c < labels.cols(); ++c)
        if (labels(i, c) > 0.0) bits[i * words + c / 64] |= std::uint64_t{1} << (c % 64);
  }

  bool share(const LabelBits& other, std::size_t i, std::size_t j) const {
    for (std::size_t w = 0; w < words; ++w)
      if ((bits[i * words + w] & other.bits[j * words + w]) != 0) return true;
    return false;
  }
};

struct QueryResult {
  AveragePrecision ap;
  std::vector<std::size_t> hits_at_k;
  std::vector<double> interpolated;  // kRecallLevels entries
};

void rank_into(const BinaryCodes& queries, std::size_t q, const BinaryCodes& db,
               RankedList& out, std::vector<std::uint32_t>& dist,
               std::vector<std::uint32_t>& bucket_start) {
  const std::size_t n = db.count();
  const std::size_t L = db.bits();
  const auto qc = queries.code(q);
  dist.resize(n);
  bucket_start.assign(L + 2, 0);
  for (std::size_t d = 0; d < n; ++d) {
    const auto dc = db.code(d);
    std::uint32_t h = 0;
    for (std::size_t w = 0; w < qc.size(); ++w) h += static_cast<std::uint32_t>(std::popcount(qc[w] ^ dc[w]));
    dist[d] = h;
    ++bucket_start[h + 1];
  }
  for (std::size_t b = 1; b < bucket_start.size(); ++b) bucket_start[b] += bucket_start[b - 1];
  out.query = q;
  out.items.resize(n);
  out.distances.resize(n);
  // Ascending index within each bucket keeps the sort stable.
  for (std::size_t d = 0; d < n; ++d) {
    const std::uint32_t pos = bucket_start[dist[d]]++;
    out.items[pos] = static_cast<std::uint32_t>(d);
    out.distances[pos] = dist[d];
  }
}

QueryResult score_query(const RankedList& ranked, const LabelBits& qbits, const LabelBits& dbits,
                        std::span<const std::size_t> ks, std::vector<std::uint8_t>& rel) {
  const std::size_t n = ranked.items.size();
  rel.resize(n);
  for (std::size_t r = 0; r < n; ++r) rel[r] = dbits.share(qbits, ranked.items[r], ranked.query) ? 1 : 0;

  QueryResult res;
  res.ap = average_precision(rel);

  res.hits_at_k.resize(ks.size());
  for (std::size_t k = 0; k < ks.size(); ++k) {
    const std::size_t top = std::min(ks[k], n);
    std::size_t h = 0;
    for (std::size_t r = 0; r < top; ++r) h += rel[r];
    res.hits_at_k[k] = h;
  }

  res.interpolated.assign(kRecallLevels, 0.0);
  if (!res.ap.has_relevant) return res;
  std::size_t total = 0;
  for (std::uint8_t v : rel) total += v;
  // Suffix maximum of precision; recall is nondecreasing in rank, so the
  // ranks reaching recall ≥ l/10 form a suffix starting at the first rank
  // where 10·hits ≥ l·R.
  std::vector<double> suffix_max(n + 1, 0.0);
  {
    std::vector<std::size_t> hits(n);
    std::size_t h = 0;
    for (std::size_t r = 0; r < n; ++r) hits[r] = (h += rel[r]);
    for (std::size_t r = n; r-- > 0;)
      suffix_max[r] = std::max(suffix_max[r + 1],
                               static_cast<double>(hits[r]) / static_cast<double>(r + 1));
    std::size_t r = 0;
    for (int level = 0; level < kRecallLevels; ++level) {
      while (r < n && 10 * hits[r] < static_cast<std::size_t>(level) * total) ++r;
      res.interpolated[static_cast<std::size_t>(level)] = r < n ? suffix_max[r] : 0.0;
    }
  }
  return res;
}

EvalReport evaluate_impl(const BinaryCodes& queries, const Matrix& query_labels,
                         const BinaryCodes& database, const Matrix& db_labels,
                         std::span<const std::size_t> ks, bool parallel) {
  require_compatible(queries, database);
  if (query_labels.rows() != queries.count() || db_labels.rows() != database.count())
    throw ShapeError("label rows do not match code counts (" +
                     std::to_string(query_labels.rows()) + " vs " + std::to_string(queries.count()) +
                     ", " + std::to_string(db_labels.rows()) + " vs " +
                     std::to_string(database.count()) + ")");
  if (query_labels.cols() != db_labels.cols())
    throw ShapeError("label dimension mismatch: " + std::to_string(query_labels.cols()) + " vs " +
                     std::to_string(db_labels.cols()));
  for (std::size_t k : ks)
    if (k == 0) throw ConfigError("K must be positive");

  const LabelBits qbits(query_labels);
  const LabelBits dbits(db_labels);
  const auto n_q = static_cast<std::ptrdiff_t>(queries.count());
  std::vector<QueryResult> results(queries.count());

#pragma omp parallel if (parallel) num_threads(kernels::thread_count())
  {
    RankedList ranked;
    std::vector<std::uint32_t> dist, buckets;
    std::vector<std::uint8_t> rel;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t q = 0; q < n_q; ++q) {
      rank_into(queries, static_cast<std::size_t>(q), database, ranked, dist, buckets);
      results[static_cast<std::size_t>(q)] = score_query(ranked, qbits, dbits, ks, rel);
    }
  }

  EvalReport report;
  report.queries = queries.count();
  std::vector<double> pk_sum(ks.size(), 0.0);
  std::vector<double> pr_sum(kRecallLevels, 0.0);
  double ap_sum = 0.0;
  std::size_t with_relevant = 0;
  for (const QueryResult& r : results) {
    for (std::size_t k = 0; k < ks.size(); ++k)
      pk_sum[k] += static_cast<double>(r.hits_at_k[k]) /
                   static_cast<double>(std::min(ks[k], database.count()));
    if (!r.ap.has_relevant) {
      ++report.queries_without_relevant;
      continue;
    }
    ++with_relevant;
    ap_sum += r.ap.value;
    for (int l = 0; l < kRecallLevels; ++l) pr_sum[static_cast<std::size_t>(l)] += r.interpolated[static_cast<std::size_t>(l)];
  }
  report.map = with_relevant == 0 ? 0.0 : ap_sum / static_cast<double>(with_relevant);
  for (std::size_t k = 0; k < ks.size(); ++k)
    report.p_at_k.emplace_back(ks[k], report.queries == 0 ? 0.0 : pk_sum[k] / static_cast<double>(report.queries));
  for (int l = 0; l < kRecallLevels; ++l)
    report.pr_curve.emplace_back(
        l / 10.0, with_relevant == 0 ? 0.0 : pr_sum[static_cast<std::size_t>(l)] / static_cast<double>(with_relevant));
  return report;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(RetrievalTask task) {
  switch (task) {
    case RetrievalTask::ImageQueryText: return "ixt";
    case RetrievalTask::TextQueryImage: return "txi";
    case RetrievalTask::ImageQueryImage: return "ixi";
  }
  return "unknown";
}

RetrievalTask parse_task(const std::string& name) {
  if (name == "ixt") return RetrievalTask::ImageQueryText;
  if (name == "txi") return RetrievalTask::TextQueryImage;
  if (name == "ixi") return RetrievalTask::ImageQueryImage;
  throw ConfigError("unknown task \"" + name + "\" (expected ixt|txi|ixi)");
}

RankedList rank(const BinaryCodes& queries, std::size_t q, const BinaryCodes& database) {
  require_compatible(queries, database);
  if (q >= queries.count()) throw ShapeError("query index out of range");
  RankedList out;
  std::vector<std::uint32_t> dist, buckets;
  rank_into(queries, q, database, out, dist, buckets);
  return out;
}

std::vector<std::uint32_t> distance_table(const BinaryCodes& queries, const BinaryCodes& database) {
  require_compatible(queries, database);
  std::vector<std::uint32_t> out(queries.count() * database.count());
  kernels::omp::hamming_table(queries.words(), database.words(), queries.words_per_code(), out);
  return out;
}

AveragePrecision average_precision(std::span<const std::uint8_t> ranked_relevance) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ranked_relevance.size(); ++r) {
    if (ranked_relevance[r] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) return {0.0, false};
  return {sum / static_cast<double>(hits), true};
}

EvalReport evaluate(const BinaryCodes& queries, const Matrix& query_labels,
                    const BinaryCodes& database, const Matrix& db_labels,
                    std::span<const std::size_t> ks) {
  return evaluate_impl(queries, query_labels, database, db_labels, ks, true);
}

EvalReport evaluate_serial(const BinaryCodes& queries, const Matrix& query_labels,
                           const BinaryCodes& database, const Matrix& db_labels,
                           std::span<const std::size_t> ks) {
  return evaluate_impl(queries, query_labels, database, db_labels, ks, false);
}

std::string format_report(const EvalReport& report, RetrievalTask task, std::size_t bits) {
  std::ostringstream os;
  os << "task = " << to_string(task) << "\n";
  os << "bits = " << bits << "\n";
  os << "queries = " << report.queries << "\n";
  os << "queries_without_relevant = " << report.queries_without_relevant << "\n";
  os << "map = " << fmt(report.map) << "\n";
  for (const auto& [k, p] : report.p_at_k) os << "p_at_" << k << " = " << fmt(p) << "\n";
  return os.str();
}

void write_report(const std::filesystem::path& dir, const EvalReport& report,
                  RetrievalTask task, std::size_t bits) {
  io::write_text_atomic(dir / "report.txt", format_report(report, task, bits));
  std::string pk = "k,precision\n";
  for (const auto& [k, p] : report.p_at_k) pk += std::to_string(k) + "," + fmt(p) + "\n";
  io::write_text_atomic(dir / "p_at_k.csv", pk);
  std::string pr = "recall,precision\n";
  for (const auto& [r, p] : report.pr_curve) pr += fmt(r) + "," + fmt(p) + "\n";
  io::write_text_atomic(dir / "pr_curve.csv", pr);
}

void write_rankings(const std::filesystem::path& path, const BinaryCodes& queries,
                    const BinaryCodes& database) {
  std::string out = "query,rank,item,distance\n";
  for (std::size_t q = 0; q < queries.count(); ++q) {
    const RankedList r = rank(queries, q, database);
    for (std::size_t k = 0; k < r.items.size(); ++k)
      out += std::to_string(q) + "," + std::to_string(k) + "," + std::to_string(r.items[k]) + "," +
             std::to_string(r.distances[k]) + "\n";
  }
  io::write_text_atomic(path, out);
}

}  // namespace dsmhn

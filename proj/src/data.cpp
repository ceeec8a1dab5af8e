#include "dsmhn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "dsmhn/binary_io.hpp"
#include "dsmhn/error.hpp"

namespace dsmhn {

namespace {

Matrix gather_columns(const Matrix& rows, const std::vector<std::size_t>& indices) {
  Matrix out(rows.cols(), indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= rows.rows())
      throw ShapeError("item index " + std::to_string(indices[k]) + " out of range");
    const auto r = rows.row(indices[k]);
    for (std::size_t f = 0; f < rows.cols(); ++f) out(f, k) = r[f];
  }
  return out;
}

Matrix gather_rows(const Matrix& rows, const std::vector<std::size_t>& indices) {
  Matrix out(indices.size(), rows.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= rows.rows())
      throw ShapeError("item index " + std::to_string(indices[k]) + " out of range");
    std::ranges::copy(rows.row(indices[k]), out.row(k).begin());
  }
  return out;
}

Vector random_unit(std::size_t dim, Rng& rng) {
  Vector v(dim);
  double norm = 0.0;
  while (norm < 1e-12) {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[rng.index(k)]);
}

}  // namespace

void MultimodalDataset::validate() const {
  if (x.rows() != labels.rows() || y.rows() != labels.rows())
    throw ShapeError("dataset row counts disagree: x " + x.shape_string() + ", y " +
                     y.shape_string() + ", labels " + labels.shape_string());
  for (std::size_t i = 0; i < size(); ++i) {
    bool any = false;
    for (double g : labels.row(i)) {
      if (g != 0.0 && g != 1.0)
        throw ConfigError("label row " + std::to_string(i) + " is not 0/1");
      any = any || g == 1.0;
    }
    if (!any) throw ConfigError("label row " + std::to_string(i) + " has no class");
  }
}

MultimodalDataset MultimodalDataset::subset(const std::vector<std::size_t>& indices) const {
  return {gather_rows(x, indices), gather_rows(y, indices), gather_rows(labels, indices)};
}

Matrix MultimodalDataset::batch_x(const std::vector<std::size_t>& indices) const {
  return gather_columns(x, indices);
}
Matrix MultimodalDataset::batch_y(const std::vector<std::size_t>& indices) const {
  return gather_columns(y, indices);
}
Matrix MultimodalDataset::batch_labels(const std::vector<std::size_t>& indices) const {
  return gather_columns(labels, indices);
}

void SynthSpec::validate() const {
  if (classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
  if (dim_x == 0 || dim_y == 0) throw ConfigError("feature dimensions must be positive");
  if (samples == 0) throw ConfigError("sample count must be positive");
  if (!(noise >= 0.0)) throw ConfigError("noise must be nonnegative");
  if (!(cooccurrence >= 0.0 && cooccurrence <= 1.0))
    throw ConfigError("co-occurrence probability must be in [0, 1]");
}

MultimodalDataset generate_synthetic(const SynthSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<Vector> proto_x, proto_y;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    proto_x.push_back(random_unit(spec.dim_x, rng));
    proto_y.push_back(random_unit(spec.dim_y, rng));
  }
  MultimodalDataset ds{Matrix(spec.samples, spec.dim_x), Matrix(spec.samples, spec.dim_y),
                       Matrix(spec.samples, spec.classes)};
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const std::size_t primary = rng.index(spec.classes);
    ds.labels(i, primary) = 1.0;
    if (spec.label_mode == LabelMode::Multi)
      for (std::size_t c = 0; c < spec.classes; ++c)
        if (c != primary && rng.uniform() < spec.cooccurrence) ds.labels(i, c) = 1.0;

    auto fill = [&](Matrix& feats, const std::vector<Vector>& protos) {
      auto row = feats.row(i);
      for (std::size_t f = 0; f < row.size(); ++f) {
        double v = 0.0;
        for (std::size_t c = 0; c < spec.classes; ++c)
          if (ds.labels(i, c) == 1.0) v += protos[c][f];
        row[f] = static_cast<float>(v + spec.noise * rng.normal());
      }
    };
    fill(ds.x, proto_x);
    fill(ds.y, proto_y);
  }
  return ds;
}

void SplitSpec::validate() const {
  if (!(query_fraction >= 0.0 && query_fraction < 1.0))
    throw ConfigError("query fraction must be in [0, 1)");
}

std::vector<std::size_t> sample_train_indices(std::size_t n, std::size_t size, Rng& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (size == 0 || size >= n) return all;
  shuffle(all, rng);
  all.resize(size);
  std::ranges::sort(all);
  return all;
}

SplitResult split(const MultimodalDataset& ds, const SplitSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t n = ds.size();
  std::vector<bool> is_query(n, false);

  if (spec.per_class_queries > 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
      std::size_t taken = 0;
      for (std::size_t idx : order) {
        if (taken == spec.per_class_queries) break;
        if (!is_query[idx] && ds.labels(idx, c) == 1.0) {
          is_query[idx] = true;
          ++taken;
        }
      }
      if (taken < spec.per_class_queries)
        throw ConfigError("class " + std::to_string(c) + " has only " + std::to_string(taken) +
                          " available members, " + std::to_string(spec.per_class_queries) +
                          " queries requested");
    }
  } else {
    const auto n_query = static_cast<std::size_t>(
        std::floor(spec.query_fraction * static_cast<double>(n) + 0.5));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    for (std::size_t k = 0; k < n_query; ++k) is_query[order[k]] = true;
  }

  std::vector<std::size_t> q_idx, db_idx;
  for (std::size_t i = 0; i < n; ++i) (is_query[i] ? q_idx : db_idx).push_back(i);
  if (db_idx.empty()) throw ConfigError("split leaves an empty database");
  SplitResult r{ds.subset(q_idx), ds.subset(db_idx), {}};
  r.train_indices = sample_train_indices(db_idx.size(), spec.train_size, rng);
  return r;
}

void save_dataset(const std::filesystem::path& path, const MultimodalDataset& ds) {
  ds.validate();
  io::Writer w;
  w.bytes("DSMD");
  w.u32(1);
  w.u64(ds.size());
  w.u32(static_cast<std::uint32_t>(ds.dim_x()));
  w.u32(static_cast<std::uint32_t>(ds.dim_y()));
  w.u32(static_cast<std::uint32_t>(ds.num_classes()));
  for (double v : ds.x.data()) w.f32(static_cast<float>(v));
  for (double v : ds.y.data()) w.f32(static_cast<float>(v));
  for (double g : ds.labels.data()) w.u8(g == 1.0 ? 1 : 0);
  io::write_file_atomic(path, w.buffer());
}

MultimodalDataset load_dataset(const std::filesystem::path& path) {
  io::Reader r(io::read_file(path), "dataset " + path.string());
  r.expect_magic("DSMD");
  const std::uint32_t version = r.u32();
  if (version != 1) r.fail("unsupported version " + std::to_string(version));
  const auto n = static_cast<std::size_t>(r.u64());
  const std::size_t dx = r.u32(), dy = r.u32(), c = r.u32();
  // Cheap size check before allocating.
  const std::size_t expected = n * (dx + dy) * 4 + n * c;
  if (r.remaining() < expected) r.require(expected, "feature and label blocks");
  MultimodalDataset ds{Matrix(n, dx), Matrix(n, dy), Matrix(n, c)};
  for (double& v : ds.x.data()) v = r.f32();
  for (double& v : ds.y.data()) v = r.f32();
  for (double& g : ds.labels.data()) {
    const std::size_t at = r.offset();
    const std::uint8_t b = r.u8();
    if (b > 1)
      throw FormatError("dataset " + path.string() + ": label byte " + std::to_string(b) +
                        " at byte offset " + std::to_string(at));
    g = b;
  }
  r.expect_end();
  try {
    ds.validate();
  } catch (const std::exception& e) {
    throw FormatError("dataset " + path.string() + ": " + e.what());
  }
  return ds;
}

MultimodalDataset import_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) -> FormatError {
    return FormatError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };

  if (!next_line()) throw FormatError(path.string() + ": empty file");
  std::size_t dx = 0, dy = 0, c = 0;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw fail("header field without '=': " + field);
      const std::string key = field.substr(0, eq);
      std::size_t value = 0;
      try {
        value = std::stoul(field.substr(eq + 1));
      } catch (...) {
        throw fail("bad header value in " + field);
      }
      if (key == "d_x") dx = value;
      else if (key == "d_y") dy = value;
      else if (key == "C") c = value;
      else throw fail("unknown header key " + key);
    }
    if (dx == 0 || dy == 0 || c == 0) throw fail("header must declare d_x, d_y and C");
  }

  std::vector<double> xs, ys, gs;
  std::size_t n = 0;
  while (next_line()) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        vals.push_back(std::stod(field));
      } catch (...) {
        throw fail("not a number: " + field);
      }
    }
    if (vals.size() != dx + dy + c)
      throw fail("expected " + std::to_string(dx + dy + c) + " values, got " +
                 std::to_string(vals.size()));
    xs.insert(xs.end(), vals.begin(), vals.begin() + static_cast<long>(dx));
    ys.insert(ys.end(), vals.begin() + static_cast<long>(dx),
              vals.begin() + static_cast<long>(dx + dy));
    gs.insert(gs.end(), vals.begin() + static_cast<long>(dx + dy), vals.end());
    ++n;
  }
  MultimodalDataset ds{Matrix(n, dx, std::move(xs)), Matrix(n, dy, std::move(ys)),
                       Matrix(n, c, std::move(gs))};
  try {
    ds.validate();
  } catch (const std::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return ds;
}

}  // namespace dsmhn

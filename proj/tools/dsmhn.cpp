// dsmhn: synth → train → encode → eval, plus the gradient checker.
//
// Exit status: 0 ok, 1 usage or config error, 2 data or format error,
// 3 numeric failure (non-finite values, gradcheck FAIL).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsmhn/binary_io.hpp"
#include "dsmhn/codes.hpp"
#include "dsmhn/data.hpp"
#include "dsmhn/error.hpp"
#include "dsmhn/gradcheck.hpp"
#include "dsmhn/kernels.hpp"
#include "dsmhn/model.hpp"
#include "dsmhn/pipeline.hpp"
#include "dsmhn/retrieval.hpp"
#include "dsmhn/run_config.hpp"
#include "dsmhn/trainer.hpp"

namespace fs = std::filesystem;
using namespace dsmhn;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Common {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> preset;
  std::optional<std::size_t> bits;
  std::optional<std::string> loss;
  std::optional<std::string> task;
  std::string ks;

  RunConfig load() const {
    RunOverrides o;
    o.seed = seed;
    o.preset = preset;
    o.bits = bits;
    o.loss = loss;
    o.task = task;
    if (!ks.empty()) o.ks = parse_ks(ks);
    std::optional<fs::path> path;
    if (config) path = *config;
    return load_run_config(path, o);
  }

  static std::vector<std::size_t> parse_ks(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(item, &used);
        if (used != item.size() || v <= 0) throw std::invalid_argument(item);
        out.push_back(static_cast<std::size_t>(v));
      } catch (const std::exception&) {
        throw ConfigError("--k expects positive integers separated by commas, got \"" + text + "\"");
      }
    }
    if (out.empty()) throw ConfigError("--k is empty");
    return out;
  }
};

void add_common(CLI::App* app, Common& c, bool with_loss, bool with_eval) {
  app->add_option("--config", c.config, "JSON run config (version 1)");
  app->add_option("--seed", c.seed, "Top-level seed (overrides config)");
  app->add_option("--preset", c.preset, "paper|desk")->check(CLI::IsMember({"paper", "desk"}));
  app->add_option("--bits", c.bits, "Code length L");
  if (with_loss)
    app->add_option("--loss", c.loss, "l1|l2|hinge|contrastive")
        ->check(CLI::IsMember({"l1", "l2", "hinge", "contrastive"}));
  if (with_eval) {
    app->add_option("--task", c.task, "ixt|txi|ixi")->check(CLI::IsMember({"ixt", "txi", "ixi"}));
    app->add_option("--k", c.ks, "P@K cutoffs, e.g. 1,100");
  }
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return fs::path(p.string() + suffix);
}

int cmd_synth(const Common& common, const fs::path& out) {
  const RunConfig c = common.load();
  Rng synth_rng(c.synth_seed());
  const MultimodalDataset ds = generate_synthetic(c.synth, synth_rng);
  Rng split_rng(c.split_seed());
  const SplitResult sp = split(ds, c.split, split_rng);
  save_dataset(out, ds);
  save_dataset(with_suffix(out, ".query"), sp.query);
  save_dataset(with_suffix(out, ".db"), sp.database);
  save_dataset(with_suffix(out, ".train"), sp.database.subset(sp.train_indices));
  std::cout << "wrote " << out.string() << " (" << ds.size() << " items), "
            << sp.query.size() << " queries, " << sp.database.size() << " database, "
            << sp.train_indices.size() << " training\n";
  return kOk;
}

int cmd_train(const Common& common, const fs::path& data, const fs::path& out_dir) {
  const RunConfig c = common.load();
  const MultimodalDataset ds = load_dataset(data);
  const auto [cx, cy] = default_configs(ds.dim_x(), ds.dim_y(), c.bits, ds.num_classes(), c.hidden);

  std::string log = describe_training(c) + "\n";
  const TrainResult r = train(ds, {}, cx, cy, c.train, [&](std::size_t it, const LossReport& rep) {
    nlohmann::json j;
    j["iteration"] = it;
    j["pairwise"] = rep.pairwise;
    j["class_x"] = rep.class_x;
    j["class_y"] = rep.class_y;
    j["quant"] = rep.quant;
    j["balance"] = rep.balance;
    j["total"] = rep.total;
    log += j.dump() + "\n";
  });

  fs::create_directories(out_dir);
  save_checkpoint(out_dir / "image.dsmp", r.params_x);
  save_checkpoint(out_dir / "text.dsmp", r.params_y);
  io::write_text_atomic(out_dir / "train_log.jsonl", log);
  std::printf("trained %zu iterations in %.1f s; checksums %016llx %016llx\n",
              c.train.iterations, r.log.wall_seconds,
              static_cast<unsigned long long>(r.log.checksum_x),
              static_cast<unsigned long long>(r.log.checksum_y));
  if (r.log.shortfall_batches > 0)
    std::printf("warning: %zu batches fell short of the positive-pair fraction\n",
                r.log.shortfall_batches);
  return kOk;
}

int cmd_encode(const fs::path& checkpoint, const fs::path& data, const std::string& modality,
               const fs::path& out) {
  const auto [config, params] = load_checkpoint(checkpoint);
  const MultimodalDataset ds = load_dataset(data);
  const Matrix& features = modality == "x" ? ds.x : ds.y;
  if (features.cols() != config.input_dim())
    throw ShapeError("checkpoint expects input dimension " + std::to_string(config.input_dim()) +
                     ", dataset " + (modality == "x" ? "image" : "text") + " features have " +
                     std::to_string(features.cols()));
  const BinaryCodes codes = encode(params, config, features);
  save_codes(out, codes);
  std::cout << "wrote " << codes.count() << " codes of " << codes.bits() << " bits to "
            << out.string() << "\n";
  return kOk;
}

int cmd_eval(const Common& common, const fs::path& query_codes, const fs::path& query_data,
             const fs::path& db_codes, const fs::path& db_data, const fs::path& out_dir,
             bool dump_rankings) {
  const RunConfig c = common.load();
  const BinaryCodes q = load_codes(query_codes);
  const BinaryCodes d = load_codes(db_codes);
  if (q.bits() != d.bits())
    throw ShapeError("query codes have " + std::to_string(q.bits()) + " bits, database codes " +
                     std::to_string(d.bits()));
  const MultimodalDataset qs = load_dataset(query_data);
  const MultimodalDataset ds = load_dataset(db_data);
  if (qs.size() != q.count())
    throw ShapeError("query labels cover " + std::to_string(qs.size()) + " items, codes " +
                     std::to_string(q.count()));
  if (ds.size() != d.count())
    throw ShapeError("database labels cover " + std::to_string(ds.size()) + " items, codes " +
                     std::to_string(d.count()));
  if (qs.num_classes() != ds.num_classes())
    throw ShapeError("query and database label widths differ");

  const EvalReport report = evaluate(q, qs.labels, d, ds.labels, c.ks);
  fs::create_directories(out_dir);
  write_report(out_dir, report, c.task, q.bits());
  if (dump_rankings) write_rankings(out_dir / "rankings.csv", q, d);
  std::cout << format_report(report, c.task, q.bits());
  return kOk;
}

struct GradcheckArgs {
  std::string loss = "l2";
  std::uint64_t seed = 1;
  std::string dims;
  bool all = false;
  std::string variant = "derived";
  bool corrupt = false;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  GradcheckSpec base;
  base.seed = a.seed;
  base.corrupt = a.corrupt;
  if (a.variant == "printed") {
    base.options.l1_form = L1GradForm::AbsResidual;
    base.options.extra_sigmoid_factor = true;
  }
  if (!a.dims.empty()) {
    const auto d = Common::parse_ks(a.dims);
    if (d.size() != 3) throw ConfigError("--dims expects DX,DY,H");
    base.dim_x = d[0];
    base.dim_y = d[1];
    base.hidden = d[2];
    if (base.hidden < 3) throw ConfigError("--dims hidden width must be at least 3");
  }

  std::vector<PairwiseLoss> losses;
  if (a.all)
    losses = {PairwiseLoss::L1, PairwiseLoss::L2, PairwiseLoss::Hinge, PairwiseLoss::Contrastive};
  else
    losses = {parse_pairwise_loss(a.loss)};

  bool ok = true;
  for (PairwiseLoss l : losses) {
    GradcheckSpec s = base;
    s.loss = default_loss_kind(l, s.bits);
    const GradcheckReport r = run_gradcheck(s);
    std::printf("%s %-11s max_rel_err=%.3e params=%zu worst=%s\n", r.passed ? "PASS" : "FAIL",
                to_string(l).c_str(), r.max_rel_error, r.parameters_checked,
                r.worst_parameter.c_str());
    ok = ok && r.passed;
  }
  return ok ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep supervised multimodal hashing: train, encode and evaluate binary codes"};
  app.require_subcommand(1);

  Common common;
  fs::path out, data, checkpoint, query_codes, query_data, db_codes, db_data;
  std::string modality;
  bool dump_rankings = false;
  GradcheckArgs gc;

  auto* synth = app.add_subcommand("synth", "Generate the synthetic dataset and its split");
  add_common(synth, common, false, false);
  synth->add_option("--out", out, "Dataset path; .query, .db and .train files are written beside it")
      ->required();

  auto* trn = app.add_subcommand("train", "Train both modality networks");
  add_common(trn, common, true, false);
  trn->add_option("--data", data, "Training dataset (DSMD)")->required();
  trn->add_option("--out", out, "Output directory")->required();

  auto* enc = app.add_subcommand("encode", "Binary codes for one modality of a dataset");
  enc->add_option("--checkpoint", checkpoint, "Network checkpoint (DSMP)")->required();
  enc->add_option("--data", data, "Dataset (DSMD)")->required();
  enc->add_option("--modality", modality, "x (image) or y (text)")
      ->required()
      ->check(CLI::IsMember({"x", "y"}));
  enc->add_option("--out", out, "Code file (DSMB)")->required();

  auto* ev = app.add_subcommand("eval", "Hamming ranking metrics");
  add_common(ev, common, false, true);
  ev->add_option("--query-codes", query_codes, "Query codes (DSMB)")->required();
  ev->add_option("--query-data", query_data, "Dataset holding the query labels")->required();
  ev->add_option("--db-codes", db_codes, "Database codes (DSMB)")->required();
  ev->add_option("--db-data", db_data, "Dataset holding the database labels")->required();
  ev->add_option("--out", out, "Report directory")->required();
  ev->add_flag("--dump-rankings", dump_rankings, "Also write rankings.csv");

  auto* grad = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  grad->add_option("--loss", gc.loss, "l1|l2|hinge|contrastive")
      ->check(CLI::IsMember({"l1", "l2", "hinge", "contrastive"}));
  grad->add_option("--seed", gc.seed, "Seed of the random networks and batch");
  grad->add_option("--dims", gc.dims, "DX,DY,H");
  grad->add_flag("--all", gc.all, "Check all four losses");
  grad->add_option("--variant", gc.variant, "derived (implemented) or printed (reference formulas)")
      ->check(CLI::IsMember({"derived", "printed"}));
  grad->add_flag("--corrupt", gc.corrupt, "Perturb one analytic entry (harness self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return cmd_synth(common, out);
    if (*trn) return cmd_train(common, data, out);
    if (*enc) return cmd_encode(checkpoint, data, modality, out);
    if (*ev) return cmd_eval(common, query_codes, query_data, db_codes, db_data, out, dump_rankings);
    if (*grad) return cmd_gradcheck(gc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

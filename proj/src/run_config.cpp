#include "dsmhn/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dsmhn/error.hpp"
#include "dsmhn/gradcheck.hpp"

namespace dsmhn {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!known.contains(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::size_t read_count(const json& obj, const char* key, std::size_t fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError(where + "." + key + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const RunOverrides& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (root.is_null()) root = json::object();
  reject_unknown(root, "config",
                 {"version", "seed", "preset", "synth", "split", "network", "train", "eval"});
  if (root.contains("version") && root.at("version") != 1)
    throw ConfigError("unsupported config version " + root.at("version").dump());

  RunConfig c;
  c.seed = read_count(root, "seed", c.seed, "config");
  read(root, "preset", c.preset, "config");

  if (root.contains("synth")) {
    const json& s = root.at("synth");
    reject_unknown(s, "synth",
                   {"classes", "dim_x", "dim_y", "samples", "noise", "label_mode", "cooccurrence"});
    c.synth.classes = read_count(s, "classes", c.synth.classes, "synth");
    c.synth.dim_x = read_count(s, "dim_x", c.synth.dim_x, "synth");
    c.synth.dim_y = read_count(s, "dim_y", c.synth.dim_y, "synth");
    c.synth.samples = read_count(s, "samples", c.synth.samples, "synth");
    read(s, "noise", c.synth.noise, "synth");
    read(s, "cooccurrence", c.synth.cooccurrence, "synth");
    std::string mode = "single";
    read(s, "label_mode", mode, "synth");
    if (mode == "single") c.synth.label_mode = LabelMode::Single;
    else if (mode == "multi") c.synth.label_mode = LabelMode::Multi;
    else throw ConfigError("synth.label_mode must be \"single\" or \"multi\"");
  }

  if (root.contains("split")) {
    const json& s = root.at("split");
    reject_unknown(s, "split", {"query_fraction", "per_class_queries", "train_size"});
    read(s, "query_fraction", c.split.query_fraction, "split");
    c.split.per_class_queries = read_count(s, "per_class_queries", c.split.per_class_queries, "split");
    c.split.train_size = read_count(s, "train_size", c.split.train_size, "split");
  }

  if (root.contains("network")) {
    const json& n = root.at("network");
    reject_unknown(n, "network", {"hidden", "bits"});
    read(n, "hidden", c.hidden, "network");
    c.bits = read_count(n, "bits", c.bits, "network");
  }

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.preset) c.preset = *overrides.preset;
  if (overrides.bits) c.bits = *overrides.bits;
  if (c.bits == 0) throw ConfigError("bits must be at least 1");

  if (c.preset == "desk") c.train = TrainConfig::desk_preset(c.bits);
  else if (c.preset == "paper") c.train = TrainConfig::paper_preset(c.bits);
  else throw ConfigError("unknown preset \"" + c.preset + "\" (expected paper|desk)");

  std::string loss_name = to_string(c.train.loss.loss);
  std::optional<double> margin;
  bool explicit_lr = false;
  if (root.contains("train")) {
    const json& t = root.at("train");
    reject_unknown(t, "train",
                   {"loss", "margin", "alpha", "beta", "gamma", "learning_rate", "batch_size",
                    "iterations", "positive_fraction"});
    read(t, "loss", loss_name, "train");
    if (t.contains("margin")) {
      double m = 0.0;
      read(t, "margin", m, "train");
      margin = m;
    }
    read(t, "alpha", c.train.weights.alpha, "train");
    read(t, "beta", c.train.weights.beta, "train");
    read(t, "gamma", c.train.weights.gamma, "train");
    read(t, "learning_rate", c.train.learning_rate, "train");
    explicit_lr = t.contains("learning_rate");
    c.train.batch_size = read_count(t, "batch_size", c.train.batch_size, "train");
    c.train.iterations = read_count(t, "iterations", c.train.iterations, "train");
    read(t, "positive_fraction", c.train.positive_fraction, "train");
  }
  if (overrides.loss) loss_name = *overrides.loss;
  c.train.loss = default_loss_kind(parse_pairwise_loss(loss_name), c.bits);
  if (margin) c.train.loss.margin = *margin;
  if (c.preset == "desk" && !explicit_lr)
    c.train.learning_rate = TrainConfig::desk_learning_rate(c.train.loss.loss, c.bits);
  c.train.seed = c.train_seed();

  if (root.contains("eval")) {
    const json& e = root.at("eval");
    reject_unknown(e, "eval", {"task", "ks"});
    std::string task = to_string(c.task);
    read(e, "task", task, "eval");
    c.task = parse_task(task);
    read(e, "ks", c.ks, "eval");
  }
  if (overrides.task) c.task = parse_task(*overrides.task);
  if (overrides.ks) c.ks = *overrides.ks;
  for (std::size_t k : c.ks)
    if (k == 0) throw ConfigError("eval.ks entries must be positive");

  c.synth.validate();
  c.split.validate();
  c.train.validate();
  return c;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const RunOverrides& overrides) {
  if (!path) return parse_run_config("{}", overrides);
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot open config " + path->string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), overrides);
}

std::string describe_training(const RunConfig& c) {
  json j;
  j["record"] = "header";
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["bits"] = c.bits;
  j["hidden"] = c.hidden;
  j["loss"] = to_string(c.train.loss.loss);
  j["margin"] = c.train.loss.margin;
  j["alpha"] = c.train.weights.alpha;
  j["beta"] = c.train.weights.beta;
  j["gamma"] = c.train.weights.gamma;
  j["learning_rate"] = c.train.learning_rate;
  j["batch_size"] = c.train.batch_size;
  j["iterations"] = c.train.iterations;
  j["positive_fraction"] = c.train.positive_fraction;
  j["train_seed"] = c.train.seed;
  return j.dump();
}

}  // namespace dsmhn

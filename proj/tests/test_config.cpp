#include <gtest/gtest.h>

#include <json.hpp>

#include "dsmhn/error.hpp"
#include "dsmhn/run_config.hpp"

using namespace dsmhn;

TEST(RunConfig, EmptyConfigIsDeskPreset) {
  const RunConfig c = parse_run_config("{}");
  EXPECT_EQ(c.preset, "desk");
  EXPECT_EQ(c.bits, 16u);
  EXPECT_EQ(c.train.loss.loss, PairwiseLoss::Contrastive);
  EXPECT_EQ(c.train.loss.margin, 32.0);
  EXPECT_EQ(c.train.learning_rate, TrainConfig::desk_learning_rate(PairwiseLoss::Contrastive, 16));
  EXPECT_EQ(c.train.iterations, 2000u);
  EXPECT_EQ(c.train.seed, c.seed + 2);
  EXPECT_EQ(c.synth.samples, 1200u);
  EXPECT_EQ(c.ks, (std::vector<std::size_t>{1, 100}));
}

TEST(RunConfig, PaperPresetInLogHeader) {
  RunOverrides o;
  o.preset = "paper";
  const auto j = nlohmann::json::parse(describe_training(parse_run_config("{}", o)));
  EXPECT_EQ(j["preset"], "paper");
  EXPECT_EQ(j["alpha"], 1.0);
  EXPECT_EQ(j["beta"], 0.5);
  EXPECT_EQ(j["gamma"], 0.5);
  EXPECT_EQ(j["learning_rate"], 1e-5);
  EXPECT_EQ(j["batch_size"], 128);
  EXPECT_EQ(j["record"], "header");
}

TEST(RunConfig, DeskRateFollowsLossAndBits) {
  RunOverrides o;
  o.loss = "l2";
  o.bits = 32;
  const RunConfig c = parse_run_config("{}", o);
  EXPECT_EQ(c.train.learning_rate, 3e-5);
  o.loss = "contrastive";
  const RunConfig d = parse_run_config("{}", o);
  EXPECT_EQ(d.train.learning_rate, 3e-5 / 1024);
  EXPECT_EQ(d.train.loss.margin, 64.0);
}

TEST(RunConfig, FileValuesThenFlags) {
  const std::string text = R"({"version": 1, "seed": 5,
    "network": {"bits": 8, "hidden": [32]},
    "train": {"loss": "hinge", "learning_rate": 0.01, "iterations": 7, "gamma": 50},
    "eval": {"task": "txi", "ks": [3]}})";
  const RunConfig c = parse_run_config(text);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.bits, 8u);
  EXPECT_EQ(c.hidden, (std::vector<std::size_t>{32}));
  EXPECT_EQ(c.train.loss.loss, PairwiseLoss::Hinge);
  EXPECT_EQ(c.train.loss.margin, 0.5);
  EXPECT_EQ(c.train.learning_rate, 0.01);
  EXPECT_EQ(c.train.iterations, 7u);
  EXPECT_EQ(c.train.weights.gamma, 50.0);
  EXPECT_EQ(c.task, RetrievalTask::TextQueryImage);

  RunOverrides o;
  o.seed = 9;
  o.task = "ixi";
  o.ks = std::vector<std::size_t>{1, 2};
  const RunConfig f = parse_run_config(text, o);
  EXPECT_EQ(f.seed, 9u);
  EXPECT_EQ(f.train.seed, 11u);
  EXPECT_EQ(f.task, RetrievalTask::ImageQueryImage);
  EXPECT_EQ(f.ks, (std::vector<std::size_t>{1, 2}));
}

TEST(RunConfig, Rejections) {
  EXPECT_THROW(parse_run_config(R"({"sede": 1})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"lr": 1}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"version": 2})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"preset": "laptop"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"iterations": -1}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"loss": 3}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"eval": {"ks": [0]}})"), ConfigError);
  EXPECT_THROW(parse_run_config("{"), ConfigError);
  EXPECT_THROW(load_run_config(std::filesystem::path("/nonexistent/config.json")), ConfigError);
}

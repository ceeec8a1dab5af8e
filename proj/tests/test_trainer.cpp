#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "dsmhn/codes.hpp"
#include "dsmhn/data.hpp"
#include "dsmhn/error.hpp"
#include "dsmhn/gradcheck.hpp"
#include "dsmhn/trainer.hpp"

using namespace dsmhn;

namespace {

MultimodalDataset small_dataset(std::size_t classes, std::uint64_t seed, std::size_t n = 200) {
  SynthSpec s;
  s.classes = classes;
  s.samples = n;
  s.dim_x = 8;
  s.dim_y = 6;
  Rng rng(seed);
  return generate_synthetic(s, rng);
}

std::vector<std::size_t> all_items(const MultimodalDataset& ds) {
  std::vector<std::size_t> v(ds.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

namespace dsmhn {
void PrintTo(PairwiseLoss loss, std::ostream* os) { *os << to_string(loss); }
}  // namespace dsmhn

TEST(PairSampling, PolarityExtremes) {
  const MultimodalDataset ds = small_dataset(4, 1);
  Rng rng(2);
  const PairBatch pos = sample_pair_batch(ds, all_items(ds), 64, 1.0, rng);
  ASSERT_EQ(pos.pairs.size(), 64u);
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_EQ(pos.pairs[k].s, 1);
    EXPECT_EQ(label_similarity(ds.labels.row(pos.image_items[k]), ds.labels.row(pos.text_items[k])), 1);
  }
  const PairBatch neg = sample_pair_batch(ds, all_items(ds), 64, 0.0, rng);
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_EQ(neg.pairs[k].s, -1);
    EXPECT_EQ(neg.pairs[k].i, k);
    EXPECT_EQ(neg.pairs[k].j, k);
  }
  EXPECT_FALSE(pos.polarity_shortfall);
  EXPECT_FALSE(neg.polarity_shortfall);
}

TEST(PairSampling, SingleClassFallsBackToPositives) {
  MultimodalDataset ds = small_dataset(2, 3, 30);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ds.labels(i, 0) = 1.0;
    ds.labels(i, 1) = 0.0;
  }
  Rng rng(4);
  const PairBatch b = sample_pair_batch(ds, all_items(ds), 16, 0.5, rng);
  EXPECT_TRUE(b.polarity_shortfall);
  for (const auto& p : b.pairs) EXPECT_EQ(p.s, 1);
}

// Each slot is an independent Bernoulli(0.5) draw, so the positive count is
// Binomial(128, 0.5). P(54 ≤ X ≤ 74) is only about 0.937, so the empirical
// window frequency is compared with the exact binomial mass.
TEST(PairSampling, PositiveCountFollowsBinomial) {
  const MultimodalDataset ds = small_dataset(4, 5);
  const auto pool = all_items(ds);
  std::vector<int> counts;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const PairBatch b = sample_pair_batch(ds, pool, 128, 0.5, rng);
    int pos = 0;
    for (const auto& p : b.pairs) pos += p.s == 1;
    counts.push_back(pos);
  }
  // Exact binomial mass of the window and of the mean.
  double mass = 0.0;
  for (int k = 54; k <= 74; ++k)
    mass += std::exp(std::lgamma(129.0) - std::lgamma(k + 1.0) - std::lgamma(129.0 - k) -
                     128 * std::log(2.0));
  int inside = 0;
  double mean = 0.0;
  for (int c : counts) {
    inside += c >= 54 && c <= 74;
    mean += c;
  }
  mean /= counts.size();
  const double frac = inside / 1000.0;
  // Binomial(1000, mass) has sd ≈ 0.008; allow 4 sd.
  EXPECT_NEAR(frac, mass, 4 * std::sqrt(mass * (1 - mass) / 1000.0));
  EXPECT_NEAR(mean, 64.0, 4 * std::sqrt(32.0 / 1000.0));
}

TEST(Backward, ConstantObjectiveGivesZeroGradients) {
  const NetworkConfig cx = config_from_widths({6, 5, 4, 3});
  const NetworkConfig cy = config_from_widths({5, 5, 4, 3});
  Rng rng(6);
  const NetworkParams px = build_network(cx, rng), py = build_network(cy, rng);
  Matrix bx(6, 3), by(5, 3);
  for (double& v : bx.data()) v = rng.uniform(-1, 1);
  for (double& v : by.data()) v = rng.uniform(-1, 1);
  const ForwardTrace tx = forward(px, cx, bx), ty = forward(py, cy, by);
  const Matrix labels(3, 3, 1.0);
  const LayerGrads g = backward(px, cx, {tx, ty, labels, labels, {}}, PairwiseLossKind::l2(),
                                {0.0, 0.0, 0.0}, Modality::Image);
  for (const Matrix& w : g.weights)
    for (double v : w.data()) EXPECT_EQ(v, 0.0);
  for (const Vector& c : g.biases)
    for (double v : c) EXPECT_EQ(v, 0.0);
}

TEST(Backward, StaleTraceIsShapeError) {
  const NetworkConfig cx = config_from_widths({6, 5, 4, 3});
  const NetworkConfig other = config_from_widths({6, 7, 4, 3});
  Rng rng(7);
  const NetworkParams px = build_network(cx, rng);
  const NetworkParams po = build_network(other, rng);
  const ForwardTrace t = forward(po, other, Matrix(6, 2, 0.1));
  const Matrix labels(3, 2, 1.0);
  EXPECT_THROW(backward(px, cx, {t, t, labels, labels, {}}, PairwiseLossKind::l2(),
                        {1.0, 0.5, 0.5}, Modality::Image),
               ShapeError);
}

// Finite-difference oracle over every parameter of both networks.
class GradcheckAllLosses : public ::testing::TestWithParam<PairwiseLoss> {};

TEST_P(GradcheckAllLosses, PairwiseOnly) {
  GradcheckSpec s;
  s.loss = default_loss_kind(GetParam(), s.bits);
  s.weights = {0.0, 0.0, 0.0};
  const GradcheckReport r = run_gradcheck(s);
  EXPECT_TRUE(r.passed) << r.max_rel_error << " at " << r.worst_parameter;
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST_P(GradcheckAllLosses, Composite) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GradcheckSpec s;
    s.seed = seed;
    s.loss = default_loss_kind(GetParam(), s.bits);
    const GradcheckReport r = run_gradcheck(s);
    EXPECT_TRUE(r.passed) << "seed " << seed << ": " << r.max_rel_error << " at "
                          << r.worst_parameter;
    EXPECT_EQ(r.parameters_checked, 252u);
  }
}

TEST_P(GradcheckAllLosses, PrintedFormsFail) {
  GradcheckSpec s;
  s.loss = default_loss_kind(GetParam(), s.bits);
  s.options = {L1GradForm::AbsResidual, true};
  EXPECT_FALSE(run_gradcheck(s).passed);
}

INSTANTIATE_TEST_SUITE_P(Losses, GradcheckAllLosses,
                         ::testing::Values(PairwiseLoss::L1, PairwiseLoss::L2, PairwiseLoss::Hinge,
                                           PairwiseLoss::Contrastive),
                         [](const auto& info) { return to_string(info.param); });

TEST(Gradcheck, SinglePairOneHiddenLayer) {
  GradcheckSpec s;
  s.batch = 2;
  s.hidden = 3;
  s.weights = {0.0, 0.0, 0.0};
  const GradcheckReport r = run_gradcheck(s);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(Gradcheck, PrintedL1FormFailsAlone) {
  GradcheckSpec s;
  s.loss = PairwiseLossKind::l1();
  s.weights = {0.0, 0.0, 0.0};
  s.options.l1_form = L1GradForm::AbsResidual;
  EXPECT_FALSE(run_gradcheck(s).passed);
}

TEST(Gradcheck, ExtraSigmoidFactorFailsAlone) {
  GradcheckSpec s;
  s.weights = {1.0, 0.0, 0.0};
  s.options.extra_sigmoid_factor = true;
  EXPECT_FALSE(run_gradcheck(s).passed);
}

TEST(Gradcheck, CorruptedGradientIsDetected) {
  GradcheckSpec s;
  s.corrupt = true;
  EXPECT_FALSE(run_gradcheck(s).passed);
}

TEST(SgdStep, Examples) {
  const NetworkConfig c = config_from_widths({3, 2, 2});
  Rng rng(8);
  const NetworkParams p = build_network(c, rng);
  LayerGrads zero{{Matrix(2, 3), Matrix(2, 2)}, {Vector(2), Vector(2)}};
  EXPECT_EQ(sgd_step(p, zero, c, 0.1), p);

  NetworkConfig unit = c;
  for (auto& l : unit.layers) l.lr_multiplier = 1.0;
  LayerGrads g{{Matrix(2, 3, 0.25), Matrix(2, 2, -0.5)}, {Vector(2, 0.125), Vector(2, 1.0)}};
  const NetworkParams q = sgd_step(p, g, unit, 1.0);
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t i = 0; i < p.weights[m].size(); ++i)
      EXPECT_EQ(q.weights[m].data()[i], p.weights[m].data()[i] - g.weights[m].data()[i]);
    for (std::size_t i = 0; i < p.biases[m].size(); ++i)
      EXPECT_EQ(q.biases[m][i], p.biases[m][i] - g.biases[m][i]);
  }

  // Dyadic values keep the two paths exact.
  NetworkParams d = p;
  for (auto& w : d.weights)
    for (double& v : w.data()) v = std::round(v * 64) / 64;
  const NetworkParams half = sgd_step(sgd_step(d, g, unit, 0.5), g, unit, 0.5);
  EXPECT_EQ(half, sgd_step(d, g, unit, 1.0));
}

TEST(SgdStep, NonFiniteGradientNamesLayerAndIteration) {
  const NetworkConfig c = config_from_widths({3, 2, 2});
  Rng rng(9);
  const NetworkParams p = build_network(c, rng);
  LayerGrads g{{Matrix(2, 3), Matrix(2, 2)}, {Vector(2), Vector(2)}};
  g.weights[1](0, 1) = std::numeric_limits<double>::infinity();
  try {
    sgd_step(p, g, c, 0.1, 17);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("layer 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("17"), std::string::npos) << msg;
  }
}

TEST(Train, OneIterationOneReport) {
  const MultimodalDataset ds = small_dataset(4, 10);
  const auto [cx, cy] = default_configs(8, 6, 8, 4, {16});
  TrainConfig tc = TrainConfig::desk_preset(8);
  tc.iterations = 1;
  tc.batch_size = 16;
  const TrainResult r = train(ds, {}, cx, cy, tc);
  EXPECT_EQ(r.log.reports.size(), 1u);
  EXPECT_NEAR(r.log.reports[0].total, r.log.reports[0].recombined(), 1e-9);
  tc.iterations = 0;
  EXPECT_THROW(train(ds, {}, cx, cy, tc), ConfigError);
}

TEST(Train, SameSeedIsBitIdentical) {
  const MultimodalDataset ds = small_dataset(4, 11);
  const auto [cx, cy] = default_configs(8, 6, 8, 4, {16, 16});
  TrainConfig tc = TrainConfig::desk_preset(8, PairwiseLoss::L2);
  tc.iterations = 30;
  tc.batch_size = 32;
  tc.seed = 77;
  const TrainResult a = train(ds, {}, cx, cy, tc);
  const TrainResult b = train(ds, {}, cx, cy, tc);
  EXPECT_EQ(a.params_x, b.params_x);
  EXPECT_EQ(a.params_y, b.params_y);
  EXPECT_EQ(a.log.checksum_x, b.log.checksum_x);
  tc.seed = 78;
  EXPECT_NE(train(ds, {}, cx, cy, tc).params_x, a.params_x);
}

TEST(Train, MismatchedDimsIsConfigError) {
  const MultimodalDataset ds = small_dataset(4, 12);
  const auto [cx, cy] = default_configs(9, 6, 8, 4, {16});
  EXPECT_THROW(train(ds, {}, cx, cy, TrainConfig::desk_preset(8)), ConfigError);
}

// Reference synthetic benchmark data with narrower hidden layers to keep the
// unit suite fast.
TEST(Train, LossDecreasesOverTwoThousandIterations) {
  SynthSpec s;
  Rng data_rng(1);
  const MultimodalDataset ds = generate_synthetic(s, data_rng);
  const auto [cx, cy] = default_configs(s.dim_x, s.dim_y, 16, s.classes, {64, 64});
  TrainConfig tc = TrainConfig::desk_preset(16);
  tc.seed = 3;
  const TrainResult r = train(ds, {}, cx, cy, tc);
  ASSERT_EQ(r.log.reports.size(), 2000u);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    first += r.log.reports[i].total;
    last += r.log.reports[1900 + i].total;
  }
  EXPECT_LT(last, first);
}

TEST(Presets, PaperAndDesk) {
  const TrainConfig p = TrainConfig::paper_preset(16);
  EXPECT_EQ(p.learning_rate, 1e-5);
  EXPECT_EQ(p.batch_size, 128u);
  EXPECT_EQ(p.weights.alpha, 1.0);
  EXPECT_EQ(p.weights.beta, 0.5);
  EXPECT_EQ(p.weights.gamma, 0.5);
  EXPECT_EQ(p.loss.margin, 32.0);
  EXPECT_EQ(TrainConfig::desk_preset(16, PairwiseLoss::L2).learning_rate, 3e-5);
  EXPECT_EQ(TrainConfig::desk_preset(16).learning_rate, 3e-5 / 256);
}

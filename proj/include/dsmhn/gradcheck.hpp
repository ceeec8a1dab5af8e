#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "dsmhn/objective.hpp"
#include "dsmhn/trainer.hpp"

namespace dsmhn {

/// Compares backward() against central finite differences of the batch
/// objective on tiny random networks, for every parameter of both
/// modalities.
struct GradcheckSpec {
  PairwiseLossKind loss = PairwiseLossKind::l2();
  ObjectiveWeights weights{1.0, 0.5, 0.5};
  std::size_t dim_x = 6;
  std::size_t dim_y = 5;
  std::size_t hidden = 8;
  std::size_t bits = 4;
  std::size_t classes = 3;
  std::size_t batch = 4;
  std::uint64_t seed = 1;
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Denominator floor of the relative error, so entries whose true
  /// gradient is ~0 are judged on absolute error tolerance·floor.
  double floor = 1e-3;
  BackwardOptions options;
  /// Harness self-test: perturb one analytic entry before comparing.
  bool corrupt = false;
};

struct GradcheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t parameters_checked = 0;
  /// Draws rejected because a pair, code entry or ReLU input sat inside a
  /// kink neighborhood.
  std::size_t resamples = 0;
};

/// |a − n| / max(|a|, |n|, floor)
double gradcheck_rel_error(double analytic, double numeric, double floor);

/// Throws NumericError if no kink-free draw is found within 100 seeds.
GradcheckReport run_gradcheck(const GradcheckSpec& spec);

/// Margin used for contrastive checks: 2L.
PairwiseLossKind default_loss_kind(PairwiseLoss loss, std::size_t bits);

}  // namespace dsmhn

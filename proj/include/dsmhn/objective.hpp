#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsmhn/numerics.hpp"

namespace dsmhn {

enum class PairwiseLoss { L1, L2, Hinge, Contrastive };

/// A pairwise loss and its margin. The margin is unused for L1/L2; hinge
/// margins live in (0, 1]; contrastive margins are positive and measured in
/// squared-distance units.
struct PairwiseLossKind {
  PairwiseLoss loss = PairwiseLoss::L2;
  double margin = 0.0;

  static PairwiseLossKind l1() { return {PairwiseLoss::L1, 0.0}; }
  static PairwiseLossKind l2() { return {PairwiseLoss::L2, 0.0}; }
  static PairwiseLossKind hinge(double margin = 0.5) { return {PairwiseLoss::Hinge, margin}; }
  /// Default margin 2L: the expected squared distance of independent
  /// uniform ±1 codes.
  static PairwiseLossKind contrastive(double margin) { return {PairwiseLoss::Contrastive, margin}; }

  void validate() const;
};

std::string to_string(PairwiseLoss loss);
/// Accepts "l1", "l2", "hinge", "contrastive".
PairwiseLoss parse_pairwise_loss(const std::string& name);

/// One cross-modal training pair: column i of the image batch, column j of
/// the text batch, and their label similarity s ∈ {−1, +1}.
struct PairSample {
  std::size_t i = 0;
  std::size_t j = 0;
  int s = 1;
};

struct ObjectiveWeights {
  double alpha = 1.0;  // classification
  double beta = 0.5;   // quantization
  double gamma = 0.5;  // bit balance
};

struct LossReport {
  double pairwise = 0.0;
  double class_x = 0.0;
  double class_y = 0.0;
  double quant = 0.0;
  double balance = 0.0;
  double total = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  /// pairwise + α(class_x + class_y) + β·quant + γ·balance
  double recombined() const {
    return pairwise + alpha * (class_x + class_y) + beta * quant + gamma * balance;
  }
};

/// How the L1 subgradient is formed. SignResidual is the derivative of
/// |c − s|. AbsResidual reproduces the printed |c − s|·z/L form; it exists
/// only so the gradient checker can demonstrate that it is wrong.
enum class L1GradForm { SignResidual, AbsResidual };

/// c = z_iᵀ z_j / L
double code_similarity(std::span<const double> z_i, std::span<const double> z_j);

double pairwise_loss(const PairwiseLossKind& kind, std::span<const double> z_i,
                     std::span<const double> z_j, int s);

/// (∂ℓ/∂z_i, ∂ℓ/∂z_j). Kinks take the zero subgradient.
std::pair<Vector, Vector> pairwise_loss_grads(const PairwiseLossKind& kind,
                                              std::span<const double> z_i,
                                              std::span<const double> z_j, int s,
                                              L1GradForm l1_form = L1GradForm::SignResidual);

/// Mean multi-label cross-entropy, probabilities clamped to [1e-12, 1 − 1e-12].
double cross_entropy(const Matrix& class_probs, const Matrix& labels);
/// Gradient of the unweighted mean cross-entropy with respect to the
/// sigmoid pre-activation: (ĝ − g) / n.
Matrix cross_entropy_grad_preact(const Matrix& class_probs, const Matrix& labels);

/// (1/2n)(‖|Z_x| − 1‖² + ‖|Z_y| − 1‖²)
double quantization_loss(const Matrix& z_x, const Matrix& z_y);
/// (1/n)(|z| − 1)·sign(z), sign(0) = 0.
Matrix quantization_grad(const Matrix& z);

/// (1/2n)(‖Z_x 1‖² + ‖Z_y 1‖²)
double balance_loss(const Matrix& z_x, const Matrix& z_y);
/// Every column equals the row sums of z divided by n.
Matrix balance_grad(const Matrix& z);

/// Inputs of the full batch objective. Codes and probabilities are
/// L × n / C × n with one column per batch item; labels match the
/// probabilities.
struct ObjectiveInputs {
  const Matrix& codes_x;
  const Matrix& codes_y;
  const Matrix& probs_x;
  const Matrix& probs_y;
  const Matrix& labels_x;
  const Matrix& labels_y;
  std::span<const PairSample> pairs;
};

/// Sum of pairwise losses over the sampled pairs plus the weighted
/// classification, quantization and balance terms.
LossReport evaluate_objective(const ObjectiveInputs& in, const PairwiseLossKind& kind,
                              const ObjectiveWeights& w);

}  // namespace dsmhn

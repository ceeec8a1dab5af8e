#include "dsmhn/objective.hpp"

#include <algorithm>
#include <cmath>

#include "dsmhn/error.hpp"

namespace dsmhn {

namespace {

constexpr double kProbClamp = 1e-12;

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw ShapeError("code length mismatch: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
}

void require_sign(int s) {
  if (s != 1 && s != -1) throw ConfigError("similarity must be +1 or -1");
}

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    d += diff * diff;
  }
  return d;
}

}  // namespace

void PairwiseLossKind::validate() const {
  if (loss == PairwiseLoss::Hinge && !(margin > 0.0 && margin <= 1.0))
    throw ConfigError("hinge margin must be in (0, 1]");
  if (loss == PairwiseLoss::Contrastive && !(margin > 0.0))
    throw ConfigError("contrastive margin must be positive");
}

std::string to_string(PairwiseLoss loss) {
  switch (loss) {
    case PairwiseLoss::L1: return "l1";
    case PairwiseLoss::L2: return "l2";
    case PairwiseLoss::Hinge: return "hinge";
    case PairwiseLoss::Contrastive: return "contrastive";
  }
  return "unknown";
}

PairwiseLoss parse_pairwise_loss(const std::string& name) {
  if (name == "l1") return PairwiseLoss::L1;
  if (name == "l2") return PairwiseLoss::L2;
  if (name == "hinge") return PairwiseLoss::Hinge;
  if (name == "contrastive") return PairwiseLoss::Contrastive;
  throw ConfigError("unknown loss \"" + name + "\" (expected l1|l2|hinge|contrastive)");
}

double code_similarity(std::span<const double> z_i, std::span<const double> z_j) {
  require_same_length(z_i, z_j);
  double dot = 0.0;
  for (std::size_t k = 0; k < z_i.size(); ++k) dot += z_i[k] * z_j[k];
  return dot / static_cast<double>(z_i.size());
}

double pairwise_loss(const PairwiseLossKind& kind, std::span<const double> z_i,
                     std::span<const double> z_j, int s) {
  require_sign(s);
  const double c = code_similarity(z_i, z_j);
  switch (kind.loss) {
    case PairwiseLoss::L1: return std::abs(c - s);
    case PairwiseLoss::L2: return 0.5 * (c - s) * (c - s);
    case PairwiseLoss::Hinge: {
      const double phi = 0.5 * (c + 1.0);
      return s == 1 ? std::max(0.0, kind.margin - phi) : phi;
    }
    case PairwiseLoss::Contrastive: {
      const double d = squared_distance(z_i, z_j);
      if (s == 1) return d * d;
      const double gap = std::max(0.0, kind.margin - d);
      return gap * gap;
    }
  }
  return 0.0;
}

std::pair<Vector, Vector> pairwise_loss_grads(const PairwiseLossKind& kind,
                                              std::span<const double> z_i,
                                              std::span<const double> z_j, int s,
                                              L1GradForm l1_form) {
  require_sign(s);
  const double c = code_similarity(z_i, z_j);
  const auto L = static_cast<double>(z_i.size());
  const double s_pos = 0.5 * (s + 1);

  // L1, L2 and hinge depend on the codes only through c, so
  // ∂ℓ/∂z_i = ℓ'(c)·z_j/L and ∂ℓ/∂z_j = ℓ'(c)·z_i/L.
  double dl_dc = 0.0;
  switch (kind.loss) {
    case PairwiseLoss::L1:
      dl_dc = l1_form == L1GradForm::SignResidual ? sign0(c - s)
                                                  : (c - s) * sign0(c - s);
      break;
    case PairwiseLoss::L2:
      dl_dc = c - s;
      break;
    case PairwiseLoss::Hinge: {
      const double active = kind.margin - 0.5 * (c + 1.0) > 0.0 ? 1.0 : 0.0;
      dl_dc = 0.5 * (-s_pos * active + (1.0 - s_pos));
      break;
    }
    case PairwiseLoss::Contrastive: {
      const double d = squared_distance(z_i, z_j);
      const double active = kind.margin - d > 0.0 ? 1.0 : 0.0;
      const double scale = 4.0 * (s_pos * d - (1.0 - s_pos) * active * (kind.margin - d));
      Vector gi(z_i.size()), gj(z_i.size());
      for (std::size_t k = 0; k < z_i.size(); ++k) {
        gi[k] = scale * (z_i[k] - z_j[k]);
        gj[k] = -gi[k];
      }
      return {gi, gj};
    }
  }
  Vector gi(z_i.size()), gj(z_i.size());
  for (std::size_t k = 0; k < z_i.size(); ++k) {
    gi[k] = dl_dc * z_j[k] / L;
    gj[k] = dl_dc * z_i[k] / L;
  }
  return {gi, gj};
}

double cross_entropy(const Matrix& class_probs, const Matrix& labels) {
  require_same_shape(class_probs, labels, "cross_entropy");
  if (class_probs.cols() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < class_probs.size(); ++k) {
    const double p = std::clamp(class_probs.data()[k], kProbClamp, 1.0 - kProbClamp);
    const double g = labels.data()[k];
    sum += g * std::log(p) + (1.0 - g) * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(class_probs.cols());
}

Matrix cross_entropy_grad_preact(const Matrix& class_probs, const Matrix& labels) {
  require_same_shape(class_probs, labels, "cross_entropy_grad_preact");
  Matrix g(class_probs.rows(), class_probs.cols());
  const double inv_n = class_probs.cols() == 0 ? 0.0 : 1.0 / static_cast<double>(class_probs.cols());
  for (std::size_t k = 0; k < g.size(); ++k)
    g.data()[k] = inv_n * (class_probs.data()[k] - labels.data()[k]);
  return g;
}

double quantization_loss(const Matrix& z_x, const Matrix& z_y) {
  require_same_shape(z_x, z_y, "quantization_loss");
  if (z_x.cols() == 0) return 0.0;
  double sum = 0.0;
  for (const Matrix* z : {&z_x, &z_y})
    for (double v : z->data()) {
      const double r = std::abs(v) - 1.0;
      sum += r * r;
    }
  return sum / (2.0 * static_cast<double>(z_x.cols()));
}

Matrix quantization_grad(const Matrix& z) {
  Matrix g(z.rows(), z.cols());
  if (z.cols() == 0) return g;
  const double inv_n = 1.0 / static_cast<double>(z.cols());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double v = z.data()[k];
    g.data()[k] = inv_n * (std::abs(v) - 1.0) * sign0(v);
  }
  return g;
}

double balance_loss(const Matrix& z_x, const Matrix& z_y) {
  require_same_shape(z_x, z_y, "balance_loss");
  if (z_x.cols() == 0) return 0.0;
  double sum = 0.0;
  for (const Matrix* z : {&z_x, &z_y})
    for (double r : row_sums(*z)) sum += r * r;
  return sum / (2.0 * static_cast<double>(z_x.cols()));
}

Matrix balance_grad(const Matrix& z) {
  Matrix g(z.rows(), z.cols());
  if (z.cols() == 0) return g;
  const Vector sums = row_sums(z);
  const double inv_n = 1.0 / static_cast<double>(z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (double& v : g.row(r)) v = inv_n * sums[r];
  return g;
}

LossReport evaluate_objective(const ObjectiveInputs& in, const PairwiseLossKind& kind,
                              const ObjectiveWeights& w) {
  LossReport r;
  r.alpha = w.alpha;
  r.beta = w.beta;
  r.gamma = w.gamma;
  for (const PairSample& p : in.pairs) {
    if (p.i >= in.codes_x.cols() || p.j >= in.codes_y.cols())
      throw ShapeError("pair index outside the batch");
    const Vector zi = in.codes_x.column(p.i);
    const Vector zj = in.codes_y.column(p.j);
    r.pairwise += pairwise_loss(kind, zi, zj, p.s);
  }
  r.class_x = cross_entropy(in.probs_x, in.labels_x);
  r.class_y = cross_entropy(in.probs_y, in.labels_y);
  r.quant = quantization_loss(in.codes_x, in.codes_y);
  r.balance = balance_loss(in.codes_x, in.codes_y);
  r.total = r.recombined();
  return r;
}

}  // namespace dsmhn

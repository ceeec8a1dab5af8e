#include "dsmhn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "dsmhn/error.hpp"

namespace dsmhn {

namespace {

constexpr std::size_t kMaxDraws = 100;
constexpr double kPairKink = 1e-3;
constexpr double kCodeKink = 1e-3;
constexpr double kReluKink = 1e-3;

struct Problem {
  NetworkConfig config_x, config_y;
  NetworkParams params_x, params_y;
  Matrix batch_x, batch_y;
  Matrix labels;  // shared by both modalities: column k is one aligned item
  std::vector<PairSample> pairs;
};

Vector flatten(const NetworkParams& p) {
  Vector v;
  for (std::size_t m = 0; m < p.weights.size(); ++m) {
    v.insert(v.end(), p.weights[m].data().begin(), p.weights[m].data().end());
    v.insert(v.end(), p.biases[m].begin(), p.biases[m].end());
  }
  return v;
}

Vector flatten(const LayerGrads& g) {
  Vector v;
  for (std::size_t m = 0; m < g.weights.size(); ++m) {
    v.insert(v.end(), g.weights[m].data().begin(), g.weights[m].data().end());
    v.insert(v.end(), g.biases[m].begin(), g.biases[m].end());
  }
  return v;
}

NetworkParams unflatten(const Vector& v, const NetworkParams& shape) {
  NetworkParams p = shape;
  std::size_t k = 0;
  for (std::size_t m = 0; m < p.weights.size(); ++m) {
    for (double& x : p.weights[m].data()) x = v[k++];
    for (double& x : p.biases[m]) x = v[k++];
  }
  return p;
}

std::string parameter_name(const NetworkParams& shape, std::size_t flat, const char* modality) {
  for (std::size_t m = 0; m < shape.weights.size(); ++m) {
    const std::size_t nw = shape.weights[m].size();
    if (flat < nw) {
      const std::size_t cols = shape.weights[m].cols();
      return std::string(modality) + " W[" + std::to_string(m) + "](" +
             std::to_string(flat / cols) + "," + std::to_string(flat % cols) + ")";
    }
    flat -= nw;
    const std::size_t nb = shape.biases[m].size();
    if (flat < nb)
      return std::string(modality) + " c[" + std::to_string(m) + "](" + std::to_string(flat) + ")";
    flat -= nb;
  }
  return modality;
}

Problem draw_problem(const GradcheckSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  Problem p;
  p.config_x = config_from_widths({spec.dim_x, spec.hidden, spec.hidden - 2, spec.bits, spec.classes});
  p.config_y = config_from_widths({spec.dim_y, spec.hidden, spec.bits, spec.classes});
  p.params_x = build_network(p.config_x, rng);
  p.params_y = build_network(p.config_y, rng);
  // Random biases so ReLU units sit on both sides of the kink.
  for (NetworkParams* params : {&p.params_x, &p.params_y})
    for (Vector& b : params->biases)
      for (double& x : b) x = rng.uniform(-0.3, 0.3);
  p.batch_x = Matrix(spec.dim_x, spec.batch);
  p.batch_y = Matrix(spec.dim_y, spec.batch);
  for (double& x : p.batch_x.data()) x = rng.normal();
  for (double& x : p.batch_y.data()) x = rng.normal();
  p.labels = Matrix(spec.classes, spec.batch);
  for (std::size_t k = 0; k < spec.batch; ++k) {
    p.labels(rng.index(spec.classes), k) = 1.0;
    for (std::size_t c = 0; c < spec.classes; ++c)
      if (rng.uniform() < 0.3) p.labels(c, k) = 1.0;
  }
  // Cross pairs with both polarities present.
  for (std::size_t k = 0; k < spec.batch; ++k)
    p.pairs.push_back({k, (k + 1) % spec.batch, k % 2 == 0 ? 1 : -1});
  return p;
}

bool near_kink(const GradcheckSpec& spec, const Problem& p, const ForwardTrace& tx,
               const ForwardTrace& ty) {
  for (const PairSample& pr : p.pairs) {
    const Vector zi = tx.relaxed_codes.column(pr.i);
    const Vector zj = ty.relaxed_codes.column(pr.j);
    const double c = code_similarity(zi, zj);
    switch (spec.loss.loss) {
      case PairwiseLoss::L1:
        if (std::abs(c - pr.s) < kPairKink) return true;
        break;
      case PairwiseLoss::L2:
        break;
      case PairwiseLoss::Hinge:
        if (std::abs(spec.loss.margin - 0.5 * (c + 1.0)) < kPairKink) return true;
        break;
      case PairwiseLoss::Contrastive: {
        double d = 0.0;
        for (std::size_t b = 0; b < zi.size(); ++b) d += (zi[b] - zj[b]) * (zi[b] - zj[b]);
        if (std::abs(spec.loss.margin - d) < kPairKink) return true;
        break;
      }
    }
  }
  if (spec.weights.beta > 0.0)
    for (const ForwardTrace* t : {&tx, &ty})
      for (double z : t->relaxed_codes.data())
        if (std::abs(z) < kCodeKink) return true;
  const std::pair<const ForwardTrace*, const NetworkConfig*> nets[] = {{&tx, &p.config_x},
                                                                       {&ty, &p.config_y}};
  for (const auto& [trace, config] : nets)
    for (std::size_t m = 0; m < config->depth(); ++m)
      if (config->layers[m].activation == Activation::ReLU)
        for (double v : trace->pre_activations[m].data())
          if (std::abs(v) < kReluKink) return true;
  return false;
}

double objective(const GradcheckSpec& spec, const Problem& p, const NetworkParams& px,
                 const NetworkParams& py) {
  const ForwardTrace tx = forward(px, p.config_x, p.batch_x);
  const ForwardTrace ty = forward(py, p.config_y, p.batch_y);
  return evaluate_objective({tx.relaxed_codes, ty.relaxed_codes, tx.class_probs, ty.class_probs,
                             p.labels, p.labels, p.pairs},
                            spec.loss, spec.weights)
      .total;
}

}  // namespace

double gradcheck_rel_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

PairwiseLossKind default_loss_kind(PairwiseLoss loss, std::size_t bits) {
  switch (loss) {
    case PairwiseLoss::L1: return PairwiseLossKind::l1();
    case PairwiseLoss::L2: return PairwiseLossKind::l2();
    case PairwiseLoss::Hinge: return PairwiseLossKind::hinge(0.5);
    case PairwiseLoss::Contrastive:
      return PairwiseLossKind::contrastive(2.0 * static_cast<double>(bits));
  }
  return PairwiseLossKind::l2();
}

GradcheckReport run_gradcheck(const GradcheckSpec& spec) {
  spec.loss.validate();
  if (spec.hidden < 3 || spec.bits == 0 || spec.classes == 0 || spec.batch < 2 ||
      spec.dim_x == 0 || spec.dim_y == 0)
    throw ConfigError("gradcheck dims: hidden >= 3, batch >= 2, others >= 1");

  GradcheckReport report;
  std::optional<Problem> problem;
  for (std::size_t draw = 0; draw < kMaxDraws; ++draw) {
    Problem p = draw_problem(spec, spec.seed * 7919 + draw);
    const ForwardTrace tx = forward(p.params_x, p.config_x, p.batch_x);
    const ForwardTrace ty = forward(p.params_y, p.config_y, p.batch_y);
    if (!near_kink(spec, p, tx, ty)) {
      problem = std::move(p);
      break;
    }
    ++report.resamples;
  }
  if (!problem) throw NumericError("gradcheck: every draw landed near a kink");
  const Problem& p = *problem;

  const ForwardTrace tx = forward(p.params_x, p.config_x, p.batch_x);
  const ForwardTrace ty = forward(p.params_y, p.config_y, p.batch_y);
  const BatchState state{tx, ty, p.labels, p.labels, p.pairs};

  struct Side {
    const char* name;
    Modality modality;
    const NetworkParams* params;
    const NetworkConfig* config;
  };
  const Side sides[] = {{"image", Modality::Image, &p.params_x, &p.config_x},
                        {"text", Modality::Text, &p.params_y, &p.config_y}};

  for (const Side& side : sides) {
    Vector analytic = flatten(backward(*side.params, *side.config, state, spec.loss, spec.weights,
                                       side.modality, spec.options));
    if (spec.corrupt && side.modality == Modality::Image)
      analytic[0] += 1e-2 * (1.0 + std::abs(analytic[0]));

    const auto f = [&](const Vector& theta) {
      const NetworkParams probe = unflatten(theta, *side.params);
      return side.modality == Modality::Image ? objective(spec, p, probe, p.params_y)
                                              : objective(spec, p, p.params_x, probe);
    };
    const Vector numeric = finite_diff_grad(f, flatten(*side.params), spec.step);

    for (std::size_t k = 0; k < numeric.size(); ++k) {
      const double err = gradcheck_rel_error(analytic[k], numeric[k], spec.floor);
      if (report.worst_parameter.empty() || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_parameter = parameter_name(*side.params, k, side.name);
      }
    }
    report.parameters_checked += numeric.size();
  }
  report.passed = report.max_rel_error < spec.tolerance;
  return report;
}

}  // namespace dsmhn

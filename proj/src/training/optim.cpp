#include <cmath>

#include "wlsa/errors.hpp"
#include "wlsa/training.hpp"

namespace wlsa::training {

Adam::Adam(std::span<const model::Parameter> params, AdamConfig config) : config_(config) {
  for (const auto& p : params) {
    m_.push_back(Tensor::zeros_like(p.value));
    v_.push_back(Tensor::zeros_like(p.value));
  }
}

void Adam::step(std::span<model::Parameter> params, std::span<const Tensor> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw DimensionError("Adam::step: parameter and gradient counts do not match the optimizer state");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].shape() != params[i].value.shape()) {
      throw DimensionError("Adam::step: gradient shape mismatch for '" + params[i].name + "'");
    }
    if (!grads[i].all_finite()) throw NumericalError("non-finite gradient for parameter '" + params[i].name + "'");
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    Tensor& w = params[i].value;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double g = grads[i][j];
      m_[i][j] = config_.beta1 * m_[i][j] + (1.0 - config_.beta1) * g;
      v_[i][j] = config_.beta2 * v_[i][j] + (1.0 - config_.beta2) * g * g;
      w[j] -= config_.lr * (m_[i][j] / c1) / (std::sqrt(v_[i][j] / c2) + config_.eps);
    }
  }
}

double global_norm(std::span<const Tensor> grads) {
  double ss = 0.0;
  for (const auto& g : grads)
    for (double v : g.data()) ss += v * v;
  return std::sqrt(ss);
}

ClipResult clip_global_norm(std::span<Tensor> grads, double max_norm) {
  ClipResult r;
  r.norm_before = global_norm(grads);
  if (r.norm_before > max_norm) {
    const double s = max_norm / r.norm_before;
    for (auto& g : grads)
      for (double& v : g.data()) v *= s;
    r.clipped = true;
  }
  return r;
}

}  // namespace wlsa::training

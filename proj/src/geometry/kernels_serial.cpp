#include <vector>

#include "pair_math.hpp"
#include "wlsa/errors.hpp"
#include "wlsa/kernels.hpp"

namespace wlsa::kernels::serial {

void knn_mean_distance(std::span<const Point2> points, std::size_t k, std::span<double> out) {
  if (k == 0 || points.size() <= k) throw ContractError("knn_mean_distance: need more than k points");
  std::vector<double> scratch(k);
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = detail::knn_mean(points, i, k, scratch.data());
}

void lorentz_logits(Dims dims, std::span<const double> features, std::span<const double> slots,
                    std::span<const double> horizons, const LorentzLogitParams& p, std::span<double> logits) {
  const std::size_t D = dims.width;
  for (std::size_t k = 0; k < dims.slots; ++k) {
    for (std::size_t n = 0; n < dims.points; ++n) {
      logits[k * dims.points + n] =
          detail::lorentz_logit(&features[n * D], &slots[k * D], D, horizons[k * dims.points + n], p);
    }
  }
}

void lorentz_logits_backward(Dims dims, std::span<const double> features, std::span<const double> slots,
                             std::span<const double> horizons, const LorentzLogitParams& p,
                             std::span<const double> grad_logits, std::span<double> grad_features,
                             std::span<double> grad_slots) {
  const std::size_t D = dims.width, N = dims.points, K = dims.slots;
  std::vector<double> delta(K * N * D);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t kn = k * N + n;
      detail::lorentz_logit_grad(&features[n * D], &slots[k * D], D, horizons[kn], p, grad_logits[kn],
                                 &delta[kn * D]);
    }
  }
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < D; ++i) grad_features[n * D + i] += delta[(k * N + n) * D + i];
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t i = 0; i < D; ++i) grad_slots[k * D + i] -= delta[(k * N + n) * D + i];
}

void euclid_logits(Dims dims, std::span<const double> features, std::span<const double> slots,
                   const EuclidLogitParams& p, std::span<double> logits) {
  const std::size_t D = dims.width;
  for (std::size_t k = 0; k < dims.slots; ++k)
    for (std::size_t n = 0; n < dims.points; ++n)
      logits[k * dims.points + n] = detail::euclid_logit(&features[n * D], &slots[k * D], D, p);
}

void euclid_logits_backward(Dims dims, std::span<const double> features, std::span<const double> slots,
                            const EuclidLogitParams& p, std::span<const double> grad_logits,
                            std::span<double> grad_features, std::span<double> grad_slots) {
  const std::size_t D = dims.width, N = dims.points, K = dims.slots;
  std::vector<double> delta(K * N * D);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t kn = k * N + n;
      detail::euclid_logit_grad(&features[n * D], &slots[k * D], D, p, grad_logits[kn], &delta[kn * D]);
    }
  }
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < D; ++i) grad_features[n * D + i] += delta[(k * N + n) * D + i];
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t i = 0; i < D; ++i) grad_slots[k * D + i] -= delta[(k * N + n) * D + i];
}

void poincare_logits(Dims dims, std::span<const double> features, std::span<const double> slots,
                     std::span<const double> slot_radius, const PoincareLogitParams& p, std::span<double> logits) {
  const std::size_t D = dims.width;
  for (std::size_t k = 0; k < dims.slots; ++k)
    for (std::size_t n = 0; n < dims.points; ++n)
      logits[k * dims.points + n] = detail::poincare_logit(&features[n * D], &slots[k * D], D, slot_radius[k], p);
}

void poincare_logits_backward(Dims dims, std::span<const double> features, std::span<const double> slots,
                              std::span<const double> slot_radius, const PoincareLogitParams& p,
                              std::span<const double> grad_logits, std::span<double> grad_features,
                              std::span<double> grad_slots) {
  const std::size_t D = dims.width, N = dims.points, K = dims.slots;
  std::vector<double> du(K * N * D), dv(K * N * D);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t kn = k * N + n;
      detail::poincare_logit_grad(&features[n * D], &slots[k * D], D, slot_radius[k], p, grad_logits[kn],
                                  &du[kn * D], &dv[kn * D]);
    }
  }
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < D; ++i) grad_features[n * D + i] += du[(k * N + n) * D + i];
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t i = 0; i < D; ++i) grad_slots[k * D + i] += dv[(k * N + n) * D + i];
}

}  // namespace wlsa::kernels::serial

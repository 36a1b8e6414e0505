#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pair_math.hpp"
#include "wlsa/errors.hpp"
#include "wlsa/kernels.hpp"

namespace wlsa::kernels {

bool in_parallel_region() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return false;
#endif
}

namespace omp {
namespace {

using Index = std::int64_t;

// Sums the per-pair gradient buffer into per-point and per-slot rows. The
// inner order matches serial:: so the results are identical.
void reduce_pairs(std::size_t N, std::size_t K, std::size_t D, const std::vector<double>& for_points,
                  const std::vector<double>& for_slots, double slot_sign, std::span<double> grad_features,
                  std::span<double> grad_slots) {
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < static_cast<Index>(N); ++n)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < D; ++i) grad_features[n * D + i] += for_points[(k * N + n) * D + i];

#pragma omp parallel for schedule(static)
  for (Index k = 0; k < static_cast<Index>(K); ++k)
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t i = 0; i < D; ++i) {
        if (slot_sign < 0.0) {
          grad_slots[k * D + i] -= for_slots[(k * N + n) * D + i];
        } else {
          grad_slots[k * D + i] += for_slots[(k * N + n) * D + i];
        }
      }
}

}  // namespace

void knn_mean_distance(std::span<const Point2> points, std::size_t k, std::span<double> out) {
  if (k == 0 || points.size() <= k) throw ContractError("knn_mean_distance: need more than k points");
#pragma omp parallel
  {
    std::vector<double> scratch(k);
#pragma omp for schedule(static)
    for (Index i = 0; i < static_cast<Index>(points.size()); ++i) {
      out[i] = detail::knn_mean(points, static_cast<std::size_t>(i), k, scratch.data());
    }
  }
}

void lorentz_logits(Dims dims, std::span<const double> features, std::span<const double> slots,
                    std::span<const double> horizons, const LorentzLogitParams& p, std::span<double> logits) {
  const std::size_t D = dims.width, N = dims.points;
  const Index total = static_cast<Index>(dims.slots * N);
#pragma omp parallel for schedule(static)
  for (Index kn = 0; kn < total; ++kn) {
    const std::size_t k = kn / N, n = kn % N;
    logits[kn] = detail::lorentz_logit(&features[n * D], &slots[k * D], D, horizons[kn], p);
  }
}

void lorentz_logits_backward(Dims dims, std::span<const double> features, std::span<const double> slots,
                             std::span<const double> horizons, const LorentzLogitParams& p,
                             std::span<const double> grad_logits, std::span<double> grad_features,
                             std::span<double> grad_slots) {
  const std::size_t D = dims.width, N = dims.points, K = dims.slots;
  std::vector<double> delta(K * N * D);
  const Index total = static_cast<Index>(K * N);
#pragma omp parallel for schedule(static)
  for (Index kn = 0; kn < total; ++kn) {
    const std::size_t k = kn / N, n = kn % N;
    detail::lorentz_logit_grad(&features[n * D], &slots[k * D], D, horizons[kn], p, grad_logits[kn],
                               &delta[kn * D]);
  }
  reduce_pairs(N, K, D, delta, delta, -1.0, grad_features, grad_slots);
}

void euclid_logits(Dims dims, std::span<const double> features, std::span<const double> slots,
                   const EuclidLogitParams& p, std::span<double> logits) {
  const std::size_t D = dims.width, N = dims.points;
  const Index total = static_cast<Index>(dims.slots * N);
#pragma omp parallel for schedule(static)
  for (Index kn = 0; kn < total; ++kn) {
    const std::size_t k = kn / N, n = kn % N;
    logits[kn] = detail::euclid_logit(&features[n * D], &slots[k * D], D, p);
  }
}

void euclid_logits_backward(Dims dims, std::span<const double> features, std::span<const double> slots,
                            const EuclidLogitParams& p, std::span<const double> grad_logits,
                            std::span<double> grad_features, std::span<double> grad_slots) {
  const std::size_t D = dims.width, N = dims.points, K = dims.slots;
  std::vector<double> delta(K * N * D);
  const Index total = static_cast<Index>(K * N);
#pragma omp parallel for schedule(static)
  for (Index kn = 0; kn < total; ++kn) {
    const std::size_t k = kn / N, n = kn % N;
    detail::euclid_logit_grad(&features[n * D], &slots[k * D], D, p, grad_logits[kn], &delta[kn * D]);
  }
  reduce_pairs(N, K, D, delta, delta, -1.0, grad_features, grad_slots);
}

void poincare_logits(Dims dims, std::span<const double> features, std::span<const double> slots,
                     std::span<const double> slot_radius, const PoincareLogitParams& p, std::span<double> logits) {
  const std::size_t D = dims.width, N = dims.points;
  const Index total = static_cast<Index>(dims.slots * N);
#pragma omp parallel for schedule(static)
  for (Index kn = 0; kn < total; ++kn) {
    const std::size_t k = kn / N, n = kn % N;
    logits[kn] = detail::poincare_logit(&features[n * D], &slots[k * D], D, slot_radius[k], p);
  }
}

void poincare_logits_backward(Dims dims, std::span<const double> features, std::span<const double> slots,
                              std::span<const double> slot_radius, const PoincareLogitParams& p,
                              std::span<const double> grad_logits, std::span<double> grad_features,
                              std::span<double> grad_slots) {
  const std::size_t D = dims.width, N = dims.points, K = dims.slots;
  std::vector<double> du(K * N * D), dv(K * N * D);
  const Index total = static_cast<Index>(K * N);
#pragma omp parallel for schedule(static)
  for (Index kn = 0; kn < total; ++kn) {
    const std::size_t k = kn / N, n = kn % N;
    detail::poincare_logit_grad(&features[n * D], &slots[k * D], D, slot_radius[k], p, grad_logits[kn],
                                &du[kn * D], &dv[kn * D]);
  }
  reduce_pairs(N, K, D, du, dv, 1.0, grad_features, grad_slots);
}

}  // namespace omp
}  // namespace wlsa::kernels

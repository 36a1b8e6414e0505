#pragma once

#include <cstddef>
#include <span>

#include "wlsa/geometry.hpp"

// Batched geometry kernels behind the attention ops and density estimation.
//
// Every kernel exists twice: `serial` is the straightforward reference and
// `omp` distributes the outer loop with OpenMP. Both use the same per-element
// arithmetic and the same reduction order, so their results are bitwise equal.
//
// Matrix layout is row-major throughout:
//   features  N×D, slots K×D, logits K×N (slot-major, one column per point).
// For the Lorentzian and Euclidean kernels D = 1 + d with the time coordinate
// in column 0.
namespace wlsa::kernels {

struct LorentzLogitParams {
  geometry::ConeParams cone;
  double lambda_cone = 0.5;
  double tau_temp = 0.1;
};

struct EuclidLogitParams {
  double eps = geometry::kEps;
  double tau_temp = 0.1;
};

struct PoincareLogitParams {
  double lambda_cone = 0.5;
  double tau_temp = 0.1;
  /// Width of the radius window of the alignment bonus.
  double bonus_width = 0.6;
};

struct Dims {
  std::size_t points;  // N
  std::size_t slots;   // K
  std::size_t width;   // D
};

#define WLSA_KERNEL_DECLS                                                                                          \
  void knn_mean_distance(std::span<const Point2> points, std::size_t k, std::span<double> out);                  \
                                                                                                                 \
  /* logits[k,n] = (−|d_L(f_n, s_k)| + λ·tanh(cone(f_n, s_k, h[k,n]))) / τ_temp */                              \
  void lorentz_logits(Dims dims, std::span<const double> features, std::span<const double> slots,                \
                      std::span<const double> horizons, const LorentzLogitParams& p, std::span<double> logits);  \
  /* Accumulates into grad_features (N×D) and grad_slots (K×D). */                                              \
  void lorentz_logits_backward(Dims dims, std::span<const double> features, std::span<const double> slots,       \
                               std::span<const double> horizons, const LorentzLogitParams& p,                    \
                               std::span<const double> grad_logits, std::span<double> grad_features,             \
                               std::span<double> grad_slots);                                                    \
                                                                                                                 \
  /* logits[k,n] = −√(‖f_n − s_k‖² + ε) / τ_temp */                                                              \
  void euclid_logits(Dims dims, std::span<const double> features, std::span<const double> slots,                 \
                     const EuclidLogitParams& p, std::span<double> logits);                                      \
  void euclid_logits_backward(Dims dims, std::span<const double> features, std::span<const double> slots,        \
                              const EuclidLogitParams& p, std::span<const double> grad_logits,                   \
                              std::span<double> grad_features, std::span<double> grad_slots);                    \
                                                                                                                 \
  /* logits[k,n] = (−d_H(f_n, s_k) + λ·(1 − |‖f_n‖ − radius[k]| / width)) / τ_temp */                            \
  void poincare_logits(Dims dims, std::span<const double> features, std::span<const double> slots,               \
                       std::span<const double> slot_radius, const PoincareLogitParams& p,                        \
                       std::span<double> logits);                                                                \
  void poincare_logits_backward(Dims dims, std::span<const double> features, std::span<const double> slots,      \
                                std::span<const double> slot_radius, const PoincareLogitParams& p,               \
                                std::span<const double> grad_logits, std::span<double> grad_features,            \
                                std::span<double> grad_slots);

namespace serial {
WLSA_KERNEL_DECLS
}  // namespace serial

namespace omp {
WLSA_KERNEL_DECLS
}  // namespace omp

#undef WLSA_KERNEL_DECLS

/// True when the caller is already inside an OpenMP parallel region, in which
/// case the model falls back to the serial kernels.
bool in_parallel_region();

}  // namespace wlsa::kernels

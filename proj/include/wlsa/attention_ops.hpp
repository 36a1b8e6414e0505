#pragma once

#include <vector>

#include "wlsa/graph.hpp"
#include "wlsa/kernels.hpp"

// Fused, differentiable attention-logit ops over the geometry kernels. Each
// produces K×N logits from features (N×D) and slots (K×D).
namespace wlsa::grad {

enum class KernelRoute {
  kAuto,      // OpenMP unless already inside a parallel region
  kSerial,
  kParallel,
};

/// horizons is K×N and carries no gradient.
Var lorentz_logits(Var features, Var slots, const Tensor& horizons, const kernels::LorentzLogitParams& params,
                   KernelRoute route = KernelRoute::kAuto);

Var euclid_logits(Var features, Var slots, const kernels::EuclidLogitParams& params,
                  KernelRoute route = KernelRoute::kAuto);

/// slot_radius holds one target radius per slot.
Var poincare_logits(Var features, Var slots, std::vector<double> slot_radius,
                    const kernels::PoincareLogitParams& params, KernelRoute route = KernelRoute::kAuto);

}  // namespace wlsa::grad

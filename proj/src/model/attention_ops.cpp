#include "wlsa/attention_ops.hpp"

#include <string>

#include "wlsa/errors.hpp"

namespace wlsa::grad {
namespace {

bool use_parallel(KernelRoute route) {
  switch (route) {
    case KernelRoute::kSerial:
      return false;
    case KernelRoute::kParallel:
      return true;
    case KernelRoute::kAuto:
      break;
  }
  return !kernels::in_parallel_region();
}

kernels::Dims check_dims(Var features, Var slots, const char* op) {
  const Tensor& f = features.value();
  const Tensor& s = slots.value();
  if (f.rank() != 2 || s.rank() != 2 || f.cols() != s.cols()) {
    throw DimensionError(std::string(op) + ": features " + shape_string(f.shape()) + " and slots " +
                         shape_string(s.shape()) + " must be rank 2 with equal widths");
  }
  if (&features.graph() != &slots.graph()) throw ContractError(std::string(op) + ": operands in different graphs");
  return {f.rows(), s.rows(), f.cols()};
}

}  // namespace

Var lorentz_logits(Var features, Var slots, const Tensor& horizons, const kernels::LorentzLogitParams& params,
                   KernelRoute route) {
  const kernels::Dims dims = check_dims(features, slots, "lorentz_logits");
  if (horizons.size() != dims.slots * dims.points) {
    throw DimensionError("lorentz_logits: horizons must be " + std::to_string(dims.slots) + "x" +
                         std::to_string(dims.points));
  }
  const bool par = use_parallel(route);
  Tensor out({dims.slots, dims.points});
  if (par) {
    kernels::omp::lorentz_logits(dims, features.value().data(), slots.value().data(), horizons.data(), params,
                                 out.data());
  } else {
    kernels::serial::lorentz_logits(dims, features.value().data(), slots.value().data(), horizons.data(), params,
                                    out.data());
  }
  return features.graph().record(std::move(out), {features, slots}, [=](const BackwardContext& ctx) {
    Tensor gf(ctx.in_values[0]->shape());
    Tensor gs(ctx.in_values[1]->shape());
    auto backward = par ? kernels::omp::lorentz_logits_backward : kernels::serial::lorentz_logits_backward;
    backward(dims, ctx.in_values[0]->data(), ctx.in_values[1]->data(), horizons.data(), params,
             ctx.out_grad.data(), gf.data(), gs.data());
    if (Tensor* g = ctx.in_grads[0])
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += gf[i];
    if (Tensor* g = ctx.in_grads[1])
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += gs[i];
  });
}

Var euclid_logits(Var features, Var slots, const kernels::EuclidLogitParams& params, KernelRoute route) {
  const kernels::Dims dims = check_dims(features, slots, "euclid_logits");
  const bool par = use_parallel(route);
  Tensor out({dims.slots, dims.points});
  if (par) {
    kernels::omp::euclid_logits(dims, features.value().data(), slots.value().data(), params, out.data());
  } else {
    kernels::serial::euclid_logits(dims, features.value().data(), slots.value().data(), params, out.data());
  }
  return features.graph().record(std::move(out), {features, slots}, [=](const BackwardContext& ctx) {
    Tensor gf(ctx.in_values[0]->shape());
    Tensor gs(ctx.in_values[1]->shape());
    auto backward = par ? kernels::omp::euclid_logits_backward : kernels::serial::euclid_logits_backward;
    backward(dims, ctx.in_values[0]->data(), ctx.in_values[1]->data(), params, ctx.out_grad.data(), gf.data(),
             gs.data());
    if (Tensor* g = ctx.in_grads[0])
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += gf[i];
    if (Tensor* g = ctx.in_grads[1])
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += gs[i];
  });
}

Var poincare_logits(Var features, Var slots, std::vector<double> slot_radius,
                    const kernels::PoincareLogitParams& params, KernelRoute route) {
  const kernels::Dims dims = check_dims(features, slots, "poincare_logits");
  if (slot_radius.size() != dims.slots) throw DimensionError("poincare_logits: one radius per slot required");
  const bool par = use_parallel(route);
  Tensor out({dims.slots, dims.points});
  if (par) {
    kernels::omp::poincare_logits(dims, features.value().data(), slots.value().data(), slot_radius, params,
                                  out.data());
  } else {
    kernels::serial::poincare_logits(dims, features.value().data(), slots.value().data(), slot_radius, params,
                                     out.data());
  }
  return features.graph().record(
      std::move(out), {features, slots}, [=, radius = std::move(slot_radius)](const BackwardContext& ctx) {
        Tensor gf(ctx.in_values[0]->shape());
        Tensor gs(ctx.in_values[1]->shape());
        auto backward = par ? kernels::omp::poincare_logits_backward : kernels::serial::poincare_logits_backward;
        backward(dims, ctx.in_values[0]->data(), ctx.in_values[1]->data(), radius, params, ctx.out_grad.data(),
                 gf.data(), gs.data());
        if (Tensor* g = ctx.in_grads[0])
          for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += gf[i];
        if (Tensor* g = ctx.in_grads[1])
          for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += gs[i];
      });
}

}  // namespace wlsa::grad

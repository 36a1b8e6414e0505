#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "wlsa/kernels.hpp"
#include "wlsa/random.hpp"

using namespace wlsa;

namespace {

struct Problem {
  kernels::Dims dims;
  std::vector<double> features, slots, horizons, grad_logits;
  std::vector<Point2> points;
};

Problem make_problem(std::size_t n) {
  Problem p{{n, 9, 33}, {}, {}, {}, {}, {}};
  Rng rng(7);
  p.features.resize(n * 33);
  p.slots.resize(9 * 33);
  p.horizons.resize(9 * n);
  p.grad_logits.resize(9 * n);
  for (auto& v : p.features) v = rng.normal(0.0, 1.0);
  for (auto& v : p.slots) v = rng.normal(0.0, 1.0);
  for (auto& v : p.horizons) v = rng.uniform(0.15, 1.05);
  for (auto& v : p.grad_logits) v = rng.normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) p.points.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
  return p;
}

template <bool Parallel>
void BM_LorentzForwardBackward(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  const kernels::LorentzLogitParams params;
  std::vector<double> logits(9 * p.dims.points), gf(p.features.size()), gs(p.slots.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::lorentz_logits(p.dims, p.features, p.slots, p.horizons, params, logits);
      kernels::omp::lorentz_logits_backward(p.dims, p.features, p.slots, p.horizons, params, p.grad_logits, gf, gs);
    } else {
      kernels::serial::lorentz_logits(p.dims, p.features, p.slots, p.horizons, params, logits);
      kernels::serial::lorentz_logits_backward(p.dims, p.features, p.slots, p.horizons, params, p.grad_logits, gf,
                                               gs);
    }
    benchmark::DoNotOptimize(gs.data());
  }
}

template <bool Parallel>
void BM_EuclidForwardBackward(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  const kernels::EuclidLogitParams params;
  std::vector<double> logits(9 * p.dims.points), gf(p.features.size()), gs(p.slots.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::euclid_logits(p.dims, p.features, p.slots, params, logits);
      kernels::omp::euclid_logits_backward(p.dims, p.features, p.slots, params, p.grad_logits, gf, gs);
    } else {
      kernels::serial::euclid_logits(p.dims, p.features, p.slots, params, logits);
      kernels::serial::euclid_logits_backward(p.dims, p.features, p.slots, params, p.grad_logits, gf, gs);
    }
    benchmark::DoNotOptimize(gs.data());
  }
}

// Rows rescaled into the unit ball, norm ≤ 0.9.
std::vector<double> to_ball(std::vector<double> rows, std::size_t width) {
  for (std::size_t r = 0; r < rows.size() / width; ++r) {
    double n2 = 0.0;
    for (std::size_t c = 0; c < width; ++c) n2 += rows[r * width + c] * rows[r * width + c];
    const double s = 0.9 * (0.2 + 0.8 * static_cast<double>(r % 5) / 4.0) / std::sqrt(n2);
    for (std::size_t c = 0; c < width; ++c) rows[r * width + c] *= s;
  }
  return rows;
}

template <bool Parallel>
void BM_PoincareForwardBackward(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  const kernels::Dims dims{p.dims.points, p.dims.slots, 32};
  const auto features = to_ball({p.features.begin(), p.features.begin() + dims.points * 32}, 32);
  const auto slots = to_ball({p.slots.begin(), p.slots.begin() + dims.slots * 32}, 32);
  const std::vector<double> radius{0.2, 0.5, 0.8, 0.2, 0.5, 0.8, 0.2, 0.5, 0.8};
  const kernels::PoincareLogitParams params;
  std::vector<double> logits(9 * dims.points), gf(features.size()), gs(slots.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::poincare_logits(dims, features, slots, radius, params, logits);
      kernels::omp::poincare_logits_backward(dims, features, slots, radius, params, p.grad_logits, gf, gs);
    } else {
      kernels::serial::poincare_logits(dims, features, slots, radius, params, logits);
      kernels::serial::poincare_logits_backward(dims, features, slots, radius, params, p.grad_logits, gf, gs);
    }
    benchmark::DoNotOptimize(gs.data());
  }
}

template <bool Parallel>
void BM_KnnDensity(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(p.points.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::knn_mean_distance(p.points, 5, out);
    } else {
      kernels::serial::knn_mean_distance(p.points, 5, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_LorentzForwardBackward<false>)->Arg(64)->Arg(400)->Arg(2000);
BENCHMARK(BM_LorentzForwardBackward<true>)->Arg(64)->Arg(400)->Arg(2000);
BENCHMARK(BM_EuclidForwardBackward<false>)->Arg(64)->Arg(400)->Arg(2000);
BENCHMARK(BM_EuclidForwardBackward<true>)->Arg(64)->Arg(400)->Arg(2000);
BENCHMARK(BM_PoincareForwardBackward<false>)->Arg(64)->Arg(400)->Arg(2000);
BENCHMARK(BM_PoincareForwardBackward<true>)->Arg(64)->Arg(400)->Arg(2000);
BENCHMARK(BM_KnnDensity<false>)->Arg(64)->Arg(400)->Arg(2000);
BENCHMARK(BM_KnnDensity<true>)->Arg(64)->Arg(400)->Arg(2000);

BENCHMARK_MAIN();

#include "wlsa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wlsa/errors.hpp"
#include "wlsa/kernels.hpp"

namespace wlsa::geometry {
namespace {

void require_same_dim(const LorentzianEvent& a, const LorentzianEvent& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("events have spatial dimensions " + std::to_string(a.dim()) + " and " +
                         std::to_string(b.dim()));
  }
}

double relu(double v) { return v > 0.0 ? v : 0.0; }

std::vector<double> clamp_to_ball(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  double n2 = 0.0;
  for (double x : out) n2 += x * x;
  const double n = std::sqrt(n2);
  if (n > kBallClamp) {
    for (double& x : out) x *= kBallClamp / n;
  }
  return out;
}

}  // namespace

const char* to_string(Separation s) {
  switch (s) {
    case Separation::kTimelike:
      return "timelike";
    case Separation::kSpacelike:
      return "spacelike";
    case Separation::kLightlike:
      return "lightlike";
  }
  return "?";
}

void ConeParams::validate() const {
  if (!(base_horizons[0] > base_horizons[1] && base_horizons[1] > base_horizons[2])) {
    throw ContractError("base horizons must be strictly decreasing");
  }
  if (past_penalty <= 0.0 || spacelike_penalty <= 0.0) throw ContractError("cone penalties must be positive");
  if (eps <= 0.0) throw ContractError("cone eps must be positive");
}

double minkowski_inner(const LorentzianEvent& a, const LorentzianEvent& b) {
  require_same_dim(a, b);
  double spatial = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) spatial += a.x[i] * b.x[i];
  return a.t * b.t - spatial;
}

double squared_interval(const LorentzianEvent& a, const LorentzianEvent& b) {
  require_same_dim(a, b);
  const double dt = a.t - b.t;
  double spatial = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.x[i] - b.x[i];
    spatial += d * d;
  }
  return dt * dt - spatial;
}

double proper_time_distance(const LorentzianEvent& a, const LorentzianEvent& b, double eps) {
  const double q = squared_interval(a, b);
  if (q == 0.0) return 0.0;
  const double mag = std::sqrt(std::abs(q) + eps);
  return q > 0.0 ? mag : -mag;
}

Separation classify(const LorentzianEvent& a, const LorentzianEvent& b, double tol) {
  const double q = squared_interval(a, b);
  if (q > tol) return Separation::kTimelike;
  if (q < -tol) return Separation::kSpacelike;
  return Separation::kLightlike;
}

bool in_future_cone(const LorentzianEvent& p, const LorentzianEvent& x) {
  return x.t > p.t && squared_interval(x, p) >= 0.0;
}

double adaptive_horizon(std::size_t level, double density, const ConeParams& params) {
  if (level >= params.base_horizons.size()) {
    throw ContractError("level index " + std::to_string(level) + " out of range");
  }
  return params.base_horizons[level] + params.horizon_scale * (density - 0.5);
}

double cone_score(double tau, double r, double h, const ConeParams& params) {
  const double abs_tau = std::abs(tau);
  return h - r / (abs_tau + params.eps) - params.past_penalty * relu(-tau) -
         params.spacelike_penalty * relu(r - abs_tau);
}

double cone_score(const LorentzianEvent& feature, const LorentzianEvent& slot, double h, const ConeParams& params) {
  require_same_dim(feature, slot);
  double r2 = 0.0;
  for (std::size_t i = 0; i < feature.dim(); ++i) {
    const double d = feature.x[i] - slot.x[i];
    r2 += d * d;
  }
  return cone_score(feature.t - slot.t, std::sqrt(r2), h, params);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("euclidean_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double poincare_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("poincare_distance: dimension mismatch");
  const auto uc = clamp_to_ball(u);
  const auto vc = clamp_to_ball(v);
  double nu2 = 0.0, nv2 = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i < uc.size(); ++i) {
    nu2 += uc[i] * uc[i];
    nv2 += vc[i] * vc[i];
    d2 += (uc[i] - vc[i]) * (uc[i] - vc[i]);
  }
  if (nu2 >= 1.0 || nv2 >= 1.0) throw ContractError("poincare_distance: point outside the unit ball");
  if (d2 == 0.0) return 0.0;
  return std::acosh(1.0 + 2.0 * d2 / ((1.0 - nu2) * (1.0 - nv2)));
}

std::vector<double> minmax_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.5);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  // Rounding noise on a degenerate set must not be stretched to [0, 1].
  if (range <= 1e-12 * std::max(1.0, std::abs(*hi))) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

DensityEstimate knn_density(std::span<const Point2> points, std::size_t k) {
  if (k == 0) throw ContractError("knn_density: k must be positive");
  if (points.size() <= k) {
    throw ContractError("knn_density: need more than k=" + std::to_string(k) + " points, got " +
                        std::to_string(points.size()));
  }
  DensityEstimate est;
  est.raw.resize(points.size());
  if (kernels::in_parallel_region()) {
    kernels::serial::knn_mean_distance(points, k, est.raw);
  } else {
    kernels::omp::knn_mean_distance(points, k, est.raw);
  }
  est.normalized = minmax_normalize(est.raw);
  return est;
}

}  // namespace wlsa::geometry

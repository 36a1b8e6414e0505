#pragma once

// Per-pair arithmetic shared by the serial and OpenMP kernels.

#include <cmath>
#include <cstddef>

#include "wlsa/geometry.hpp"
#include "wlsa/kernels.hpp"

namespace wlsa::kernels::detail {

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct LorentzTerms {
  double tau;
  double r;
  double q;
  double dist;  // |d_L|
  double cone;
};

inline LorentzTerms lorentz_terms(const double* f, const double* s, std::size_t width, double h,
                                  const LorentzLogitParams& p) {
  LorentzTerms out{};
  out.tau = f[0] - s[0];
  double sp = 0.0;
  for (std::size_t i = 1; i < width; ++i) {
    const double d = f[i] - s[i];
    sp += d * d;
  }
  out.r = std::sqrt(sp);
  out.q = out.tau * out.tau - sp;
  out.dist = out.q == 0.0 ? 0.0 : std::sqrt(std::abs(out.q) + p.cone.eps);
  out.cone = geometry::cone_score(out.tau, out.r, h, p.cone);
  return out;
}

inline double lorentz_logit(const double* f, const double* s, std::size_t width, double h,
                            const LorentzLogitParams& p) {
  const LorentzTerms t = lorentz_terms(f, s, width, h, p);
  return (-t.dist + p.lambda_cone * std::tanh(t.cone)) / p.tau_temp;
}

// Writes d logit / dΔ (Δ = f − s) scaled by g into ddelta[0..width).
inline void lorentz_logit_grad(const double* f, const double* s, std::size_t width, double h,
                               const LorentzLogitParams& p, double g, double* ddelta) {
  const LorentzTerms t = lorentz_terms(f, s, width, h, p);
  const double abs_tau = std::abs(t.tau);
  const double sgn_tau = sign(t.tau);
  const double denom = abs_tau + p.cone.eps;

  // −dist/T
  const double d_dist_dq = t.q == 0.0 ? 0.0 : sign(t.q) / (2.0 * t.dist);
  const double g_q = -g / p.tau_temp * d_dist_dq;

  // λ·tanh(c)/T
  const double th = std::tanh(t.cone);
  const double g_c = g * p.lambda_cone * (1.0 - th * th) / p.tau_temp;
  const bool outside = t.r > abs_tau;
  const double dc_dr = -1.0 / denom - (outside ? p.cone.spacelike_penalty : 0.0);
  const double dc_dtau = t.r * sgn_tau / (denom * denom) + (t.tau < 0.0 ? p.cone.past_penalty : 0.0) +
                         (outside ? p.cone.spacelike_penalty * sgn_tau : 0.0);

  ddelta[0] = g_q * 2.0 * t.tau + g_c * dc_dtau;
  const double g_r = t.r > 0.0 ? g_c * dc_dr / t.r : 0.0;
  for (std::size_t i = 1; i < width; ++i) {
    const double d = f[i] - s[i];
    ddelta[i] = g_q * (-2.0 * d) + g_r * d;
  }
}

inline double euclid_logit(const double* f, const double* s, std::size_t width, const EuclidLogitParams& p) {
  double ss = 0.0;
  for (std::size_t i = 0; i < width; ++i) {
    const double d = f[i] - s[i];
    ss += d * d;
  }
  return -std::sqrt(ss + p.eps) / p.tau_temp;
}

inline void euclid_logit_grad(const double* f, const double* s, std::size_t width, const EuclidLogitParams& p,
                              double g, double* ddelta) {
  double ss = 0.0;
  for (std::size_t i = 0; i < width; ++i) {
    const double d = f[i] - s[i];
    ss += d * d;
  }
  const double dist = std::sqrt(ss + p.eps);
  const double c = -g / (p.tau_temp * dist);
  for (std::size_t i = 0; i < width; ++i) ddelta[i] = c * (f[i] - s[i]);
}

struct PoincareTerms {
  double nu2, nv2, duv2;
  double arg;   // 1 + 2‖u−v‖²/((1−‖u‖²)(1−‖v‖²))
  double dist;  // arcosh(arg)
  double nu;    // ‖u‖
};

inline PoincareTerms poincare_terms(const double* u, const double* v, std::size_t width) {
  PoincareTerms t{};
  for (std::size_t i = 0; i < width; ++i) {
    t.nu2 += u[i] * u[i];
    t.nv2 += v[i] * v[i];
    const double d = u[i] - v[i];
    t.duv2 += d * d;
  }
  t.arg = 1.0 + 2.0 * t.duv2 / ((1.0 - t.nu2) * (1.0 - t.nv2));
  t.dist = std::acosh(t.arg);
  t.nu = std::sqrt(t.nu2);
  return t;
}

inline double poincare_logit(const double* u, const double* v, std::size_t width, double radius,
                             const PoincareLogitParams& p) {
  const PoincareTerms t = poincare_terms(u, v, width);
  const double bonus = p.lambda_cone * (1.0 - std::abs(t.nu - radius) / p.bonus_width);
  return (-t.dist + bonus) / p.tau_temp;
}

inline void poincare_logit_grad(const double* u, const double* v, std::size_t width, double radius,
                                const PoincareLogitParams& p, double g, double* du, double* dv) {
  const PoincareTerms t = poincare_terms(u, v, width);
  const double bu = 1.0 - t.nu2;
  const double bv = 1.0 - t.nv2;
  // d arcosh(x)/dx = 1/√(x²−1); zero at coincidence where the distance has a cusp.
  const double x2m1 = t.arg * t.arg - 1.0;
  const double dd_darg = x2m1 > 1e-24 ? 1.0 / std::sqrt(x2m1) : 0.0;
  const double g_arg = -g / p.tau_temp * dd_darg;
  const double g_nu = t.nu > 0.0 ? -g / p.tau_temp * p.lambda_cone / p.bonus_width * sign(t.nu - radius) / t.nu
                                 : 0.0;
  for (std::size_t i = 0; i < width; ++i) {
    const double d = u[i] - v[i];
    const double darg_du = 4.0 * d / (bu * bv) + 4.0 * t.duv2 * u[i] / (bu * bu * bv);
    const double darg_dv = -4.0 * d / (bu * bv) + 4.0 * t.duv2 * v[i] / (bu * bv * bv);
    du[i] = g_arg * darg_du + g_nu * u[i];
    dv[i] = g_arg * darg_dv;
  }
}

inline double knn_mean(std::span<const Point2> points, std::size_t i, std::size_t k, double* scratch) {
  // scratch holds the k smallest distances seen so far, ascending.
  std::size_t filled = 0;
  const Point2 pi = points[i];
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (j == i) continue;
    const double dx = points[j].x - pi.x;
    const double dy = points[j].y - pi.y;
    const double d = std::sqrt(dx * dx + dy * dy);
    if (filled < k) {
      std::size_t pos = filled++;
      while (pos > 0 && scratch[pos - 1] > d) {
        scratch[pos] = scratch[pos - 1];
        --pos;
      }
      scratch[pos] = d;
    } else if (d < scratch[k - 1]) {
      std::size_t pos = k - 1;
      while (pos > 0 && scratch[pos - 1] > d) {
        scratch[pos] = scratch[pos - 1];
        --pos;
      }
      scratch[pos] = d;
    }
  }
  double s = 0.0;
  for (std::size_t m = 0; m < k; ++m) s += scratch[m];
  return s / static_cast<double>(k);
}

}  // namespace wlsa::kernels::detail

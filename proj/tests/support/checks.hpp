#pragma once

// Randomised property checks shared by the unit tests and the acceptance
// runner. Each returns pass/fail plus a one-line detail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "fd.hpp"
#include "op_catalog.hpp"
#include "wlsa/geometry.hpp"
#include "wlsa/metrics.hpp"
#include "wlsa/model.hpp"

namespace wlsa::testing {

struct CheckResult {
  bool pass = true;
  std::string detail;
};

inline std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// ---------------------------------------------------------------- geometry

inline geometry::LorentzianEvent random_event(Rng& rng, std::size_t dim, double scale = 2.0) {
  geometry::LorentzianEvent e;
  e.t = rng.uniform(-scale, scale);
  for (std::size_t i = 0; i < dim; ++i) e.x.push_back(rng.uniform(-scale, scale));
  return e;
}

/// ⟨e_t, e_t⟩ = 1, ⟨e_i, e_i⟩ = −1, distinct basis vectors orthogonal.
inline CheckResult check_signature(std::size_t dim = 32) {
  auto basis = [dim](std::size_t k) {
    geometry::LorentzianEvent e{0.0, std::vector<double>(dim, 0.0)};
    if (k == 0) e.t = 1.0;
    else e.x[k - 1] = 1.0;
    return e;
  };
  for (std::size_t a = 0; a <= dim; ++a) {
    for (std::size_t b = 0; b <= dim; ++b) {
      const double want = a != b ? 0.0 : (a == 0 ? 1.0 : -1.0);
      if (geometry::minkowski_inner(basis(a), basis(b)) != want)
        return {false, fmt("basis pair (%zu,%zu) wrong", a, b)};
    }
  }
  return {true, fmt("signature (+,-x%zu) on the basis", dim)};
}

/// x ∈ C⁺(p) implies p ∉ C⁺(x); the cone score differs by exactly the past
/// penalty between τ and −τ inside the cone.
inline CheckResult check_cone_asymmetry(Rng& rng, std::size_t trials = 10000) {
  const geometry::ConeParams params;
  std::size_t in_cone = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const auto p = random_event(rng, 3);
    const auto x = random_event(rng, 3);
    if (geometry::in_future_cone(p, x)) {
      ++in_cone;
      if (geometry::in_future_cone(x, p)) return {false, "future cone membership is symmetric for a pair"};
    }
    const double tau = rng.uniform(0.01, 3.0);
    const double r = rng.uniform(0.0, tau);
    const double h = rng.uniform(0.0, 1.0);
    const double fwd = geometry::cone_score(tau, r, h, params);
    const double back = geometry::cone_score(-tau, r, h, params);
    if (std::abs((fwd - back) - params.past_penalty * tau) > 1e-9 * std::max(1.0, std::abs(fwd)))
      return {false, fmt("cone score gap %.17g != %.17g", fwd - back, params.past_penalty * tau)};
  }
  if (in_cone == 0) return {false, "no sampled pair fell inside a future cone"};
  return {true, fmt("%zu of %zu pairs inside a cone, none reversed", in_cone, trials)};
}

/// classify(a, b) agrees with the sign of d_L(a, b) and is symmetric.
inline CheckResult check_classify_sign(Rng& rng, std::size_t pairs = 10000) {
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < pairs; ++i) {
    auto a = random_event(rng, 2);
    auto b = random_event(rng, 2);
    if (i % 10 == 0) {
      // Exact light-like pair: Δ = (c·3, c·(0, ±3)) with dyadic c.
      const double c = std::ldexp(1.0, rng.uniform_int(-3, 3));
      b = a;
      b.t += 3 * c;
      b.x[1] += (rng.bernoulli(0.5) ? 3 : -3) * c;
    }
    const auto cls = geometry::classify(a, b);
    if (cls != geometry::classify(b, a)) return {false, "classify is not symmetric"};
    const double d = geometry::proper_time_distance(a, b);
    const double q = geometry::squared_interval(a, b);
    bool ok = false;
    switch (cls) {
      case geometry::Separation::kTimelike:
        ok = d > 0.0;
        ++counts[0];
        break;
      case geometry::Separation::kSpacelike:
        ok = d < 0.0;
        ++counts[1];
        break;
      case geometry::Separation::kLightlike:
        ok = std::abs(q) <= geometry::kLightlikeTol && (q != 0.0 || d == 0.0);
        ++counts[2];
        break;
    }
    if (!ok) return {false, fmt("pair %zu: class %s but d_L = %.17g", i, geometry::to_string(cls), d)};
  }
  return {true, fmt("%zu timelike, %zu spacelike, %zu lightlike", counts[0], counts[1], counts[2])};
}

inline std::vector<double> random_ball_point(Rng& rng, std::size_t dim, double max_norm) {
  std::vector<double> v(dim);
  double n2 = 0.0;
  for (double& x : v) {
    x = rng.normal(0.0, 1.0);
    n2 += x * x;
  }
  const double s = rng.uniform(0.0, max_norm) / std::sqrt(n2);
  for (double& x : v) x *= s;
  return v;
}

inline CheckResult check_poincare_triangle(Rng& rng, std::size_t triples = 1000) {
  double worst = -1e300;
  for (std::size_t i = 0; i < triples; ++i) {
    const double reach = i % 2 == 0 ? 0.9 : 0.999;
    const auto u = random_ball_point(rng, 4, reach);
    const auto v = random_ball_point(rng, 4, reach);
    const auto w = random_ball_point(rng, 4, reach);
    const double uv = geometry::poincare_distance(u, v), vw = geometry::poincare_distance(v, w);
    const double uw = geometry::poincare_distance(u, w);
    const double slack = uw - (uv + vw);
    worst = std::max(worst, slack);
    if (slack > 1e-9 * std::max(1.0, uw)) return {false, fmt("triple %zu violates by %.3g", i, slack)};
    if (geometry::poincare_distance(v, u) != uv) return {false, "distance is not symmetric"};
    if (geometry::poincare_distance(u, u) != 0.0) return {false, "d(u, u) != 0"};
    if (!(uv >= 0.0)) return {false, "negative distance"};
  }
  return {true, fmt("max slack %.3g over %zu triples", worst, triples)};
}

/// Three slots share a spatial position at the level times. Squared Euclidean
/// distances differ only through the temporal offsets, and the Lorentzian
/// interval changes sign between two slots whenever r lies strictly between
/// their temporal gaps.
inline CheckResult check_worked_example(Rng& rng, std::size_t trials = 1000) {
  const double times[3] = {1.0, 2.5, 4.0};
  std::size_t flips = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t dim = 32;
    std::vector<double> mu(dim), x(dim);
    for (std::size_t i = 0; i < dim; ++i) mu[i] = rng.normal(0.0, 1.0);
    const double target_r = rng.uniform(0.0, 4.0);
    std::vector<double> dir(dim);
    double n2 = 0.0;
    for (double& d : dir) {
      d = rng.normal(0.0, 1.0);
      n2 += d * d;
    }
    for (std::size_t i = 0; i < dim; ++i) x[i] = mu[i] + dir[i] * target_r / std::sqrt(n2);
    const geometry::LorentzianEvent f{rng.uniform(0.0, 6.0), x};
    const double r = geometry::euclidean_distance(x, mu);

    double d2[3], q[3];
    for (int j = 0; j < 3; ++j) {
      std::vector<double> fe{f.t}, se{times[j]};
      fe.insert(fe.end(), x.begin(), x.end());
      se.insert(se.end(), mu.begin(), mu.end());
      const double d = geometry::euclidean_distance(fe, se);
      d2[j] = d * d;
      q[j] = geometry::squared_interval(f, {times[j], mu});
    }
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        const double lhs = d2[j] - d2[k];
        const double rhs = (f.t - times[j]) * (f.t - times[j]) - (f.t - times[k]) * (f.t - times[k]);
        if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, d2[j] + d2[k]))
          return {false, fmt("trial %zu: Euclidean gap %.17g vs temporal %.17g", trial, lhs, rhs)};
        const double gj = std::abs(f.t - times[j]), gk = std::abs(f.t - times[k]);
        if (gj < r && r < gk) {
          ++flips;
          if (!(q[j] < 0.0 && q[k] > 0.0)) return {false, fmt("trial %zu: interval signs do not flip", trial)};
        }
      }
    }
  }
  if (flips == 0) return {false, "no trial placed r between two temporal gaps"};
  return {true, fmt("identity held on %zu features, %zu sign flips", trials, flips)};
}

// ---------------------------------------------------------------- metrics

/// Pair-counting ARI straight from the definition (Hubert–Arabie form).
inline double ari_by_pairs(const std::vector<int>& pred, const std::vector<int>& truth) {
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = i + 1; j < pred.size(); ++j) {
      const bool sp = pred[i] == pred[j], st = truth[i] == truth[j];
      if (sp && st) ++a;
      else if (sp) ++b;
      else if (st) ++c;
      else ++d;
    }
  }
  const double den = (a + b) * (b + d) + (a + c) * (c + d);
  if (den == 0.0) return 1.0;
  return 2.0 * (a * d - b * c) / den;
}

/// All set partitions of n items as restricted-growth label strings.
inline std::vector<std::vector<int>> set_partitions(std::size_t n) {
  std::vector<std::vector<int>> out;
  std::vector<int> labels(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_label) {
    if (i == n) {
      out.push_back(labels);
      return;
    }
    for (int l = 0; l <= max_label + 1; ++l) {
      labels[i] = l;
      rec(i + 1, std::max(max_label, l));
    }
  };
  labels[0] = 0;
  rec(1, 0);
  return out;
}

/// Every pair of partitions for n ≤ 7; for n = 8 every truth partition
/// against `sampled_preds` random labelings.
inline CheckResult check_ari_exhaustive(Rng& rng, std::size_t sampled_preds = 200) {
  std::size_t instances = 0;
  double worst = 0.0;
  auto compare = [&](const std::vector<int>& p, const std::vector<int>& t) {
    ++instances;
    const double err = std::abs(metrics::adjusted_rand_index(p, t) - ari_by_pairs(p, t));
    worst = std::max(worst, err);
    return err <= 1e-12;
  };
  for (std::size_t n = 2; n <= 7; ++n) {
    const auto parts = set_partitions(n);
    for (const auto& p : parts)
      for (const auto& t : parts)
        if (!compare(p, t)) return {false, fmt("mismatch at n=%zu", n)};
  }
  for (const auto& t : set_partitions(8)) {
    for (std::size_t s = 0; s < sampled_preds / 20; ++s) {
      std::vector<int> p(8);
      for (int& l : p) l = rng.uniform_int(0, 7);
      if (!compare(p, t)) return {false, "mismatch at n=8"};
    }
  }
  return {true, fmt("%zu instances, max |diff| %.2g", instances, worst)};
}

inline double brute_force_assignment(const std::vector<std::vector<double>>& cost) {
  std::vector<std::size_t> perm(cost.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += cost[i][perm[i]];
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline CheckResult check_hungarian_bruteforce(Rng& rng, std::size_t cases_per_n = 1000) {
  std::size_t total = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::size_t c = 0; c < cases_per_n; ++c) {
      std::vector<std::vector<double>> cost(n, std::vector<double>(n));
      const bool integer = c % 2 == 0;  // integer costs exercise ties
      for (auto& row : cost)
        for (double& v : row) v = integer ? rng.uniform_int(0, 4) : rng.uniform(-5.0, 5.0);
      const auto res = metrics::hungarian(cost);
      std::vector<bool> used(n, false);
      double recomputed = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (res.assignment[i] >= n || used[res.assignment[i]]) return {false, "assignment is not a permutation"};
        used[res.assignment[i]] = true;
        recomputed += cost[i][res.assignment[i]];
      }
      const double best = brute_force_assignment(cost);
      if (std::abs(res.cost - best) > 1e-9 || std::abs(recomputed - best) > 1e-9)
        return {false, fmt("n=%zu: hungarian %.17g vs brute force %.17g", n, res.cost, best)};
      ++total;
    }
  }
  return {true, fmt("%zu matrices, n = 1..5", total)};
}

/// Relabelled perfect predictions keep ARI at 1 but lose level accuracy.
inline CheckResult check_level_accuracy_noninvariance() {
  const std::vector<int> truth{0, 1, 1, 2, 2, 2, 2, 1, 0, 2};
  std::vector<int> rotated;
  for (int t : truth) rotated.push_back((t + 1) % 3);
  const double acc_same = metrics::level_accuracy(truth, truth);
  const double acc_rot = metrics::level_accuracy(rotated, truth);
  const double ari_rot = metrics::adjusted_rand_index(rotated, truth);
  const bool ok = acc_same == 1.0 && acc_rot == 0.0 && std::abs(ari_rot - 1.0) < 1e-12;
  return {ok, fmt("identity %.3f, relabelled %.3f (ARI %.3f)", acc_same, acc_rot, ari_rot)};
}

// ---------------------------------------------------------------- gradients

/// Every op in the catalogue over `instances` random inputs, all coordinates.
inline CheckResult check_op_gradients(std::size_t instances = 100, double tol = 1e-4) {
  double worst = 0.0;
  std::string worst_op;
  const auto ops = op_catalog();
  for (std::size_t o = 0; o < ops.size(); ++o) {
    Rng rng(1000 + o);
    for (std::size_t i = 0; i < instances; ++i) {
      const double e = make_probe(rng, ops[o].op, ops[o].inputs(rng)).max_error();
      if (e > worst) {
        worst = e;
        worst_op = ops[o].name;
      }
    }
  }
  return {worst < tol, fmt("%zu ops x %zu instances, max rel err %.2e (%s)", ops.size(), instances, worst,
                           worst_op.c_str())};
}

inline scenes::Scene random_small_scene(Rng& rng, std::size_t n = 5) {
  scenes::Scene s;
  for (std::size_t i = 0; i < n; ++i) {
    s.points.push_back({rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)});
    s.object_id.push_back(static_cast<int>(i % 3));
    s.level_id.push_back(static_cast<int>(i % 3));
  }
  return s;
}

inline double model_loss(const model::WorldlineModel& m, const model::SceneInput& input) {
  grad::Graph g;
  return model::forward(g, m, input).loss.value().item();
}

inline std::vector<Tensor> model_gradient(const model::WorldlineModel& m, const model::SceneInput& input) {
  grad::Graph g;
  const auto res = model::forward(g, m, input);
  g.backward(res.loss);
  std::vector<Tensor> out;
  for (const auto& p : res.params) out.push_back(p.grad());
  return out;
}

struct ModelFdStats {
  double worst = 0.0;
  std::size_t checked = 0;
};

/// Central differences of the full loss against backprop. `coords` = 0 checks
/// every parameter; otherwise that many random coordinates plus one random
/// direction through all parameters.
inline ModelFdStats model_fd(model::WorldlineModel m, const model::SceneInput& input, Rng& rng, std::size_t coords,
                             double step = 1e-5) {
  const auto grads = model_gradient(m, input);
  ModelFdStats stats;
  auto probe = [&](std::size_t p, std::size_t i) {
    double& v = m.parameters()[p].value[i];
    const double saved = v;
    v = saved + step;
    const double lp = model_loss(m, input);
    v = saved - step;
    const double lm = model_loss(m, input);
    v = saved;
    stats.worst = std::max(stats.worst, fd_error(grads[p][i], (lp - lm) / (2.0 * step)));
    ++stats.checked;
  };
  const auto params = m.parameters();
  if (coords == 0) {
    for (std::size_t p = 0; p < params.size(); ++p)
      for (std::size_t i = 0; i < params[p].value.size(); ++i) probe(p, i);
    return stats;
  }
  for (std::size_t c = 0; c < coords; ++c) {
    const auto p = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(params.size()) - 1));
    probe(p, static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(params[p].value.size()) - 1)));
  }
  // Random direction through the whole parameter vector.
  std::vector<Tensor> dir;
  double n2 = 0.0, analytic = 0.0;
  for (const auto& p : params) {
    dir.push_back(random_tensor(rng, p.value.shape()));
    for (double d : dir.back().data()) n2 += d * d;
  }
  const double inv = 1.0 / std::sqrt(n2);
  model::WorldlineModel plus = m, minus = m;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].value.size(); ++i) {
      const double d = dir[p][i] * inv;
      analytic += grads[p][i] * d;
      plus.parameters()[p].value[i] += step * d;
      minus.parameters()[p].value[i] -= step * d;
    }
  }
  stats.worst = std::max(stats.worst, fd_error(analytic, (model_loss(plus, input) - model_loss(minus, input)) / (2.0 * step)));
  ++stats.checked;
  return stats;
}

/// End-to-end gradient of the loss for every mode on random 5-point scenes
/// (k = 3 neighbours so the density is defined).
inline CheckResult check_model_gradients(std::size_t instances = 100, std::size_t coords = 40, double tol = 1e-3) {
  double worst = 0.0;
  std::size_t checked = 0;
  Rng rng(4242);
  for (std::size_t i = 0; i < instances; ++i) {
    model::ModelConfig cfg;
    cfg.mode = model::kAllModes[i % model::kAllModes.size()];
    cfg.k_neighbors = 3;
    cfg.kernel_route = grad::KernelRoute::kSerial;
    const model::WorldlineModel m(cfg, 900 + i);
    const auto input = model::prepare_input(random_small_scene(rng), cfg.k_neighbors);
    const auto s = model_fd(m, input, rng, coords);
    worst = std::max(worst, s.worst);
    checked += s.checked;
  }
  return {worst < tol, fmt("%zu models, %zu probes, max rel err %.2e", instances, checked, worst)};
}

}  // namespace wlsa::testing

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "wlsa/errors.hpp"
#include "wlsa/metrics.hpp"

namespace wlsa::metrics {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

WelchResult welch_stats(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ContractError("welch_stats: each group needs at least 2 values");
  namespace bm = boost::math;
  WelchResult r;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  r.mean_a = mean(a);
  r.mean_b = mean(b);
  r.std_a = sample_std(a);
  r.std_b = sample_std(b);
  const double va = r.std_a * r.std_a, vb = r.std_b * r.std_b;
  const double diff = r.mean_a - r.mean_b;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  const double pooled = std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
  r.cohens_d = pooled > 0.0 ? diff / pooled : (diff == 0.0 ? 0.0 : std::copysign(kInf, diff));
  r.cohens_d_group_a = r.std_a > 0.0 ? diff / r.std_a : (diff == 0.0 ? 0.0 : std::copysign(kInf, diff));

  const double t_crit = bm::quantile(bm::complement(bm::students_t(na - 1.0), 0.025));
  r.ci95_low = r.mean_a - t_crit * r.std_a / std::sqrt(na);
  r.ci95_high = r.mean_a + t_crit * r.std_a / std::sqrt(na);

  const double se2a = va / na, se2b = vb / nb;
  const double se = std::sqrt(se2a + se2b);
  if (se == 0.0) {
    r.degenerate = true;
    r.dof = na + nb - 2.0;
    r.t = diff == 0.0 ? 0.0 : std::copysign(kInf, diff);
    r.p_two_sided = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = diff / se;
  r.dof = (se2a + se2b) * (se2a + se2b) /
          (se2a * se2a / (na - 1.0) + se2b * se2b / (nb - 1.0));
  r.p_two_sided = 2.0 * bm::cdf(bm::complement(bm::students_t(r.dof), std::abs(r.t)));
  r.p_two_sided = std::min(1.0, r.p_two_sided);
  return r;
}

std::string format_p(double p) {
  if (p < 1e-12) return "<1e-12";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", p);
  return buf;
}

}  // namespace wlsa::metrics

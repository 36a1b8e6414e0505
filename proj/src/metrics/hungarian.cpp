#include <cmath>
#include <limits>

#include "wlsa/errors.hpp"
#include "wlsa/metrics.hpp"

namespace wlsa::metrics {

// Shortest-augmenting-path Kuhn–Munkres with row/column potentials, O(n³).
HungarianResult hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost) {
    if (row.size() != n) throw ContractError("hungarian: cost matrix must be square");
    for (double c : row)
      if (!std::isfinite(c)) throw ContractError("hungarian: costs must be finite");
  }
  HungarianResult result;
  if (n == 0) return result;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based internals; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.assignment.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result.assignment[match[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) result.cost += cost[i][result.assignment[i]];
  return result;
}

}  // namespace wlsa::metrics
